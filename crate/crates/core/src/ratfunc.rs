//! Global rational matrix functions in partial-fraction form, their
//! exact calculus, the coefficient-matching solver that constructs
//! rational fundamental solutions, the adjoint construction and the
//! symbolic verifier.
//!
//! A [`RatMatFunc`] is stored as pole parts (coefficients of
//! (z - z_k)^{-p}) plus a matrix polynomial. Products go through a
//! numerator/denominator form: the numerator is a matrix polynomial and
//! the denominator a product of known linear factors, so re-expansion
//! into partial fractions is a Taylor computation at each pole.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exactalg::{self};
use crate::kzsystem::{degree_bounds, KzError, KzSystem};
use crate::series::{Center, MatLaurent};
use crate::{rat, RatMatrix, Rational};

// ---------------------------------------------------------------------------
// scalar and matrix polynomial helpers (coefficients ascending)

fn sp_trim(p: &mut Vec<Rational>) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn sp_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Taylor shift: coefficients of p(u + a) in u.
fn sp_shift(p: &[Rational], a: &Rational) -> Vec<Rational> {
    let n = p.len();
    let mut out = vec![Rational::zero(); n];
    for (i, c) in p.iter().enumerate() {
        // c * (u+a)^i expanded with binomials
        let mut binom = Rational::one();
        let mut apow = Rational::one();
        for j in (0..=i).rev() {
            // binom = C(i, j), apow = a^{i-j}
            out[j] += c * &binom * &apow;
            if j > 0 {
                binom = binom * rat(j as i64) / rat((i - j + 1) as i64);
                apow = apow * a;
            }
        }
    }
    out
}

/// Multiplicative inverse of a power series mod u^m (constant term nonzero).
fn sp_series_inv(p: &[Rational], m: usize) -> Vec<Rational> {
    let c0 = p[0].clone();
    assert!(!c0.is_zero());
    let mut inv = vec![Rational::zero(); m];
    inv[0] = c0.recip();
    for i in 1..m {
        let mut acc = Rational::zero();
        for j in 1..=i {
            if j < p.len() {
                acc += &p[j] * &inv[i - j];
            }
        }
        inv[i] = -acc / &c0;
    }
    inv
}

fn sp_from_factors(factors: &[(Rational, usize)]) -> Vec<Rational> {
    let mut out = vec![Rational::one()];
    for (a, m) in factors {
        let lin = vec![-a.clone(), Rational::one()];
        for _ in 0..*m {
            out = sp_mul(&out, &lin);
        }
    }
    out
}

type MatPoly = Vec<RatMatrix>;

fn mp_trim(p: &mut MatPoly) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn mp_add(a: &MatPoly, b: &MatPoly, rows: usize, cols: usize) -> MatPoly {
    let len = a.len().max(b.len());
    let zero = RatMatrix::zeros(rows, cols);
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let x = a.get(i).unwrap_or(&zero);
        let y = b.get(i).unwrap_or(&zero);
        out.push(x + y);
    }
    mp_trim(&mut out);
    out
}

fn mp_scale_sp(mp: &MatPoly, sp: &[Rational], rows: usize, cols: usize) -> MatPoly {
    if mp.is_empty() || sp.is_empty() {
        return Vec::new();
    }
    let mut out = vec![RatMatrix::zeros(rows, cols); mp.len() + sp.len() - 1];
    for (i, m) in mp.iter().enumerate() {
        for (j, c) in sp.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out[i + j] = &out[i + j] + &m.scale(c);
        }
    }
    mp_trim(&mut out);
    out
}

fn mp_mul(a: &MatPoly, b: &MatPoly, rows: usize, cols: usize) -> MatPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![RatMatrix::zeros(rows, cols); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    mp_trim(&mut out);
    out
}

/// Long division of a matrix polynomial by a scalar polynomial.
fn mp_divmod_sp(
    num: &MatPoly,
    den: &[Rational],
    rows: usize,
    cols: usize,
) -> (MatPoly, MatPoly) {
    let dd = den.len() - 1;
    let lead = den.last().unwrap().clone();
    let mut rem: MatPoly = num.clone();
    mp_trim(&mut rem);
    if rem.len() <= dd {
        return (Vec::new(), rem);
    }
    let mut quot = vec![RatMatrix::zeros(rows, cols); rem.len() - dd];
    while rem.len() > dd {
        let k = rem.len() - 1 - dd;
        let coef = rem.last().unwrap().scale(&lead.recip());
        quot[k] = coef.clone();
        for (j, c) in den.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            rem[k + j] = &rem[k + j] - &coef.scale(c);
        }
        mp_trim(&mut rem);
        if rem.is_empty() {
            break;
        }
    }
    mp_trim(&mut quot);
    (quot, rem)
}

fn mp_shift(p: &MatPoly, a: &Rational, rows: usize, cols: usize) -> MatPoly {
    let n = p.len();
    let mut out = vec![RatMatrix::zeros(rows, cols); n];
    for (i, c) in p.iter().enumerate() {
        let mut binom = Rational::one();
        let mut apow = Rational::one();
        for j in (0..=i).rev() {
            out[j] = &out[j] + &c.scale(&(&binom * &apow));
            if j > 0 {
                binom = binom * rat(j as i64) / rat((i - j + 1) as i64);
                apow = apow * a;
            }
        }
    }
    out
}

fn mp_eval(p: &MatPoly, x: &Rational, rows: usize, cols: usize) -> RatMatrix {
    let mut acc = RatMatrix::zeros(rows, cols);
    for c in p.iter().rev() {
        acc = &acc.scale(x) + c;
    }
    acc
}

// ---------------------------------------------------------------------------

/// A rational matrix function: pole parts plus a matrix polynomial.
/// Per pole, index p-1 holds the coefficient of (z - z_k)^{-p}.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMatFunc {
    rows: usize,
    cols: usize,
    pole_parts: BTreeMap<Rational, Vec<RatMatrix>>,
    poly_part: Vec<RatMatrix>,
}

impl RatMatFunc {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMatFunc {
            rows,
            cols,
            pole_parts: BTreeMap::new(),
            poly_part: Vec::new(),
        }
    }

    pub fn from_poly(coeffs: Vec<RatMatrix>, rows: usize, cols: usize) -> Self {
        let mut f = RatMatFunc {
            rows,
            cols,
            pole_parts: BTreeMap::new(),
            poly_part: coeffs,
        };
        f.normalize();
        f
    }

    pub fn constant(m: RatMatrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        Self::from_poly(vec![m], rows, cols)
    }

    /// Adds the term coeff * (z - pole)^{-order}, order >= 1.
    pub fn add_pole_term(&mut self, pole: Rational, order: usize, coeff: RatMatrix) {
        assert!(order >= 1);
        assert_eq!((coeff.rows(), coeff.cols()), (self.rows, self.cols));
        let entry = self.pole_parts.entry(pole).or_default();
        while entry.len() < order {
            entry.push(RatMatrix::zeros(self.rows, self.cols));
        }
        entry[order - 1] = &entry[order - 1] + &coeff;
        self.normalize();
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn normalize(&mut self) {
        mp_trim(&mut self.poly_part);
        self.pole_parts.retain(|_, v| {
            while v.last().map(|c| c.is_zero()).unwrap_or(false) {
                v.pop();
            }
            !v.is_empty()
        });
    }

    pub fn is_zero(&self) -> bool {
        self.poly_part.is_empty() && self.pole_parts.is_empty()
    }

    /// Degree of the polynomial part; None when it is absent.
    pub fn poly_degree(&self) -> Option<i64> {
        if self.poly_part.is_empty() {
            None
        } else {
            Some(self.poly_part.len() as i64 - 1)
        }
    }

    pub fn poly_coeff(&self, j: usize) -> RatMatrix {
        self.poly_part
            .get(j)
            .cloned()
            .unwrap_or_else(|| RatMatrix::zeros(self.rows, self.cols))
    }

    /// Poles with nonzero parts, paired with their orders.
    pub fn pole_orders(&self) -> Vec<(Rational, usize)> {
        self.pole_parts
            .iter()
            .map(|(z, v)| (z.clone(), v.len()))
            .collect()
    }

    /// Coefficient of (z - pole)^{-order}.
    pub fn pole_coeff(&self, pole: &Rational, order: usize) -> RatMatrix {
        self.pole_parts
            .get(pole)
            .and_then(|v| v.get(order - 1))
            .cloned()
            .unwrap_or_else(|| RatMatrix::zeros(self.rows, self.cols))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        out.poly_part = mp_add(&out.poly_part, &other.poly_part, self.rows, self.cols);
        for (z, v) in &other.pole_parts {
            for (i, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    let entry = out.pole_parts.entry(z.clone()).or_default();
                    while entry.len() < i + 1 {
                        entry.push(RatMatrix::zeros(self.rows, self.cols));
                    }
                    entry[i] = &entry[i] + c;
                }
            }
        }
        out.normalize();
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.poly_part = out.poly_part.iter().map(|c| -c).collect();
        for v in out.pole_parts.values_mut() {
            for c in v.iter_mut() {
                *c = -&*c;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = self.clone();
        out.poly_part = out.poly_part.iter().map(|c| c.scale(s)).collect();
        for v in out.pole_parts.values_mut() {
            for c in v.iter_mut() {
                *c = c.scale(s);
            }
        }
        out.normalize();
        out
    }

    /// Constant matrix times the function.
    pub fn left_mul(&self, m: &RatMatrix) -> Self {
        let mut out = RatMatFunc::zero(m.rows(), self.cols);
        out.poly_part = self.poly_part.iter().map(|c| m * c).collect();
        for (z, v) in &self.pole_parts {
            out.pole_parts
                .insert(z.clone(), v.iter().map(|c| m * c).collect());
        }
        out.normalize();
        out
    }

    pub fn right_mul(&self, m: &RatMatrix) -> Self {
        let mut out = RatMatFunc::zero(self.rows, m.cols());
        out.poly_part = self.poly_part.iter().map(|c| c * m).collect();
        for (z, v) in &self.pole_parts {
            out.pole_parts
                .insert(z.clone(), v.iter().map(|c| c * m).collect());
        }
        out.normalize();
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = RatMatFunc::zero(self.cols, self.rows);
        out.poly_part = self.poly_part.iter().map(|c| c.transpose()).collect();
        for (z, v) in &self.pole_parts {
            out.pole_parts
                .insert(z.clone(), v.iter().map(|c| c.transpose()).collect());
        }
        out.normalize();
        out
    }

    /// Exact evaluation at a non-pole point.
    pub fn eval(&self, z0: &Rational) -> Result<RatMatrix, KzError> {
        if self.pole_parts.contains_key(z0) {
            return Err(KzError::EvaluationAtPole);
        }
        let mut acc = mp_eval(&self.poly_part, z0, self.rows, self.cols);
        for (z, v) in &self.pole_parts {
            let d = z0 - z;
            let inv = d.recip();
            let mut pw = inv.clone();
            for c in v {
                acc = &acc + &c.scale(&pw);
                pw = pw * &inv;
            }
        }
        Ok(acc)
    }

    /// Exact termwise derivative.
    pub fn diff(&self) -> Self {
        let mut out = RatMatFunc::zero(self.rows, self.cols);
        for (j, c) in self.poly_part.iter().enumerate().skip(1) {
            let idx = j - 1;
            while out.poly_part.len() < idx + 1 {
                out.poly_part.push(RatMatrix::zeros(self.rows, self.cols));
            }
            out.poly_part[idx] = &out.poly_part[idx] + &c.scale(&rat(j as i64));
        }
        for (z, v) in &self.pole_parts {
            let dv: Vec<RatMatrix> = std::iter::once(RatMatrix::zeros(self.rows, self.cols))
                .chain(v.iter().enumerate().map(|(i, c)| {
                    // (z-a)^{-p} -> -p (z-a)^{-p-1}, p = i+1
                    c.scale(&rat(-(i as i64 + 1)))
                }))
                .collect();
            out.pole_parts.insert(z.clone(), dv);
        }
        out.normalize();
        out
    }

    /// Numerator matrix polynomial over the factored denominator
    /// prod (z - z_k)^{m_k}.
    fn to_fraction(&self) -> (MatPoly, Vec<(Rational, usize)>) {
        let factors: Vec<(Rational, usize)> = self
            .pole_parts
            .iter()
            .map(|(z, v)| (z.clone(), v.len()))
            .collect();
        let den = sp_from_factors(&factors);
        let mut num = mp_scale_sp(&self.poly_part, &den, self.rows, self.cols);
        for (z, v) in &self.pole_parts {
            // cofactor polynomial: den with p factors of (z - z_k) removed
            for (i, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let p = i + 1;
                let mut cof: Vec<(Rational, usize)> = Vec::new();
                for (a, m) in &factors {
                    let m = if a == z { m - p } else { *m };
                    if m > 0 {
                        cof.push((a.clone(), m));
                    }
                }
                let cof_poly = sp_from_factors(&cof);
                let term = mp_scale_sp(&vec![c.clone()], &cof_poly, self.rows, self.cols);
                num = mp_add(&num, &term, self.rows, self.cols);
            }
        }
        (num, factors)
    }

    /// Partial-fraction decomposition of numer / prod (z - a)^m. The pole
    /// coefficients come from the Taylor expansion of numer times the
    /// inverted cofactor series at each pole.
    fn from_fraction(
        numer: MatPoly,
        factors: &[(Rational, usize)],
        rows: usize,
        cols: usize,
    ) -> Self {
        // merge repeated factors
        let mut merged: BTreeMap<Rational, usize> = BTreeMap::new();
        for (a, m) in factors {
            *merged.entry(a.clone()).or_insert(0) += m;
        }
        let merged: Vec<(Rational, usize)> = merged.into_iter().collect();
        let den = sp_from_factors(&merged);
        let (quot, rem) = mp_divmod_sp(&numer, &den, rows, cols);
        let mut out = RatMatFunc {
            rows,
            cols,
            pole_parts: BTreeMap::new(),
            poly_part: quot,
        };
        for (a, m) in &merged {
            let mut cof: Vec<(Rational, usize)> = Vec::new();
            for (b, mb) in &merged {
                if b != a {
                    cof.push((b.clone(), *mb));
                }
            }
            let mut dtilde = sp_shift(&sp_from_factors(&cof), a);
            sp_trim(&mut dtilde);
            let inv = sp_series_inv(&dtilde, *m);
            let rshift = mp_shift(&rem, a, rows, cols);
            // t_j = sum_{i} rshift_i inv_{j-i}, j < m
            let mut coeffs: Vec<RatMatrix> = Vec::new();
            for p in (1..=*m).rev() {
                let j = m - p;
                let mut t = RatMatrix::zeros(rows, cols);
                for i in 0..=j {
                    if i < rshift.len() {
                        t = &t + &rshift[i].scale(&inv[j - i]);
                    }
                }
                coeffs.push(t);
            }
            // coeffs is ordered p = m..1; store index p-1
            let mut v = vec![RatMatrix::zeros(rows, cols); *m];
            for (idx, p) in (1..=*m).rev().enumerate() {
                v[p - 1] = coeffs[idx].clone();
            }
            out.pole_parts.insert(a.clone(), v);
        }
        out.normalize();
        out
    }

    /// Exact product, re-expressed in partial-fraction form.
    pub fn mul(&self, other: &Self) -> Result<Self, KzError> {
        if self.cols != other.rows {
            return Err(KzError::LinAlg(crate::exactalg::LinAlgError::DimensionMismatch(
                format!(
                    "cannot multiply {}x{} by {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            )));
        }
        let (n1, f1) = self.to_fraction();
        let (n2, f2) = other.to_fraction();
        let num = mp_mul(&n1, &n2, self.rows, other.cols);
        let mut factors = f1;
        factors.extend(f2);
        Ok(Self::from_fraction(num, &factors, self.rows, other.cols))
    }

    /// Expansion at infinity as a truncated series in u = 1/z
    /// (exponents of u up to `trunc`).
    pub fn expand_at_infinity(&self, trunc: i64) -> MatLaurent<Rational> {
        let mut terms: BTreeMap<i64, RatMatrix> = BTreeMap::new();
        let mut addt = |e: i64, m: RatMatrix| {
            if e > trunc {
                return;
            }
            terms
                .entry(e)
                .and_modify(|x| *x = &*x + &m)
                .or_insert(m);
        };
        for (j, c) in self.poly_part.iter().enumerate() {
            addt(-(j as i64), c.clone());
        }
        for (a, v) in &self.pole_parts {
            for (i, c) in v.iter().enumerate() {
                let p = (i + 1) as i64;
                // (z-a)^{-p} = u^p sum_i C(p-1+i, i) a^i u^i
                let mut binom = Rational::one();
                let mut apow = Rational::one();
                let mut i2 = 0i64;
                while p + i2 <= trunc {
                    addt(p + i2, c.scale(&(&binom * &apow)));
                    i2 += 1;
                    binom = binom * rat(p - 1 + i2) / rat(i2);
                    apow = apow * a;
                }
            }
        }
        let min = terms.keys().next().copied().unwrap_or(trunc + 1);
        let mut coeffs = Vec::new();
        for e in min..=trunc {
            coeffs.push(
                terms
                    .get(&e)
                    .cloned()
                    .unwrap_or_else(|| RatMatrix::zeros(self.rows, self.cols)),
            );
        }
        MatLaurent::new(Center::AtInfinity, min, coeffs)
    }

    /// Re-expansion as a local Laurent series at a finite point.
    pub fn expand_at(&self, center: &Rational, trunc: i64) -> MatLaurent<Rational> {
        let (num, factors) = self.to_fraction();
        let m = factors
            .iter()
            .find(|(a, _)| a == center)
            .map(|(_, m)| *m)
            .unwrap_or(0);
        let mut cof: Vec<(Rational, usize)> = Vec::new();
        for (a, ma) in &factors {
            if a != center {
                cof.push((a.clone(), *ma));
            }
        }
        let len = (trunc + m as i64 + 1).max(0) as usize;
        let mut dtilde = sp_shift(&sp_from_factors(&cof), center);
        sp_trim(&mut dtilde);
        let inv = sp_series_inv(&dtilde, len.max(1));
        let nshift = mp_shift(&num, center, self.rows, self.cols);
        let mut coeffs = Vec::new();
        for j in 0..len {
            let mut t = RatMatrix::zeros(self.rows, self.cols);
            for i in 0..=j {
                if i < nshift.len() {
                    t = &t + &nshift[i].scale(&inv[j - i]);
                }
            }
            coeffs.push(t);
        }
        MatLaurent::new(Center::Finite(center.clone()), -(m as i64), coeffs)
    }

    /// Derivative evaluated directly at a point, term by term. Used by the
    /// verifier as a code path independent of `diff` + partial fractions.
    pub fn eval_derivative(&self, z0: &Rational) -> Result<RatMatrix, KzError> {
        if self.pole_parts.contains_key(z0) {
            return Err(KzError::EvaluationAtPole);
        }
        let mut acc = RatMatrix::zeros(self.rows, self.cols);
        for (j, c) in self.poly_part.iter().enumerate().skip(1) {
            let mut p = Rational::one();
            for _ in 0..j - 1 {
                p = p * z0;
            }
            acc = &acc + &c.scale(&(rat(j as i64) * p));
        }
        for (a, v) in &self.pole_parts {
            let d = z0 - a;
            for (i, c) in v.iter().enumerate() {
                let p = i as i64 + 1;
                let mut den = Rational::one();
                for _ in 0..p + 1 {
                    den = den * &d;
                }
                acc = &acc + &c.scale(&(rat(-p) / den));
            }
        }
        Ok(acc)
    }
}

/// A(z) as a rational matrix function with simple poles.
pub fn system_a_func(system: &KzSystem) -> RatMatFunc {
    let n = system.dim();
    let mut f = RatMatFunc::zero(n, n);
    for (z, p) in system.poles().iter().zip(system.residues()) {
        f.add_pole_term(z.clone(), 1, p.clone());
    }
    f
}

// ---------------------------------------------------------------------------
// solver

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Found,
    /// Definitive under the ansatz bounds used.
    NotFound,
    /// The search failed but the bounds were capped below the recommended
    /// ones, so the negative outcome is evidence, not proof.
    ConditionsUnknown,
}

/// Ansatz bounds a solve ran with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveBounds {
    pub max_pole_order: usize,
    /// None means no polynomial part was allowed.
    pub max_poly_degree: Option<i64>,
    /// True when the caller capped the bounds below the degree-bound
    /// recommendation.
    pub capped: bool,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub w: Option<RatMatFunc>,
    /// Dimension of the space of rational vector solutions within the
    /// ansatz (n means a fundamental matrix can exist).
    pub kernel_dimension: usize,
    pub certificate: Option<VerificationRecord>,
    pub reason: Option<String>,
    pub bounds: SolveBounds,
}

/// Record produced by [`verify`]: exact residual status, determinant
/// evidence at sample points and the degree comparison against the
/// infinity bounds.
#[derive(Debug, Clone)]
pub struct VerificationRecord {
    /// dW/dz - rho A W is the zero rational function, exactly.
    pub residual_zero: bool,
    /// Independent pointwise cross-check of the residual at the sample
    /// points (termwise derivative evaluation vs rho A(z)W(z)).
    pub pointwise_residual_ok: bool,
    /// (point, det W(point)) at random non-pole rational points.
    pub det_evidence: Vec<(Rational, Rational)>,
    pub det_nonzero: bool,
    /// Nullity of W at each sample point.
    pub nullity_at_points: Vec<usize>,
    /// Observed degree of the polynomial part (None: absent).
    pub poly_degree: Option<i64>,
    pub pole_orders: Vec<(Rational, usize)>,
    /// Predicted deg Q1 / deg Q2 from the integer spectrum of rho T
    /// (None: the polynomial part should vanish or no prediction exists).
    pub expected_deg_q1: Option<i64>,
    pub expected_deg_q2: Option<i64>,
    pub poly_degree_matches_bound: bool,
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num = rng.gen_range(-40i64..=40);
    let den = rng.gen_range(1i64..=7);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn random_nonpole(rng: &mut ChaCha8Rng, poles: &[Rational]) -> Rational {
    loop {
        let z = random_rational(rng);
        if !poles.contains(&z) {
            return z;
        }
    }
}

/// True iff det W is not the identically-zero rational function: the
/// determinant of the polynomial numerator is a polynomial of bounded
/// degree, so evaluating it at degree+1 points decides the question
/// exactly.
pub fn det_not_identically_zero(w: &RatMatFunc) -> bool {
    assert_eq!(w.rows(), w.cols());
    let n = w.rows();
    let (num, factors) = w.to_fraction();
    if num.is_empty() {
        return false;
    }
    let deg = (num.len() - 1) * n;
    let _ = factors;
    for i in 0..=deg as i64 {
        let point = rat(i);
        let m = mp_eval(&num, &point, n, n);
        if !m.det().expect("square").is_zero() {
            return true;
        }
    }
    false
}

/// Constructs a rational fundamental solution of dW/dz = rho A W by
/// matching partial-fraction coefficients of the residual. The unknowns
/// decouple by column: each column is an independent vector ansatz
/// sum_k sum_p l_{k,p} (z-z_k)^{-p} + sum_j q_j z^j, and the rational
/// vector-solution space is the kernel of one exact homogeneous system.
/// A deterministic sweep then looks for a column combination with
/// determinant not identically zero.
pub fn solve_rational(
    system: &KzSystem,
    max_pole_order: usize,
    max_poly_degree: Option<i64>,
    seed: u64,
) -> Result<SolveOutcome, KzError> {
    let n = system.dim();
    let s = system.pole_count();

    // Necessary condition at each finite pole: an integer local exponent.
    for k in 1..=s {
        let eff = system.effective_residue(k)?;
        let spec = exactalg::integer_spectrum(&eff)?;
        if spec.integer_roots.is_empty() {
            return Ok(SolveOutcome {
                status: SolveStatus::NotFound,
                w: None,
                kernel_dimension: 0,
                certificate: None,
                reason: Some(format!(
                    "no integer local exponents: the effective residue at pole {k} has no integer eigenvalues"
                )),
                bounds: SolveBounds {
                    max_pole_order,
                    max_poly_degree,
                    capped: false,
                },
            });
        }
    }

    let db = degree_bounds(system)?;
    if db.big_m_t.is_none() {
        return Ok(SolveOutcome {
            status: SolveStatus::NotFound,
            w: None,
            kernel_dimension: 0,
            certificate: None,
            reason: Some(
                "no integer exponents at infinity: rho T has no integer eigenvalues".into(),
            ),
            bounds: SolveBounds {
                max_pole_order,
                max_poly_degree,
                capped: false,
            },
        });
    }

    // Recommended polynomial degree: deg Q1 = M_T when M_T >= 0, else no
    // polynomial part.
    let recommended_degree: Option<i64> = db.big_m_t.filter(|m| *m >= 0);
    let poly_degree = match max_poly_degree {
        Some(d) if d < 0 => None,
        Some(d) => Some(d),
        None => recommended_degree,
    };
    let capped = max_pole_order < 1
        || matches!((poly_degree, recommended_degree), (a, b) if a < b)
        || !db.all_integer;
    let bounds = SolveBounds {
        max_pole_order,
        max_poly_degree: poly_degree,
        capped,
    };

    // Unknown layout for one column: pole blocks then polynomial block.
    let dpoly: i64 = poly_degree.map(|d| d + 1).unwrap_or(0);
    let unknowns = n * (s * max_pole_order + dpoly as usize);
    if unknowns == 0 {
        return Ok(SolveOutcome {
            status: SolveStatus::NotFound,
            w: None,
            kernel_dimension: 0,
            certificate: None,
            reason: Some("empty ansatz".into()),
            bounds,
        });
    }

    let a_func = system_a_func(system);
    let rho = system.rho_rational();

    // Residual of each unit basis column function.
    let mut residuals: Vec<RatMatFunc> = Vec::with_capacity(unknowns);
    for u in 0..unknowns {
        let mut f = RatMatFunc::zero(n, 1);
        let (block, entry) = (u / n, u % n);
        let mut e = RatMatrix::zeros(n, 1);
        e[(entry, 0)] = rat(1);
        if block < s * max_pole_order {
            let k = block / max_pole_order;
            let p = block % max_pole_order + 1;
            f.add_pole_term(system.poles()[k].clone(), p, e);
        } else {
            let j = block - s * max_pole_order;
            let mut coeffs = vec![RatMatrix::zeros(n, 1); j + 1];
            coeffs[j] = e;
            f = RatMatFunc::from_poly(coeffs, n, 1);
        }
        let aw = a_func.mul(&f)?.scale(&rho);
        residuals.push(f.diff().sub(&aw));
    }

    // Constraint slots: union of pole coefficients and polynomial
    // coefficients appearing in any residual.
    let mut max_order: BTreeMap<Rational, usize> = BTreeMap::new();
    let mut max_poly = 0usize;
    for r in &residuals {
        for (z, o) in r.pole_orders() {
            let e = max_order.entry(z).or_insert(0);
            *e = (*e).max(o);
        }
        max_poly = max_poly.max(r.poly_part.len());
    }

    let mut rows_count = 0usize;
    for o in max_order.values() {
        rows_count += o * n;
    }
    rows_count += max_poly * n;

    let mut coef = RatMatrix::zeros(rows_count, unknowns);
    for (u, r) in residuals.iter().enumerate() {
        let mut row = 0usize;
        for (z, o) in &max_order {
            for p in 1..=*o {
                let c = r.pole_coeff(z, p);
                for i in 0..n {
                    coef[(row, u)] = c[(i, 0)].clone();
                    row += 1;
                }
            }
        }
        for j in 0..max_poly {
            let c = r.poly_coeff(j);
            for i in 0..n {
                coef[(row, u)] = c[(i, 0)].clone();
                row += 1;
            }
        }
    }

    let kernel = exactalg::nullspace(&coef);
    let dim = kernel.len();

    let build_column = |coeffs: &RatMatrix| -> RatMatFunc {
        let mut f = RatMatFunc::zero(n, 1);
        let mut poly = vec![RatMatrix::zeros(n, 1); dpoly as usize];
        for u in 0..unknowns {
            let val = coeffs[(u, 0)].clone();
            if val.is_zero() {
                continue;
            }
            let (block, entry) = (u / n, u % n);
            if block < s * max_pole_order {
                let k = block / max_pole_order;
                let p = block % max_pole_order + 1;
                let mut e = RatMatrix::zeros(n, 1);
                e[(entry, 0)] = val;
                f.add_pole_term(system.poles()[k].clone(), p, e);
            } else {
                let j = block - s * max_pole_order;
                poly[j][(entry, 0)] = val;
            }
        }
        f.add(&RatMatFunc::from_poly(poly, n, 1))
    };

    if dim < n {
        let status = if capped || system.rho().abs() > 1 {
            SolveStatus::ConditionsUnknown
        } else {
            SolveStatus::NotFound
        };
        return Ok(SolveOutcome {
            status,
            w: None,
            kernel_dimension: dim,
            certificate: None,
            reason: Some(format!(
                "rational solution space within the ansatz has dimension {dim} < {n}"
            )),
            bounds,
        });
    }

    let columns: Vec<RatMatFunc> = kernel.iter().map(|v| build_column(v)).collect();

    let assemble = |mix: &RatMatrix| -> RatMatFunc {
        // mix is dim x n: candidate column c = sum_j mix[j][c] * columns[j]
        let mut w = RatMatFunc::zero(n, n);
        for (j, col) in columns.iter().enumerate() {
            let mut sel = RatMatrix::zeros(1, n);
            for c in 0..n {
                sel[(0, c)] = mix[(j, c)].clone();
            }
            w = w.add(&col.right_mul(&sel));
        }
        w
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempt = 0usize;
    while attempt < 64 {
        let mix = match attempt {
            0 => RatMatrix::from_fn(dim, n, |r, c| if r == c { rat(1) } else { rat(0) }),
            1 => RatMatrix::from_fn(dim, n, |r, c| {
                if r == c || r == (c + 1) % dim {
                    rat(1)
                } else {
                    rat(0)
                }
            }),
            _ => RatMatrix::from_fn(dim, n, |_, _| rat(rng.gen_range(-3i64..=3))),
        };
        attempt += 1;
        let w = assemble(&mix);
        if det_not_identically_zero(&w) {
            let certificate = verify(system, &w, seed)?;
            return Ok(SolveOutcome {
                status: SolveStatus::Found,
                w: Some(w),
                kernel_dimension: dim,
                certificate: Some(certificate),
                reason: None,
                bounds,
            });
        }
    }

    let status = if capped || system.rho().abs() > 1 {
        SolveStatus::ConditionsUnknown
    } else {
        SolveStatus::NotFound
    };
    Ok(SolveOutcome {
        status,
        w: None,
        kernel_dimension: dim,
        certificate: None,
        reason: Some("kernel search exhausted without an invertible element".into()),
        bounds,
    })
}

/// Solves the adjoint system dY/dz = -rho Y A and normalizes so that
/// W(z) Y(z) is the identity. The left system is solved by the same
/// coefficient-matching machinery applied to the transposed system.
pub fn adjoint_solution(
    system: &KzSystem,
    w: &RatMatFunc,
    seed: u64,
) -> Result<RatMatFunc, KzError> {
    // Z = Y^T satisfies dZ/dz = -rho A^T Z.
    let adj = KzSystem::new(
        system.poles().to_vec(),
        system.residues().iter().map(|p| p.transpose()).collect(),
        -system.rho(),
    )?;
    let out = solve_rational(&adj, 1, None, seed)?;
    let Some(z) = out.w else {
        return Err(KzError::AdjointNotFound(
            out.reason.unwrap_or_else(|| "left system unsolved".into()),
        ));
    };
    let y0 = z.transpose();

    // Y0 W is constant for any pair of solutions; pin it down and
    // normalize Y = C^{-1} Y0 so that W Y = I.
    let c = y0.mul(w)?;
    if !c.pole_parts.is_empty() || c.poly_part.len() > 1 {
        return Err(KzError::AdjointNotFound(
            "product Y0 W is not constant".into(),
        ));
    }
    let c0 = c.poly_coeff(0);
    let Some(cinv) = c0.inverse()? else {
        return Err(KzError::AdjointNotFound(
            "product Y0 W is singular".into(),
        ));
    };
    let y = y0.left_mul(&cinv);

    // contract: W Y has no pole parts, no non-constant polynomial part,
    // and an invertible constant term
    let wy = w.mul(&y)?;
    let ok = wy.pole_parts.is_empty()
        && wy.poly_part.len() <= 1
        && !wy.poly_coeff(0).det()?.is_zero();
    if !ok {
        return Err(KzError::AdjointNotFound(
            "W Y is not a constant invertible matrix".into(),
        ));
    }
    Ok(y)
}

/// Independent symbolic re-verification of a candidate solution.
pub fn verify(
    system: &KzSystem,
    w: &RatMatFunc,
    seed: u64,
) -> Result<VerificationRecord, KzError> {
    let a_func = system_a_func(system);
    let rho = system.rho_rational();
    let residual = w.diff().sub(&a_func.mul(w)?.scale(&rho));
    let residual_zero = residual.is_zero();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
    let mut sample_poles: Vec<Rational> = system.poles().to_vec();
    sample_poles.extend(w.pole_orders().into_iter().map(|(z, _)| z));

    let mut det_evidence = Vec::new();
    let mut nullity_at_points = Vec::new();
    let mut pointwise_ok = true;
    for _ in 0..3 {
        let z = random_nonpole(&mut rng, &sample_poles);
        let wz = w.eval(&z)?;
        let d = wz.det()?;
        nullity_at_points.push(wz.cols() - wz.rank());
        det_evidence.push((z.clone(), d));

        let lhs = w.eval_derivative(&z)?;
        let rhs = (&system.eval_a(&z)? * &wz).scale(&rho);
        if lhs != rhs {
            pointwise_ok = false;
        }
    }
    let det_nonzero = det_evidence.iter().any(|(_, d)| !d.is_zero());

    let db = degree_bounds(system)?;
    let poly_degree = w.poly_degree();
    let poly_degree_matches_bound = match (poly_degree, db.deg_q1) {
        (Some(d), Some(e)) => d == e,
        (None, None) => true,
        _ => false,
    };

    Ok(VerificationRecord {
        residual_zero,
        pointwise_residual_ok: pointwise_ok,
        det_evidence,
        det_nonzero,
        nullity_at_points,
        poly_degree,
        pole_orders: w.pole_orders(),
        expected_deg_q1: db.deg_q1,
        expected_deg_q2: db.deg_q2,
        poly_degree_matches_bound,
    })
}
