//! Truncated matrix-valued Laurent series at finite centers and at
//! infinity, plus the local expansion coefficients of A(z).
//!
//! A series at infinity is stored as a series in u = 1/z centered at 0
//! and tagged with [`Center::AtInfinity`], so one code path serves both
//! kinds of expansion.

use thiserror::Error;

use crate::exactalg::{Matrix, Scalar};
use crate::kzsystem::{KzError, KzSystem};
use crate::{RatMatrix, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series centers differ")]
    CenterMismatch,
    #[error("matrix dimensions differ")]
    DimensionMismatch,
}

/// Expansion point of a Laurent series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Center<T> {
    Finite(T),
    /// Series in u = 1/z; exponents refer to powers of u.
    AtInfinity,
}

/// Matrix Laurent series truncated at an explicit order: coefficients
/// for exponents `min_order ..= trunc` are known exactly, everything
/// above `trunc` is unknown. Operations never silently extend precision.
#[derive(Debug, Clone, PartialEq)]
pub struct MatLaurent<T: Scalar> {
    center: Center<T>,
    min_order: i64,
    /// Coefficient of exponent `min_order + i` at position i.
    coeffs: Vec<Matrix<T>>,
    trunc: i64,
}

impl<T: Scalar> MatLaurent<T> {
    /// Builds a series from coefficients for exponents
    /// `min_order ..= min_order + coeffs.len() - 1`; leading zero
    /// coefficients are stripped so the stored leading coefficient is
    /// nonzero unless the series is identically zero.
    pub fn new(center: Center<T>, min_order: i64, coeffs: Vec<Matrix<T>>) -> Self {
        let trunc = min_order + coeffs.len() as i64 - 1;
        let mut s = MatLaurent {
            center,
            min_order,
            coeffs,
            trunc,
        };
        s.normalize();
        s
    }

    /// The zero series known through order `trunc`.
    pub fn zero(center: Center<T>, trunc: i64) -> Self {
        MatLaurent {
            center,
            min_order: trunc + 1,
            coeffs: Vec::new(),
            trunc,
        }
    }

    fn normalize(&mut self) {
        while let Some(first) = self.coeffs.first() {
            if first.is_zero() {
                self.coeffs.remove(0);
                self.min_order += 1;
            } else {
                break;
            }
        }
        if self.coeffs.is_empty() {
            self.min_order = self.trunc + 1;
        }
    }

    pub fn center(&self) -> &Center<T> {
        &self.center
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Least exponent with a nonzero coefficient; None for the zero series.
    pub fn min_order(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.min_order)
        }
    }

    pub fn truncation_order(&self) -> i64 {
        self.trunc
    }

    /// Coefficient at `exponent`; zero below the leading term. Panics when
    /// asked beyond the truncation order, which would silently fabricate
    /// precision.
    pub fn coeff(&self, exponent: i64) -> Matrix<T> {
        assert!(
            exponent <= self.trunc,
            "coefficient {exponent} beyond truncation order {}",
            self.trunc
        );
        if exponent < self.min_order {
            return Matrix::zeros(self.dim_rows(), self.dim_cols());
        }
        self.coeffs[(exponent - self.min_order) as usize].clone()
    }

    fn dim_rows(&self) -> usize {
        self.coeffs.first().map(|m| m.rows()).unwrap_or(0)
    }

    fn dim_cols(&self) -> usize {
        self.coeffs.first().map(|m| m.cols()).unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.center != other.center {
            return Err(SeriesError::CenterMismatch);
        }
        let trunc = self.trunc.min(other.trunc);
        if self.is_zero() {
            let mut o = other.clone();
            o.truncate(trunc);
            return Ok(o);
        }
        if other.is_zero() {
            let mut s = self.clone();
            s.truncate(trunc);
            return Ok(s);
        }
        if (self.dim_rows(), self.dim_cols()) != (other.dim_rows(), other.dim_cols()) {
            return Err(SeriesError::DimensionMismatch);
        }
        let lo = self.min_order.min(other.min_order);
        let mut coeffs = Vec::new();
        for e in lo..=trunc {
            coeffs.push(&self.coeff(e) + &other.coeff(e));
        }
        Ok(MatLaurent::new(self.center.clone(), lo, coeffs))
    }

    pub fn neg(&self) -> Self {
        MatLaurent {
            center: self.center.clone(),
            min_order: self.min_order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            trunc: self.trunc,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = MatLaurent {
            center: self.center.clone(),
            min_order: self.min_order,
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
            trunc: self.trunc,
        };
        out.normalize();
        out
    }

    /// Cauchy product. The result is only known through
    /// min(f.min + g.trunc, g.min + f.trunc): beyond that, unknown tails
    /// of one factor would contribute.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.center != other.center {
            return Err(SeriesError::CenterMismatch);
        }
        if self.is_zero() || other.is_zero() {
            let trunc = if self.is_zero() && other.is_zero() {
                self.trunc.min(other.trunc)
            } else if self.is_zero() {
                self.min_order - 1 + other.min_order.min(other.trunc)
            } else {
                other.min_order - 1 + self.min_order
            };
            // A zero truncated series annihilates everything it is known
            // to multiply; conservatively keep the combined truncation.
            return Ok(MatLaurent::zero(
                self.center.clone(),
                trunc.max(self.trunc.min(other.trunc)),
            ));
        }
        if self.dim_cols() != other.dim_rows() {
            return Err(SeriesError::DimensionMismatch);
        }
        let lo = self.min_order + other.min_order;
        let trunc = (self.min_order + other.trunc).min(other.min_order + self.trunc);
        let mut coeffs = Vec::new();
        for e in lo..=trunc {
            let mut acc = Matrix::zeros(self.dim_rows(), other.dim_cols());
            for i in self.min_order..=self.trunc {
                let j = e - i;
                if j < other.min_order || j > other.trunc {
                    continue;
                }
                acc = &acc + &(&self.coeff(i) * &other.coeff(j));
            }
            coeffs.push(acc);
        }
        Ok(MatLaurent::new(self.center.clone(), lo, coeffs))
    }

    /// Termwise derivative with respect to the series variable
    /// (z - center, or u for series at infinity). Knowledge shrinks by
    /// one order.
    pub fn differentiate(&self) -> Self {
        let mut coeffs = Vec::new();
        for e in self.min_order..=self.trunc {
            let mut k = T::zero();
            let steps = e.unsigned_abs();
            for _ in 0..steps {
                k += T::one();
            }
            if e < 0 {
                k = -k;
            }
            coeffs.push(self.coeff(e).scale(&k));
        }
        MatLaurent::new(self.center.clone(), self.min_order - 1, coeffs)
    }

    /// Drops knowledge above `trunc`.
    pub fn truncate(&mut self, trunc: i64) {
        if trunc < self.trunc {
            while self.min_order + self.coeffs.len() as i64 - 1 > trunc {
                self.coeffs.pop();
            }
            self.trunc = trunc;
            self.normalize();
        }
    }

    /// Evaluates the truncated series at the point `center + offset`
    /// (offset in the series variable). Offset must be nonzero when
    /// negative exponents are present.
    pub fn eval_offset(&self, offset: &T) -> Matrix<T> {
        let (r, c) = (self.dim_rows(), self.dim_cols());
        let mut acc = Matrix::zeros(r, c);
        for e in self.min_order..=self.trunc {
            let p = power(offset, e);
            acc = &acc + &self.coeff(e).scale(&p);
        }
        acc
    }
}

fn power<T: Scalar>(x: &T, e: i64) -> T {
    let mut out = T::one();
    for _ in 0..e.unsigned_abs() {
        out = out * x.clone();
    }
    if e < 0 {
        out = T::one() / out;
    }
    out
}

/// Local expansion of A(z) (without the rho factor) at the k-th pole:
/// coefficient -1 is P_k and coefficient r >= 0 is
/// (-1)^r sum_{j != k} P_j / (z_k - z_j)^{r+1}.
pub fn local_coefficients(
    system: &KzSystem,
    k: usize,
    trunc: i64,
) -> Result<MatLaurent<Rational>, KzError> {
    system.check_index(k)?;
    assert!(trunc >= -1, "truncation order must be at least -1");
    let n = system.dim();
    let zk = &system.poles()[k - 1];
    let mut coeffs = vec![system.residues()[k - 1].clone()];
    for r in 0..=trunc {
        let mut acc = RatMatrix::zeros(n, n);
        for (j, zj) in system.poles().iter().enumerate() {
            if j == k - 1 {
                continue;
            }
            let d = zk - zj;
            let denom = power(&d, r + 1);
            acc = &acc + &system.residues()[j].scale(&denom.recip());
        }
        if r % 2 == 1 {
            acc = -&acc;
        }
        coeffs.push(acc);
    }
    let mut s = MatLaurent::new(Center::Finite(zk.clone()), -1, coeffs);
    s.truncate(trunc);
    Ok(s)
}

/// Expansion of A(z) at infinity as a series in u = 1/z:
/// A = T u + (sum_k P_k z_k) u^2 + ... through order `trunc`.
pub fn infinity_expansion(system: &KzSystem, trunc: i64) -> MatLaurent<Rational> {
    let n = system.dim();
    let mut coeffs = Vec::new();
    for i in 0..trunc {
        // coefficient of u^{i+1} is sum_k P_k z_k^i
        let mut acc = RatMatrix::zeros(n, n);
        for (zk, pk) in system.poles().iter().zip(system.residues()) {
            acc = &acc + &pk.scale(&power(zk, i));
        }
        coeffs.push(acc);
    }
    MatLaurent::new(Center::AtInfinity, 1, coeffs)
}

/// T = sum of all residues, plus an exact check (expansion in u = 1/z to
/// order 2) that z A(z) tends to T.
pub fn infinity_form(system: &KzSystem) -> (RatMatrix, bool) {
    let t = system.t_matrix();
    let exp = infinity_expansion(system, 2);
    let tail_order_ok = match exp.min_order() {
        Some(m) => m >= 1 && exp.coeff(1) == t,
        None => t.is_zero(),
    };
    (t, tail_order_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kzsystem::KzSystem;
    use crate::symrep::natural_kz_system;
    use crate::{rat, ratio};

    fn transposition2() -> RatMatrix {
        RatMatrix::new(2, 2, vec![rat(0), rat(1), rat(1), rat(0)])
    }

    fn s3_system() -> KzSystem {
        natural_kz_system(3, vec![rat(0), rat(1)], 1).unwrap()
    }

    #[test]
    fn local_coefficients_single_pole() {
        let sys = KzSystem::new(vec![rat(0)], vec![transposition2()], 1).unwrap();
        let a = local_coefficients(&sys, 1, 3).unwrap();
        assert_eq!(a.coeff(-1), transposition2());
        for r in 0..=3 {
            assert!(a.coeff(r).is_zero());
        }
    }

    #[test]
    fn local_coefficients_s3() {
        let sys = s3_system();
        let p2 = sys.residues()[1].clone();
        let a = local_coefficients(&sys, 1, 1).unwrap();
        // P2/(z-1) = -P2 (1 + z + z^2 + ...) near z = 0
        assert_eq!(a.coeff(0), -&p2);
        assert_eq!(a.coeff(1), -&p2);
        assert!(matches!(
            local_coefficients(&sys, 9, 1),
            Err(KzError::BadPoleIndex { .. })
        ));
    }

    #[test]
    fn mul_involution() {
        let p = transposition2();
        let c = Center::Finite(rat(0));
        let f = MatLaurent::new(c.clone(), -1, vec![p.clone(), RatMatrix::zeros(2, 2), RatMatrix::zeros(2, 2)]);
        let g = MatLaurent::new(c, 1, vec![p.clone(), RatMatrix::zeros(2, 2), RatMatrix::zeros(2, 2)]);
        let prod = f.mul(&g).unwrap();
        assert_eq!(prod.coeff(0), RatMatrix::identity(2));
        assert_eq!(prod.min_order(), Some(0));
    }

    #[test]
    fn mul_identity_series() {
        let c = Center::Finite(rat(0));
        let id = MatLaurent::new(c.clone(), 0, vec![RatMatrix::identity(2), RatMatrix::zeros(2, 2)]);
        let g = MatLaurent::new(
            c,
            -1,
            vec![transposition2(), RatMatrix::identity(2), transposition2()],
        );
        let prod = id.mul(&g).unwrap();
        for e in -1..=0 {
            assert_eq!(prod.coeff(e), g.coeff(e));
        }
    }

    #[test]
    fn mul_projectors_vanish() {
        // P^- x^{-1} * P^+ x^{-1} = 0 for an involution
        let p = transposition2();
        let id = RatMatrix::identity(2);
        let plus = &id - &p;
        let minus = &id + &p;
        let c = Center::Finite(rat(0));
        let f = MatLaurent::new(c.clone(), -1, vec![minus, RatMatrix::zeros(2, 2)]);
        let g = MatLaurent::new(c, -1, vec![plus, RatMatrix::zeros(2, 2)]);
        let prod = f.mul(&g).unwrap();
        assert!(prod.is_zero());
    }

    #[test]
    fn mul_center_mismatch() {
        let f = MatLaurent::new(Center::Finite(rat(0)), 0, vec![RatMatrix::identity(2)]);
        let g = MatLaurent::new(Center::Finite(rat(1)), 0, vec![RatMatrix::identity(2)]);
        assert_eq!(f.mul(&g), Err(SeriesError::CenterMismatch));
    }

    #[test]
    fn infinity_form_values() {
        let sys1 = KzSystem::new(vec![rat(0)], vec![transposition2()], 1).unwrap();
        let (t1, ok1) = infinity_form(&sys1);
        assert_eq!(t1, transposition2());
        assert!(ok1);

        let (t3, ok3) = infinity_form(&s3_system());
        assert!(ok3);
        let expected = RatMatrix::new(
            3,
            3,
            [0, 1, 1, 1, 1, 0, 1, 0, 1].iter().map(|&v| rat(v)).collect(),
        );
        assert_eq!(t3, expected);

        // n=4: diagonal (0,2,2,2), first row/col off-diagonals 1
        let sys4 = natural_kz_system(4, vec![rat(0), rat(1), rat(2)], 1).unwrap();
        let (t4, ok4) = infinity_form(&sys4);
        assert!(ok4);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j {
                    if i == 0 { rat(0) } else { rat(2) }
                } else if i == 0 || j == 0 {
                    rat(1)
                } else {
                    rat(0)
                };
                assert_eq!(t4[(i, j)], expect, "T4 mismatch at ({i},{j})");
            }
        }
    }

    #[test]
    fn evaluation_consistency() {
        // Direct evaluation of A(zeta) equals the truncated local series at
        // z_k plus the exact geometric remainders of the other poles, so the
        // difference carries the factor offset^{trunc+1} exactly.
        let sys = s3_system();
        let trunc = 6i64;
        for k in 1..=2usize {
            let series = local_coefficients(&sys, k, trunc).unwrap();
            let zk = sys.poles()[k - 1].clone();
            for num in [1i64, -1, 3] {
                let offset = ratio(num, 17);
                let zeta = &zk + &offset;
                let direct = sys.eval_a(&zeta).unwrap();
                let via_series = series.eval_offset(&offset);
                let diff = &direct - &via_series;

                // remainder of 1/(zeta - z_j) after trunc+1 geometric terms:
                // (-1)^{trunc+1} offset^{trunc+1} / ((z_k - z_j)^{trunc+1} (zeta - z_j))
                let mut tail = RatMatrix::zeros(3, 3);
                for (j, zj) in sys.poles().iter().enumerate() {
                    if j == k - 1 {
                        continue;
                    }
                    let d = &zk - zj;
                    let mut r = power(&offset, trunc + 1)
                        / (power(&d, trunc + 1) * (&zeta - zj));
                    if (trunc + 1) % 2 == 1 {
                        r = -r;
                    }
                    tail = &tail + &sys.residues()[j].scale(&r);
                }
                assert_eq!(diff, tail);
            }
        }
    }

    #[test]
    fn mul_associative_distributive() {
        let c = Center::Finite(rat(0));
        let p = transposition2();
        let id = RatMatrix::identity(2);
        let f = MatLaurent::new(c.clone(), -1, vec![p.clone(), id.clone(), p.clone(), id.clone()]);
        let g = MatLaurent::new(c.clone(), 0, vec![id.clone(), p.clone(), id.clone(), p.clone()]);
        let h = MatLaurent::new(c, 1, vec![p.clone(), p.clone(), id.clone(), id.clone()]);
        let lhs = f.mul(&g).unwrap().mul(&h).unwrap();
        let rhs = f.mul(&g.mul(&h).unwrap()).unwrap();
        let t = lhs.truncation_order().min(rhs.truncation_order());
        for e in lhs.min_order().unwrap().min(rhs.min_order().unwrap())..=t {
            assert_eq!(lhs.coeff(e), rhs.coeff(e));
        }
        let sum = g.add(&h).unwrap();
        let lhs2 = f.mul(&sum).unwrap();
        let rhs2 = f.mul(&g).unwrap().add(&f.mul(&h).unwrap()).unwrap();
        let t2 = lhs2.truncation_order().min(rhs2.truncation_order());
        for e in -1..=t2 {
            assert_eq!(lhs2.coeff(e), rhs2.coeff(e));
        }
    }

    #[test]
    fn residues_sum_to_t() {
        // sum of residues over finite poles equals T (negative residue at infinity)
        let sys = s3_system();
        let (t, _) = infinity_form(&sys);
        let mut sum = RatMatrix::zeros(3, 3);
        for k in 1..=2usize {
            sum = &sum + &local_coefficients(&sys, k, -1).unwrap().coeff(-1);
        }
        assert_eq!(sum, t);
    }
}
