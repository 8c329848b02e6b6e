//! Exact dense linear algebra over an arbitrary exact field.
//!
//! Provides the [`Matrix`] type together with solving, nullspaces,
//! determinants, characteristic polynomials and integer-spectrum
//! extraction. All routines are pure and deterministic; nothing here
//! ever rounds.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, NumAssign, One, Signed, Zero};
use thiserror::Error;

/// Bound for the scalar type of the generic layer: an exact field with
/// the usual ring operations. `BigRational` is the instantiation used by
/// the rest of the crate.
pub trait Scalar: Num + NumAssign + Neg<Output = Self> + Clone + PartialEq + fmt::Debug {}

impl<T> Scalar for T where T: Num + NumAssign + Neg<Output = T> + Clone + PartialEq + fmt::Debug {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
}

/// Dense row-major matrix over an exact scalar.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{:?} ", self[(r, c)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.clone() * s.clone()).collect(),
        }
    }

    pub fn trace(&self) -> T {
        assert!(self.is_square());
        let mut t = T::zero();
        for i in 0..self.rows {
            t += self[(i, i)].clone();
        }
        t
    }

    /// Extracts column `c` as an n x 1 matrix.
    pub fn column(&self, c: usize) -> Self {
        Matrix::from_fn(self.rows, 1, |r, _| self[(r, c)].clone())
    }

    /// Builds a matrix whose columns are the given n x 1 column matrices.
    pub fn from_columns(columns: &[Matrix<T>]) -> Self {
        assert!(!columns.is_empty());
        let rows = columns[0].rows;
        Matrix::from_fn(rows, columns.len(), |r, c| columns[c][(r, 0)].clone())
    }

    /// Glues `other` to the right of `self`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Matrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        })
    }

    fn checked_mul(&self, rhs: &Self) -> Result<Self, LinAlgError> {
        if self.cols != rhs.rows {
            return Err(LinAlgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let prod = a.clone() * rhs[(k, c)].clone();
                    out[(r, c)] += prod;
                }
            }
        }
        Ok(out)
    }

    /// Row-reduces a copy to reduced row echelon form.
    /// Returns (rref, pivot column per pivot row).
    fn rref(&self) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row >= a.rows {
                break;
            }
            let mut sel = None;
            for r in row..a.rows {
                if !a[(r, col)].is_zero() {
                    sel = Some(r);
                    break;
                }
            }
            let Some(sel) = sel else { continue };
            if sel != row {
                for c in 0..a.cols {
                    let tmp = a[(sel, c)].clone();
                    a[(sel, c)] = a[(row, c)].clone();
                    a[(row, c)] = tmp;
                }
            }
            let inv = T::one() / a[(row, col)].clone();
            for c in col..a.cols {
                let v = a[(row, c)].clone() * inv.clone();
                a[(row, c)] = v;
            }
            for r in 0..a.rows {
                if r != row && !a[(r, col)].is_zero() {
                    let factor = a[(r, col)].clone();
                    for c in col..a.cols {
                        let v = a[(r, c)].clone() - factor.clone() * a[(row, c)].clone();
                        a[(r, c)] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Exact determinant by fraction elimination; zero for the 0x0 matrix is 1
    /// by the empty-product convention.
    pub fn det(&self) -> Result<T, LinAlgError> {
        if !self.is_square() {
            return Err(LinAlgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let mut sel = None;
            for r in col..n {
                if !a[(r, col)].is_zero() {
                    sel = Some(r);
                    break;
                }
            }
            let Some(sel) = sel else { return Ok(T::zero()) };
            if sel != col {
                det = -det;
                for c in 0..n {
                    let tmp = a[(sel, c)].clone();
                    a[(sel, c)] = a[(col, c)].clone();
                    a[(col, c)] = tmp;
                }
            }
            let pivot = a[(col, col)].clone();
            det = det * pivot.clone();
            let inv = T::one() / pivot;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone() * inv.clone();
                for c in col..n {
                    let v = a[(r, c)].clone() - factor.clone() * a[(col, c)].clone();
                    a[(r, c)] = v;
                }
            }
        }
        Ok(det)
    }

    /// Exact inverse; `None` when singular.
    pub fn inverse(&self) -> Result<Option<Self>, LinAlgError> {
        if !self.is_square() {
            return Err(LinAlgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let sol = solve_linear(self, &Matrix::identity(self.rows))?;
        Ok(sol.and_then(|s| {
            if s.kernel_basis.is_empty() {
                Some(s.particular)
            } else {
                None
            }
        }))
    }

    /// Coefficients of the monic characteristic polynomial det(xI - A),
    /// lowest degree first, via the Faddeev-LeVerrier recursion.
    pub fn charpoly(&self) -> Result<Vec<T>, LinAlgError> {
        if !self.is_square() {
            return Err(LinAlgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = T::one();
        let mut m = Matrix::<T>::identity(n);
        for k in 1..=n {
            m = self.checked_mul(&m).unwrap();
            // c_{n-k} = -tr(M_k)/k
            let mut kk = T::zero();
            for _ in 0..k {
                kk += T::one();
            }
            let c = -(m.trace() / kk);
            coeffs[n - k] = c.clone();
            for i in 0..n {
                m[(i, i)] += c.clone();
            }
        }
        Ok(coeffs)
    }
}

impl<T: Scalar> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.checked_mul(rhs).expect("matrix dimension mismatch")
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x.clone()).collect(),
        }
    }
}

/// One solution of A X = B plus a basis of ker A.
#[derive(Debug, Clone)]
pub struct LinearSolution<T: Scalar> {
    /// A deterministic particular solution (free variables set to zero).
    pub particular: Matrix<T>,
    /// Column vectors (c x 1) spanning the nullspace of A.
    pub kernel_basis: Vec<Matrix<T>>,
}

/// Solves A X = B exactly. Returns `Ok(None)` when the system is
/// inconsistent. The particular solution is the one with all free
/// variables zero, so it is deterministic for fixed input.
pub fn solve_linear<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
) -> Result<Option<LinearSolution<T>>, LinAlgError> {
    if a.rows() != b.rows() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    let aug = a.hstack(b);
    let (r, pivots) = aug.rref();
    // A pivot in the B block means an inconsistent row.
    if pivots.iter().any(|&p| p >= a.cols()) {
        return Ok(None);
    }
    let mut particular = Matrix::zeros(a.cols(), b.cols());
    for (row, &pc) in pivots.iter().enumerate() {
        for bc in 0..b.cols() {
            particular[(pc, bc)] = r[(row, a.cols() + bc)].clone();
        }
    }
    let kernel_basis = nullspace_from_rref(&r, a.cols(), &pivots);
    Ok(Some(LinearSolution {
        particular,
        kernel_basis,
    }))
}

/// Basis of {x : A x = 0} as c x 1 columns. The count always equals
/// cols(A) - rank(A).
pub fn nullspace<T: Scalar>(a: &Matrix<T>) -> Vec<Matrix<T>> {
    let (r, pivots) = a.rref();
    nullspace_from_rref(&r, a.cols(), &pivots)
}

fn nullspace_from_rref<T: Scalar>(
    rref: &Matrix<T>,
    ncols: usize,
    pivots: &[usize],
) -> Vec<Matrix<T>> {
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = Matrix::zeros(ncols, 1);
        v[(free, 0)] = T::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[(pc, 0)] = -rref[(row, free)].clone();
        }
        basis.push(v);
    }
    basis
}

/// Projects `x` onto the span of the given columns under the standard
/// inner product: span * (G^T G)^{-1} G^T x with G the basis matrix.
pub fn project_onto_span<T: Scalar>(basis: &[Matrix<T>], x: &Matrix<T>) -> Matrix<T> {
    if basis.is_empty() {
        return Matrix::zeros(x.rows(), x.cols());
    }
    let g = Matrix::from_columns(basis);
    let gt = g.transpose();
    let gram = &gt * &g;
    let rhs = &gt * x;
    let coeffs = solve_linear(&gram, &rhs)
        .expect("shapes agree")
        .expect("Gram matrix of independent columns is invertible")
        .particular;
    &g * &coeffs
}

/// Integer part of the spectrum of a rational matrix, extracted exactly
/// from the characteristic polynomial by rational-root testing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerSpectrum {
    /// Sorted (root, multiplicity) pairs.
    pub integer_roots: Vec<(BigInt, usize)>,
    /// True iff the multiplicities sum to the matrix dimension.
    pub all_integer: bool,
    /// Monic characteristic polynomial, lowest degree first.
    pub characteristic_polynomial: Vec<BigRational>,
}

impl IntegerSpectrum {
    pub fn min_root(&self) -> Option<&BigInt> {
        self.integer_roots.first().map(|(r, _)| r)
    }

    pub fn max_root(&self) -> Option<&BigInt> {
        self.integer_roots.last().map(|(r, _)| r)
    }

    pub fn multiplicity_of(&self, v: i64) -> usize {
        let v = BigInt::from(v);
        self.integer_roots
            .iter()
            .find(|(r, _)| *r == v)
            .map(|(_, m)| *m)
            .unwrap_or(0)
    }
}

/// Computes the integer eigenvalues (with multiplicity) of a square
/// rational matrix. Non-integer eigenvalues are never approximated.
pub fn integer_spectrum(a: &Matrix<BigRational>) -> Result<IntegerSpectrum, LinAlgError> {
    let charpoly = a.charpoly()?;
    let n = a.rows();
    let mut work = charpoly.clone();
    let mut roots: Vec<(BigInt, usize)> = Vec::new();

    // Roots at zero: deflate trailing zero coefficients.
    let mut zero_mult = 0;
    while work.len() > 1 && work[0].is_zero() {
        work.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((BigInt::zero(), zero_mult));
    }

    for cand in integer_root_candidates(&work) {
        let mut mult = 0;
        while work.len() > 1 && eval_poly(&work, &cand).is_zero() {
            work = deflate(&work, &cand);
            mult += 1;
        }
        if mult > 0 {
            roots.push((cand, mult));
        }
    }

    roots.sort_by(|a, b| a.0.cmp(&b.0));
    let total: usize = roots.iter().map(|(_, m)| m).sum();
    Ok(IntegerSpectrum {
        integer_roots: roots,
        all_integer: total == n,
        characteristic_polynomial: charpoly,
    })
}

fn eval_poly(p: &[BigRational], x: &BigInt) -> BigRational {
    let x = BigRational::from_integer(x.clone());
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x.clone() + c.clone();
    }
    acc
}

/// Synthetic division of a polynomial by (x - r); the division is exact
/// by construction (callers only deflate at verified roots).
fn deflate(p: &[BigRational], r: &BigInt) -> Vec<BigRational> {
    let r = BigRational::from_integer(r.clone());
    let mut out = vec![BigRational::zero(); p.len() - 1];
    let mut carry = BigRational::zero();
    for i in (0..p.len() - 1).rev() {
        carry = p[i + 1].clone() + carry * r.clone();
        out[i] = carry.clone();
    }
    out
}

/// Nonzero integer root candidates: divisors of the constant term of the
/// denominator-cleared polynomial, clipped to the Cauchy root bound.
fn integer_root_candidates(p: &[BigRational]) -> Vec<BigInt> {
    if p.len() < 2 || p[0].is_zero() {
        return Vec::new();
    }
    let mut lcm = BigInt::one();
    for c in p {
        lcm = lcm.lcm(c.denom());
    }
    let ints: Vec<BigInt> = p.iter().map(|c| (c.clone() * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let lead = ints.last().unwrap().abs();
    let c0 = ints[0].abs();

    // Cauchy bound: every root has |r| <= 1 + max |a_i| / |a_n|.
    let maxabs = ints.iter().map(|c| c.abs()).max().unwrap();
    let bound = BigInt::one() + maxabs / lead;

    let mut out = Vec::new();
    let mut k = BigInt::one();
    while k <= bound {
        if c0.is_multiple_of(&k) {
            out.push(k.clone());
            out.push(-k.clone());
        }
        k += 1;
    }
    out
}
