//! Exact-arithmetic toolkit for Knizhnik-Zamolodchikov-type Fuchsian systems
//! dW/dz = rho * A(z) W with A(z) = sum_k P_k / (z - z_k).
//!
//! Everything is computed over the rationals with arbitrary precision; there
//! is no floating point anywhere. The crate checks the sufficient conditions
//! for rational solvability, runs the local Frobenius recursions at every
//! finite pole, constructs global rational fundamental solutions together
//! with their adjoints, and re-verifies all of it symbolically.
//!
//! The linear-algebra and series layers are generic over the scalar type
//! (any exact field implementing the [`exactalg::Scalar`] bound); the
//! concrete instantiation used throughout is [`Rational`].

pub mod exactalg;
pub mod frobenius;
pub mod kzsystem;
pub mod ratfunc;
pub mod series;
pub mod symrep;

/// The scalar field of the whole crate: exact arbitrary-precision fractions,
/// always stored reduced with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Dense matrix over [`Rational`].
pub type RatMatrix = exactalg::Matrix<Rational>;

/// Truncated matrix Laurent series over [`Rational`].
pub type RatMatLaurent = series::MatLaurent<Rational>;

pub use exactalg::{IntegerSpectrum, LinAlgError, LinearSolution, Matrix};
pub use frobenius::{LocalSolution, SeedSet, Side};
pub use kzsystem::{ConditionReport, DegreeBounds, KzError, KzSystem};
pub use ratfunc::{RatMatFunc, SolveOutcome, SolveStatus, VerificationRecord};
pub use series::{Center, MatLaurent};

use num_bigint::BigInt;

/// Convenience constructor for small rational constants.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Convenience constructor for a fraction n/d.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
