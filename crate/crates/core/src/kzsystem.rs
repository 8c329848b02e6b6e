//! The KZ system model dW/dz = rho A(z) W, the hypothesis checker for the
//! four sufficient conditions, projectors, the beta_k scalars and the
//! degree bounds derived from the integer spectrum of the infinity residue.

use num_traits::Zero;
use thiserror::Error;

use crate::exactalg::{self, IntegerSpectrum, LinAlgError};
use crate::{RatMatrix, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KzError {
    #[error("rho must be a nonzero integer")]
    ZeroRho,
    #[error("poles must be pairwise distinct")]
    DuplicatePoles,
    #[error("expected {expected} poles, got {got}")]
    PoleCountMismatch { expected: usize, got: usize },
    #[error("pole index {k} out of range 1..={s}")]
    BadPoleIndex { k: usize, s: usize },
    #[error("residue {k} is not {n}x{n}")]
    ResidueShape { k: usize, n: usize },
    #[error("at least one residue is required")]
    NoResidues,
    #[error("theorem hypotheses not satisfied")]
    ConditionsNotSatisfied,
    #[error("bad seed: {0}")]
    BadSeed(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error("evaluation at a pole")]
    EvaluationAtPole,
    #[error("no integer eigenvalues")]
    NoIntegerEigenvalues,
    #[error("adjoint solution not found: {0}")]
    AdjointNotFound(String),
    #[error("bad indices: {0}")]
    BadIndices(String),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// A Fuchsian system dW/dz = rho A(z) W with A(z) = sum_k P_k / (z - z_k).
#[derive(Debug, Clone, PartialEq)]
pub struct KzSystem {
    n: usize,
    poles: Vec<Rational>,
    residues: Vec<RatMatrix>,
    rho: i64,
}

impl KzSystem {
    pub fn new(poles: Vec<Rational>, residues: Vec<RatMatrix>, rho: i64) -> Result<Self, KzError> {
        if rho == 0 {
            return Err(KzError::ZeroRho);
        }
        if residues.is_empty() {
            return Err(KzError::NoResidues);
        }
        if poles.len() != residues.len() {
            return Err(KzError::PoleCountMismatch {
                expected: residues.len(),
                got: poles.len(),
            });
        }
        for i in 0..poles.len() {
            for j in i + 1..poles.len() {
                if poles[i] == poles[j] {
                    return Err(KzError::DuplicatePoles);
                }
            }
        }
        let n = residues[0].rows();
        for (k, p) in residues.iter().enumerate() {
            if p.rows() != n || p.cols() != n {
                return Err(KzError::ResidueShape { k: k + 1, n });
            }
        }
        Ok(KzSystem {
            n,
            poles,
            residues,
            rho,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of finite poles s.
    pub fn pole_count(&self) -> usize {
        self.poles.len()
    }

    pub fn poles(&self) -> &[Rational] {
        &self.poles
    }

    pub fn residues(&self) -> &[RatMatrix] {
        &self.residues
    }

    pub fn rho(&self) -> i64 {
        self.rho
    }

    /// 1-based pole accessor.
    pub fn pole(&self, k: usize) -> Result<&Rational, KzError> {
        self.check_index(k)?;
        Ok(&self.poles[k - 1])
    }

    /// 1-based residue accessor.
    pub fn residue(&self, k: usize) -> Result<&RatMatrix, KzError> {
        self.check_index(k)?;
        Ok(&self.residues[k - 1])
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<(), KzError> {
        if k == 0 || k > self.poles.len() {
            return Err(KzError::BadPoleIndex {
                k,
                s: self.poles.len(),
            });
        }
        Ok(())
    }

    pub fn rho_rational(&self) -> Rational {
        crate::rat(self.rho)
    }

    /// The effective residue rho * P_k governing local exponents at z_k.
    pub fn effective_residue(&self, k: usize) -> Result<RatMatrix, KzError> {
        Ok(self.residue(k)?.scale(&self.rho_rational()))
    }

    /// T = sum of all residues; the negative of the residue at infinity.
    pub fn t_matrix(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.n, self.n);
        for p in &self.residues {
            t = &t + p;
        }
        t
    }

    /// Exact evaluation of A(z) at a non-pole point.
    pub fn eval_a(&self, z: &Rational) -> Result<RatMatrix, KzError> {
        let mut out = RatMatrix::zeros(self.n, self.n);
        for (zk, pk) in self.poles.iter().zip(&self.residues) {
            let d = z - zk;
            if d.is_zero() {
                return Err(KzError::EvaluationAtPole);
            }
            out = &out + &pk.scale(&d.recip());
        }
        Ok(out)
    }
}

/// P^+ = I - P and P^- = I + P.
pub fn projectors(p: &RatMatrix) -> Result<(RatMatrix, RatMatrix), LinAlgError> {
    if !p.is_square() {
        return Err(LinAlgError::NonSquare {
            rows: p.rows(),
            cols: p.cols(),
        });
    }
    let id = RatMatrix::identity(p.rows());
    Ok((&id - p, &id + p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondStatus {
    Pass,
    Fail,
    /// The condition quantifies over index tuples that do not exist at
    /// this pole count and so holds vacuously.
    Vacuous,
}

/// One checked condition with a concrete witness on failure
/// (1-based residue indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondOutcome {
    pub status: CondStatus,
    pub witness: Option<Vec<usize>>,
}

impl CondOutcome {
    fn pass() -> Self {
        CondOutcome {
            status: CondStatus::Pass,
            witness: None,
        }
    }
    fn vacuous() -> Self {
        CondOutcome {
            status: CondStatus::Vacuous,
            witness: None,
        }
    }
    fn fail(witness: Vec<usize>) -> Self {
        CondOutcome {
            status: CondStatus::Fail,
            witness: Some(witness),
        }
    }
    pub fn holds(&self) -> bool {
        self.status != CondStatus::Fail
    }
}

/// Outcome of the four sufficient conditions for rational solvability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    /// P_k^2 = I for every k.
    pub cond1_involution: CondOutcome,
    /// [P_j P_k P_l + P_l P_k P_j] P_k^+ = 0 over distinct ordered triples.
    pub cond2_triple: CondOutcome,
    /// (P_j P_k P_j + P_j) P_k^+ = P_k^+ over ordered pairs j != k.
    pub cond3_pair: CondOutcome,
    /// Every P_j symmetric.
    pub cond4_symmetry: CondOutcome,
    pub all_pass: bool,
}

/// Checks the four conditions. Conditions whose index tuples are
/// unavailable at the given pole count are reported vacuous and count
/// as passing. Mathematical failure is reported, never thrown.
pub fn check_conditions(system: &KzSystem) -> ConditionReport {
    let s = system.pole_count();
    let n = system.dim();
    let id = RatMatrix::identity(n);
    let res = system.residues();

    let mut cond1 = CondOutcome::pass();
    for k in 0..s {
        if &(&res[k] * &res[k]) != &id {
            cond1 = CondOutcome::fail(vec![k + 1]);
            break;
        }
    }

    let mut cond4 = CondOutcome::pass();
    for k in 0..s {
        if res[k].transpose() != res[k] {
            cond4 = CondOutcome::fail(vec![k + 1]);
            break;
        }
    }

    let plus: Vec<RatMatrix> = res.iter().map(|p| &id - p).collect();

    let cond2 = if s < 3 {
        CondOutcome::vacuous()
    } else {
        let mut out = CondOutcome::pass();
        'outer2: for j in 0..s {
            for k in 0..s {
                for l in 0..s {
                    if j == k || j == l || k == l {
                        continue;
                    }
                    let lhs = &(&(&res[j] * &res[k]) * &res[l]) + &(&(&res[l] * &res[k]) * &res[j]);
                    if !(&lhs * &plus[k]).is_zero() {
                        out = CondOutcome::fail(vec![j + 1, k + 1, l + 1]);
                        break 'outer2;
                    }
                }
            }
        }
        out
    };

    let cond3 = if s < 2 {
        CondOutcome::vacuous()
    } else {
        let mut out = CondOutcome::pass();
        'outer3: for j in 0..s {
            for k in 0..s {
                if j == k {
                    continue;
                }
                let lhs = &(&(&res[j] * &res[k]) * &res[j]) + &res[j];
                if &lhs * &plus[k] != plus[k] {
                    out = CondOutcome::fail(vec![j + 1, k + 1]);
                    break 'outer3;
                }
            }
        }
        out
    };

    let all_pass = cond1.holds() && cond2.holds() && cond3.holds() && cond4.holds();
    ConditionReport {
        cond1_involution: cond1,
        cond2_triple: cond2,
        cond3_pair: cond3,
        cond4_symmetry: cond4,
        all_pass,
    }
}

/// beta_k = sum over j != k of 1/(z_k - z_j)^2; zero for a single pole.
pub fn beta(system: &KzSystem, k: usize) -> Result<Rational, KzError> {
    system.check_index(k)?;
    let zk = &system.poles()[k - 1];
    let mut acc = Rational::zero();
    for (j, zj) in system.poles().iter().enumerate() {
        if j == k - 1 {
            continue;
        }
        let d = zk - zj;
        acc += (&d * &d).recip();
    }
    Ok(acc)
}

/// Degree bounds for the polynomial parts of W and Y from the integer
/// spectrum of the effective infinity residue rho * T.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeBounds {
    pub t: RatMatrix,
    /// Integer spectrum of rho * T.
    pub spectrum: IntegerSpectrum,
    pub all_integer: bool,
    /// Least integer eigenvalue of rho*T (None when the spectrum has no
    /// integer part).
    pub m_t: Option<i64>,
    /// Greatest integer eigenvalue of rho*T.
    pub big_m_t: Option<i64>,
    /// deg Q1 = M_T when M_T >= 0; None means Q1 = 0 (or unknown when
    /// all_integer is false).
    pub deg_q1: Option<i64>,
    /// deg Q2 = -m_T when m_T <= 0; None means Q2 = 0 (or unknown).
    pub deg_q2: Option<i64>,
}

pub fn degree_bounds(system: &KzSystem) -> Result<DegreeBounds, KzError> {
    let t = system.t_matrix();
    let eff = t.scale(&system.rho_rational());
    let spectrum = exactalg::integer_spectrum(&eff)?;
    let all_integer = spectrum.all_integer;

    let to_i64 = |b: &num_bigint::BigInt| -> i64 {
        use num_traits::ToPrimitive;
        b.to_i64().expect("integer eigenvalue fits in i64")
    };
    let m_t = spectrum.min_root().map(to_i64);
    let big_m_t = spectrum.max_root().map(to_i64);

    let (deg_q1, deg_q2) = if all_integer {
        let m = m_t.unwrap();
        let big_m = big_m_t.unwrap();
        (
            if big_m >= 0 { Some(big_m) } else { None },
            if m <= 0 { Some(-m) } else { None },
        )
    } else {
        (None, None)
    };

    Ok(DegreeBounds {
        t,
        spectrum,
        all_integer,
        m_t,
        big_m_t,
        deg_q1,
        deg_q2,
    })
}
