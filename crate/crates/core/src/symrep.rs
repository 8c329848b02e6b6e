//! Natural representation of the symmetric group: transposition matrices,
//! the induced KZ systems with residues P(1,k+1), and the bordered
//! decomposition T = (n-2)I + T1.

use crate::exactalg::{self, IntegerSpectrum};
use crate::kzsystem::{KzError, KzSystem};
use crate::{rat, RatMatrix, Rational};

/// A transposition (i;j) inside S_n; indices are 1-based to match the
/// usual cycle notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranspositionSpec {
    pub n: usize,
    pub i: usize,
    pub j: usize,
}

impl TranspositionSpec {
    pub fn new(n: usize, i: usize, j: usize) -> Result<Self, KzError> {
        if i == 0 || j == 0 || i > n || j > n || i == j {
            return Err(KzError::BadIndices(format!(
                "transposition ({i};{j}) invalid for n={n}"
            )));
        }
        Ok(TranspositionSpec { n, i, j })
    }
}

/// Permutation matrix of the transposition: symmetric and involutive.
pub fn transposition_matrix(spec: TranspositionSpec) -> RatMatrix {
    let (i, j) = (spec.i - 1, spec.j - 1);
    RatMatrix::from_fn(spec.n, spec.n, |r, c| {
        let hit = (r == i && c == j)
            || (r == j && c == i)
            || (r == c && r != i && r != j);
        if hit {
            rat(1)
        } else {
            rat(0)
        }
    })
}

/// KZ system with residues P(1,2), ..., P(1,n) at the given n-1 poles.
pub fn natural_kz_system(
    n: usize,
    poles: Vec<Rational>,
    rho: i64,
) -> Result<KzSystem, KzError> {
    if n < 2 {
        return Err(KzError::BadIndices(format!("n={n} must be at least 2")));
    }
    if poles.len() != n - 1 {
        return Err(KzError::PoleCountMismatch {
            expected: n - 1,
            got: poles.len(),
        });
    }
    let residues: Vec<RatMatrix> = (1..n)
        .map(|k| transposition_matrix(TranspositionSpec::new(n, 1, k + 1).unwrap()))
        .collect();
    KzSystem::new(poles, residues, rho)
}

/// The bordered matrix T1 with corner 2-n and all-ones border, the shift
/// n-2 with T = (n-2)I + T1 (checked exactly), and the integer spectrum
/// of T.
pub fn t1_decomposition(n: usize) -> (RatMatrix, i64, IntegerSpectrum) {
    assert!(n >= 2);
    let t1 = RatMatrix::from_fn(n, n, |r, c| {
        if r == 0 && c == 0 {
            rat(2 - n as i64)
        } else if r == 0 || c == 0 {
            rat(1)
        } else {
            rat(0)
        }
    });
    let shift = n as i64 - 2;

    let mut t = RatMatrix::zeros(n, n);
    for k in 1..n {
        t = &t + &transposition_matrix(TranspositionSpec::new(n, 1, k + 1).unwrap());
    }
    let rebuilt = &RatMatrix::identity(n).scale(&rat(shift)) + &t1;
    assert_eq!(t, rebuilt, "sum of transpositions must equal (n-2)I + T1");

    let spectrum = exactalg::integer_spectrum(&t).expect("T is square");
    (t1, shift, spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kzsystem::check_conditions;
    use num_bigint::BigInt;

    #[test]
    fn transposition_literal_values() {
        let p12 = transposition_matrix(TranspositionSpec::new(3, 1, 2).unwrap());
        assert_eq!(
            p12,
            RatMatrix::new(3, 3, [0, 1, 0, 1, 0, 0, 0, 0, 1].iter().map(|&v| rat(v)).collect())
        );
        let p13 = transposition_matrix(TranspositionSpec::new(3, 1, 3).unwrap());
        assert_eq!(
            p13,
            RatMatrix::new(3, 3, [0, 0, 1, 0, 1, 0, 1, 0, 0].iter().map(|&v| rat(v)).collect())
        );
        let p = transposition_matrix(TranspositionSpec::new(2, 1, 2).unwrap());
        assert_eq!(p, RatMatrix::new(2, 2, vec![rat(0), rat(1), rat(1), rat(0)]));
    }

    #[test]
    fn transpositions_symmetric_involutive() {
        for n in 2..=8usize {
            for i in 1..=n {
                for j in 1..=n {
                    if i == j {
                        continue;
                    }
                    let p = transposition_matrix(TranspositionSpec::new(n, i, j).unwrap());
                    assert_eq!(p.transpose(), p);
                    assert_eq!(&p * &p, RatMatrix::identity(n));
                }
            }
        }
    }

    #[test]
    fn conjugation_law() {
        // P(i,j) P(j,k) P(i,j) = P(i,k) for distinct i,j,k
        for n in 3..=6usize {
            for i in 1..=n {
                for j in 1..=n {
                    for k in 1..=n {
                        if i == j || j == k || i == k {
                            continue;
                        }
                        let pij = transposition_matrix(TranspositionSpec::new(n, i, j).unwrap());
                        let pjk = transposition_matrix(TranspositionSpec::new(n, j, k).unwrap());
                        let pik = transposition_matrix(TranspositionSpec::new(n, i, k).unwrap());
                        assert_eq!(&(&pij * &pjk) * &pij, pik);
                    }
                }
            }
        }
    }

    #[test]
    fn natural_system_validation() {
        assert!(matches!(
            natural_kz_system(3, vec![rat(0)], 1),
            Err(KzError::PoleCountMismatch { .. })
        ));
        assert!(matches!(
            natural_kz_system(3, vec![rat(0), rat(0)], 1),
            Err(KzError::DuplicatePoles)
        ));
        let sys = natural_kz_system(2, vec![rat(0)], 1).unwrap();
        assert_eq!(sys.pole_count(), 1);
        assert_eq!(
            sys.residues()[0],
            RatMatrix::new(2, 2, vec![rat(0), rat(1), rat(1), rat(0)])
        );
    }

    #[test]
    fn natural_system_passes_conditions() {
        for n in 2..=6usize {
            let poles: Vec<Rational> = (0..n - 1).map(|i| rat(i as i64)).collect();
            let sys = natural_kz_system(n, poles, 1).unwrap();
            assert!(check_conditions(&sys).all_pass, "n={n}");
        }
    }

    #[test]
    fn t1_values_small() {
        let (t1, shift, spec) = t1_decomposition(3);
        assert_eq!(
            t1,
            RatMatrix::new(3, 3, [-1, 1, 1, 1, 0, 0, 1, 0, 0].iter().map(|&v| rat(v)).collect())
        );
        assert_eq!(shift, 1);
        assert_eq!(
            spec.integer_roots,
            vec![
                (BigInt::from(-1), 1),
                (BigInt::from(1), 1),
                (BigInt::from(2), 1)
            ]
        );

        let (t1_2, shift_2, spec_2) = t1_decomposition(2);
        assert_eq!(
            t1_2,
            RatMatrix::new(2, 2, vec![rat(0), rat(1), rat(1), rat(0)])
        );
        assert_eq!(shift_2, 0);
        assert_eq!(
            spec_2.integer_roots,
            vec![(BigInt::from(-1), 1), (BigInt::from(1), 1)]
        );
    }

    #[test]
    fn t_spectrum_profile() {
        // spectrum of T: n-1 simple, n-2 with multiplicity n-2, -1 simple
        for n in 2..=8usize {
            let (_, _, spec) = t1_decomposition(n);
            assert!(spec.all_integer, "n={n}");
            assert_eq!(spec.multiplicity_of(n as i64 - 1), 1, "n={n}");
            assert_eq!(spec.multiplicity_of(-1), 1, "n={n}");
            if n > 2 {
                assert_eq!(spec.multiplicity_of(n as i64 - 2), n - 2, "n={n}");
            }
        }
    }

    #[test]
    fn t_all_ones_eigenvector() {
        // the all-ones vector spans the trivial summand: T * 1 = (n-1) * 1
        for n in 2..=6usize {
            let poles: Vec<Rational> = (0..n - 1).map(|i| rat(i as i64)).collect();
            let sys = natural_kz_system(n, poles, 1).unwrap();
            let t = sys.t_matrix();
            let ones = RatMatrix::from_fn(n, 1, |_, _| rat(1));
            assert_eq!(&t * &ones, ones.scale(&rat(n as i64 - 1)));
        }
    }
}
