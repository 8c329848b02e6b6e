//! On-disk document formats. Every rational travels as an exact "p/q"
//! string (plain "p" for integers); floats never appear.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use kzrat::{KzSystem, RatMatFunc, RatMatrix, Rational};

pub fn format_rat(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|_| format!("bad rational {s:?}"))?;
    let d = BigInt::from_str(den).map_err(|_| format!("bad rational {s:?}"))?;
    if d.is_zero() {
        return Err(format!("bad rational {s:?}: zero denominator"));
    }
    Ok(Rational::new(n, d))
}

pub fn matrix_to_rows(m: &RatMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| format_rat(&m[(i, j)])).collect())
        .collect()
}

pub fn matrix_from_rows(
    rows: &[Vec<String>],
    what: &str,
) -> Result<RatMatrix, String> {
    if rows.is_empty() {
        return Err(format!("{what}: empty matrix"));
    }
    let cols = rows[0].len();
    let mut entries = Vec::with_capacity(rows.len() * cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(format!("{what}: row {i} has {} entries, expected {cols}", row.len()));
        }
        for (j, cell) in row.iter().enumerate() {
            entries.push(parse_rat(cell).map_err(|e| format!("{what}[{i}][{j}]: {e}"))?);
        }
    }
    Ok(RatMatrix::new(rows.len(), cols, entries))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct Metadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// Serialized system: dW/dz = rho * sum_k P_k/(z - z_k) * W.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SystemDocument {
    pub n: usize,
    pub rho: i64,
    pub poles: Vec<String>,
    pub residues: Vec<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl SystemDocument {
    pub fn from_system(system: &KzSystem, metadata: Option<Metadata>) -> Self {
        SystemDocument {
            n: system.dim(),
            rho: system.rho(),
            poles: system.poles().iter().map(format_rat).collect(),
            residues: system.residues().iter().map(matrix_to_rows).collect(),
            metadata,
        }
    }

    pub fn to_system(&self) -> Result<KzSystem, String> {
        let poles = self
            .poles
            .iter()
            .enumerate()
            .map(|(k, p)| parse_rat(p).map_err(|e| format!("poles[{k}]: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        let residues = self
            .residues
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let m = matrix_from_rows(r, &format!("residues[{k}]"))?;
                if m.rows() != self.n || m.cols() != self.n {
                    return Err(format!(
                        "residues[{k}]: {}x{} does not match n={}",
                        m.rows(),
                        m.cols(),
                        self.n
                    ));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>, _>>()?;
        KzSystem::new(poles, residues, self.rho).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SolutionPolePart {
    pub pole: String,
    /// coefficients[p-1] multiplies (z - pole)^{-p}
    pub coefficients: Vec<Vec<Vec<String>>>,
}

/// Serialized rational matrix function: pole parts plus polynomial
/// coefficients in ascending order.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SolutionDocument {
    pub rows: usize,
    pub cols: usize,
    /// "fundamental" for W, "adjoint" for Y
    pub role: String,
    pub pole_parts: Vec<SolutionPolePart>,
    pub polynomial: Vec<Vec<Vec<String>>>,
}

impl SolutionDocument {
    pub fn from_func(f: &RatMatFunc, role: &str) -> Self {
        let pole_parts = f
            .pole_orders()
            .into_iter()
            .map(|(pole, order)| SolutionPolePart {
                pole: format_rat(&pole),
                coefficients: (1..=order)
                    .map(|p| matrix_to_rows(&f.pole_coeff(&pole, p)))
                    .collect(),
            })
            .collect();
        let polynomial = match f.poly_degree() {
            None => Vec::new(),
            Some(d) => (0..=d as usize)
                .map(|j| matrix_to_rows(&f.poly_coeff(j)))
                .collect(),
        };
        SolutionDocument {
            rows: f.rows(),
            cols: f.cols(),
            role: role.to_string(),
            pole_parts,
            polynomial,
        }
    }

    pub fn to_func(&self) -> Result<RatMatFunc, String> {
        let mut f = RatMatFunc::zero(self.rows, self.cols);
        for part in &self.pole_parts {
            let pole = parse_rat(&part.pole)?;
            for (i, rows) in part.coefficients.iter().enumerate() {
                let m = matrix_from_rows(rows, &format!("pole {} order {}", part.pole, i + 1))?;
                if m.rows() != self.rows || m.cols() != self.cols {
                    return Err(format!(
                        "pole {} order {}: {}x{} does not match {}x{}",
                        part.pole,
                        i + 1,
                        m.rows(),
                        m.cols(),
                        self.rows,
                        self.cols
                    ));
                }
                f.add_pole_term(pole.clone(), i + 1, m);
            }
        }
        let mut poly = Vec::with_capacity(self.polynomial.len());
        for (j, rows) in self.polynomial.iter().enumerate() {
            let m = matrix_from_rows(rows, &format!("polynomial[{j}]"))?;
            if m.rows() != self.rows || m.cols() != self.cols {
                return Err(format!("polynomial[{j}]: wrong dimensions"));
            }
            poly.push(m);
        }
        Ok(f.add(&RatMatFunc::from_poly(poly, self.rows, self.cols)))
    }
}

// --- report documents -------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub name: String,
    /// "pass", "fail" or "vacuous"
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionsDoc {
    pub entries: Vec<ConditionEntry>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeBoundsDoc {
    /// (eigenvalue, multiplicity) pairs of the integer spectrum of rho*T
    pub integer_spectrum: Vec<(i64, usize)>,
    pub all_integer: bool,
    pub m_t: Option<i64>,
    pub big_m_t: Option<i64>,
    pub deg_q1: Option<i64>,
    pub deg_q2: Option<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedsDoc {
    pub branch: String,
    pub b: Vec<Vec<Vec<String>>>,
    pub c: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalDoc {
    pub k: usize,
    pub pole: String,
    pub beta: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_m: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product_invariant: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub residual_zero: bool,
    pub pointwise_residual_ok: bool,
    pub det_evidence: Vec<(String, String)>,
    pub det_nonzero: bool,
    pub nullity_at_points: Vec<usize>,
    pub poly_degree: Option<i64>,
    pub pole_orders: Vec<(String, usize)>,
    pub expected_deg_q1: Option<i64>,
    pub expected_deg_q2: Option<i64>,
    pub poly_degree_matches_bound: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveDoc {
    /// "found", "not-found" or "conditions-unknown"
    pub status: String,
    pub kernel_dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub max_pole_order: usize,
    pub max_poly_degree: Option<i64>,
    pub capped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly_degree: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjoint_poly_degree: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
}

/// One machine-readable document per command; contains every number the
/// human-readable rendering shows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_bounds: Option<DegreeBoundsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local: Option<Vec<LocalDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<CertificateDoc>,
    pub notes: Vec<String>,
}

impl ReportDocument {
    pub fn new(command: &str) -> Self {
        ReportDocument {
            command: command.to_string(),
            conditions: None,
            degree_bounds: None,
            betas: None,
            local: None,
            solve: None,
            verify: None,
            notes: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kzrat::{rat, ratio};

    #[test]
    fn rational_strings_round_trip() {
        for s in ["0", "7", "-3", "2/5", "-11/4", "123456789012345678901234567891/7"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        // normalization on parse
        assert_eq!(format_rat(&parse_rat("4/2").unwrap()), "2");
        assert_eq!(format_rat(&parse_rat("1/-2").unwrap()), "-1/2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("1.5").is_err());
    }

    #[test]
    fn system_document_round_trip() {
        let p = RatMatrix::new(2, 2, vec![rat(0), ratio(1, 3), ratio(-7, 2), rat(1)]);
        let sys = KzSystem::new(vec![ratio(-1, 3), rat(1000000007)], vec![p.clone(), p], 1)
            .unwrap();
        let doc = SystemDocument::from_system(&sys, None);
        let json = serde_json::to_string(&doc).unwrap();
        let back: SystemDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        let sys2 = back.to_system().unwrap();
        assert_eq!(sys2.poles(), sys.poles());
        assert_eq!(sys2.residues(), sys.residues());
        assert_eq!(sys2.rho(), sys.rho());
    }

    #[test]
    fn system_document_rejects_bad_input() {
        let doc = SystemDocument {
            n: 2,
            rho: 1,
            poles: vec!["0".into()],
            residues: vec![vec![vec!["1".into(), "0".into()], vec!["0".into()]]],
            metadata: None,
        };
        let err = doc.to_system().unwrap_err();
        assert!(err.contains("row 1"), "{err}");
    }

    #[test]
    fn solution_document_round_trip() {
        let mut f = RatMatFunc::zero(2, 2);
        f.add_pole_term(ratio(-5, 3), 2, RatMatrix::identity(2));
        f.add_pole_term(rat(4), 1, RatMatrix::new(2, 2, vec![rat(0), ratio(2, 7), rat(1), rat(0)]));
        let f = f.add(&RatMatFunc::from_poly(
            vec![RatMatrix::identity(2), RatMatrix::identity(2).scale(&ratio(-9, 11))],
            2,
            2,
        ));
        let doc = SolutionDocument::from_func(&f, "fundamental");
        let json = serde_json::to_string(&doc).unwrap();
        let back: SolutionDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_func().unwrap(), f);
    }
}
