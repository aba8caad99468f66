//! Machine-readable JSON reports.
//!
//! Every exact quantity is rendered as a string, so reports are stable:
//! re-parsing and re-serializing a report is byte-identical.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::brieskorn::VerificationReport;
use crate::frobenius::FrobeniusData;
use crate::lg::LgKind;
use crate::milnor::MilnorRing;
use crate::spectrum::{PoincarePolynomial, Spectrum};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub system: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ring: Option<RingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frobenius: Option<FrobeniusReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlators: Option<CorrelatorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
}

impl Report {
    pub fn new(system: &str) -> Self {
        Report {
            system: system.to_string(),
            ring: None,
            frobenius: None,
            verification: None,
            correlators: None,
            comparison: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RingReport {
    pub kind: String,
    pub mu: usize,
    pub basis: Vec<String>,
    pub socle: String,
    pub residue_normalizer: String,
    pub gram: Vec<Vec<String>>,
    pub spectrum: SpectrumJson,
    pub poincare: PoincareJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumJson {
    pub exponents: Vec<String>,
    pub qs: Vec<String>,
    pub r: String,
    pub degrees: Vec<String>,
    pub c_hat: String,
    pub c_hat_formula: String,
    pub exponent_duality: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PoincareJson {
    pub powers: Vec<(String, usize)>,
    pub duality: bool,
    pub c_hat_formula_matches: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FrobeniusReport {
    pub coords: Vec<String>,
    pub coordinate_change: Vec<String>,
    pub eta: Vec<Vec<String>>,
    pub c_tensor: Vec<CEntry>,
    pub potential: String,
    pub euler: Vec<String>,
    pub n_matrix: Vec<Vec<String>>,
    pub discriminant: String,
    pub euler_discriminant_identity: bool,
    pub wdvv_zero: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationJson {
    pub conditions: Vec<ConditionJson>,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_induced: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_spectrum: Option<Vec<Vec<String>>>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConditionJson {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CorrelatorReport {
    pub caps: CapsJson,
    /// Nonzero correlators with up to three insertions; both pipelines
    /// agree row by row.
    pub b_side: Vec<CorrelatorRow>,
    pub a_side: Vec<CorrelatorRow>,
    pub one_point_tower: Vec<TowerRow>,
    pub axioms: AxiomLedger,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CapsJson {
    pub max_insertions: usize,
    pub max_level: u32,
    pub max_q: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CorrelatorRow {
    /// (descendant level, class index) pairs.
    pub insertions: Vec<(u32, usize)>,
    pub beta: u32,
    pub value: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TowerRow {
    pub level: u32,
    pub beta: u32,
    pub b_value: String,
    pub a_value: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AxiomLedger {
    pub string_checked: usize,
    pub string_ok: bool,
    pub dilaton_checked: usize,
    pub dilaton_ok: bool,
    pub divisor_checked: usize,
    pub divisor_ok: bool,
    pub pipelines_agree: bool,
    pub values_compared: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComparisonReport {
    pub caps: CapsJson,
    pub max_discrepancy: String,
    pub residual_monomials: usize,
    pub matched: bool,
}

pub fn rational_str(r: &BigRational) -> String {
    r.to_string()
}

pub fn ring_report(
    lg_kind: LgKind,
    ring: &MilnorRing,
    gram: &[Vec<crate::poly::LaurentPoly>],
    sp: &Spectrum,
    chi: &PoincarePolynomial,
) -> RingReport {
    RingReport {
        kind: match lg_kind {
            LgKind::Polynomial => "polynomial".into(),
            LgKind::Laurent => "laurent".into(),
        },
        mu: ring.mu,
        basis: ring.basis.iter().map(|b| b.to_string()).collect(),
        socle: ring.basis[ring.socle_index].to_string(),
        residue_normalizer: ring.residue_normalizer.to_string(),
        gram: gram
            .iter()
            .map(|row| row.iter().map(|p| p.to_string()).collect())
            .collect(),
        spectrum: SpectrumJson {
            exponents: sp.exponents.iter().map(rational_str).collect(),
            qs: sp.qs.iter().map(rational_str).collect(),
            r: rational_str(&sp.r),
            degrees: sp.degrees.iter().map(rational_str).collect(),
            c_hat: rational_str(&sp.c_hat),
            c_hat_formula: rational_str(&sp.c_hat_formula),
            exponent_duality: sp.exponent_duality,
        },
        poincare: PoincareJson {
            powers: chi
                .powers
                .iter()
                .map(|(p, m)| (rational_str(p), *m))
                .collect(),
            duality: chi.duality,
            c_hat_formula_matches: chi.c_hat_formula_matches,
        },
    }
}

pub fn frobenius_report(fd: &FrobeniusData) -> Result<FrobeniusReport, crate::PrimformError> {
    let mut c_entries = Vec::new();
    for i in 0..fd.mu {
        for j in i..fd.mu {
            for k in j..fd.mu {
                let v = &fd.c_tensor[i][j][k];
                if !v.is_zero() {
                    c_entries.push(CEntry {
                        i,
                        j,
                        k,
                        value: v.to_string(),
                    });
                }
            }
        }
    }
    let e_delta_ok = crate::frobenius::discriminant_homogeneity_residual(fd)?.is_zero();
    let wdvv_zero = fd.wdvv_residuals()?.iter().all(|(_, r)| r.is_zero());
    Ok(FrobeniusReport {
        coords: fd.coords.clone(),
        coordinate_change: fd
            .coordinate_change
            .iter()
            .map(|p| p.to_string())
            .collect(),
        eta: fd
            .eta
            .iter()
            .map(|row| row.iter().map(|s| s.to_string()).collect())
            .collect(),
        c_tensor: c_entries,
        potential: fd.potential.to_string(),
        euler: fd.euler.iter().map(|p| p.to_string()).collect(),
        n_matrix: fd
            .n_matrix
            .iter()
            .map(|row| row.iter().map(rational_str).collect())
            .collect(),
        discriminant: fd.discriminant.to_string(),
        euler_discriminant_identity: e_delta_ok,
        wdvv_zero,
        notes: fd.notes.clone(),
    })
}

pub fn verification_json(v: &VerificationReport) -> VerificationJson {
    VerificationJson {
        conditions: v
            .conditions
            .iter()
            .map(|c| ConditionJson {
                name: c.name.clone(),
                passed: c.passed,
                witness: c.witness.clone(),
            })
            .collect(),
        all_passed: v.all_passed(),
        r: v.r.as_ref().map(rational_str),
        n_induced: v.n_induced.as_ref().map(|m| {
            m.iter()
                .map(|row| row.iter().map(rational_str).collect())
                .collect()
        }),
        n_spectrum: v.n_spectrum.as_ref().map(|m| {
            m.iter()
                .map(|row| row.iter().map(rational_str).collect())
                .collect()
        }),
        notes: v.notes.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trip_is_byte_identical() {
        let mut r = Report::new("cp1");
        r.comparison = Some(ComparisonReport {
            caps: CapsJson {
                max_insertions: 5,
                max_level: 3,
                max_q: 3,
            },
            max_discrepancy: "0".into(),
            residual_monomials: 0,
            matched: true,
        });
        let s1 = r.to_json();
        let parsed: Report = serde_json::from_str(&s1).unwrap();
        let s2 = parsed.to_json();
        assert_eq!(s1, s2);
    }
}
