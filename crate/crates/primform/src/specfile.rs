//! JSON spec files describing LG systems.
//!
//! A spec file declares the kind, the variables with weights, the
//! superpotential as a term list, and optionally an explicit deformation
//! basis and a primitive-form candidate. Coefficients are exact rational
//! strings; exponent maps may only reference declared variables.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;

use crate::brieskorn::BrieskornClass;
use crate::error::PrimformError;
use crate::lg::{Family, LGSystem, LgKind};
use crate::poly::LaurentPoly;
use crate::scalar::{ExactScalar, ParamMono};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LGSpecFile {
    pub kind: String,
    pub variables: Vec<VariableSpec>,
    pub superpotential: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deformation_basis: Vec<Vec<TermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<ZetaSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermSpec {
    pub coefficient: String,
    #[serde(default)]
    pub exponents: BTreeMap<String, i64>,
    /// Formal parameter exponents (e.g. {"q": 1}).
    #[serde(default)]
    pub parameters: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZetaSpec {
    pub terms: Vec<TermSpec>,
    /// Volume token: "dz" (polynomial kind) or "dz/z" (laurent kind).
    pub volume: String,
}

fn parse_rational(s: &str) -> Result<BigRational, PrimformError> {
    BigRational::from_str(s)
        .map_err(|e| PrimformError::SpecFile(format!("bad rational '{}': {}", s, e)))
}

fn term_to_poly(term: &TermSpec, declared: &[String]) -> Result<LaurentPoly, PrimformError> {
    for v in term.exponents.keys() {
        if !declared.contains(v) {
            return Err(PrimformError::SpecFile(format!(
                "exponent references undeclared variable '{}'",
                v
            )));
        }
    }
    let c = parse_rational(&term.coefficient)?;
    let mut mono = ParamMono::one();
    for (p, e) in &term.parameters {
        mono = mono.mul(&ParamMono::var(p).pow(*e));
    }
    let scalar = ExactScalar::monomial(mono, c);
    let vars: Vec<(&str, i64)> = term
        .exponents
        .iter()
        .filter(|(_, e)| **e != 0)
        .map(|(v, e)| (v.as_str(), *e))
        .collect();
    Ok(LaurentPoly::monomial(&vars, scalar))
}

fn terms_to_poly(terms: &[TermSpec], declared: &[String]) -> Result<LaurentPoly, PrimformError> {
    let mut p = LaurentPoly::zero();
    for t in terms {
        p = p.add(&term_to_poly(t, declared)?);
    }
    Ok(p)
}

impl LGSpecFile {
    pub fn from_json(json: &str) -> Result<Self, PrimformError> {
        serde_json::from_str(json).map_err(|e| PrimformError::SpecFile(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, PrimformError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PrimformError::SpecFile(format!("{}: {}", path.display(), e)))?;
        Self::from_json(&text)
    }

    /// Build an LG system. Polynomial kind gets its miniversal family from
    /// the ring basis of the superpotential (or the explicit deformation
    /// basis); Laurent kind is supported for the torus mirror shape
    /// `z + c q z^{-1}`, whose family carries the exponential dressing.
    pub fn build(&self, name: &str) -> Result<LGSystem, PrimformError> {
        let kind = match self.kind.as_str() {
            "polynomial" => LgKind::Polynomial,
            "laurent" => LgKind::Laurent,
            other => {
                return Err(PrimformError::SpecFile(format!(
                    "kind must be 'polynomial' or 'laurent', got '{}'",
                    other
                )))
            }
        };
        let vars: Vec<String> = self.variables.iter().map(|v| v.name.clone()).collect();
        if vars.is_empty() {
            return Err(PrimformError::SpecFile("no variables declared".into()));
        }
        let weights: Vec<BigRational> = if kind == LgKind::Polynomial {
            self.variables
                .iter()
                .map(|v| {
                    v.weight
                        .as_deref()
                        .ok_or_else(|| {
                            PrimformError::SpecFile(format!(
                                "polynomial kind requires a weight for '{}'",
                                v.name
                            ))
                        })
                        .and_then(parse_rational)
                })
                .collect::<Result<_, _>>()?
        } else {
            Vec::new()
        };
        let f = terms_to_poly(&self.superpotential, &vars)?;
        if f.is_zero() {
            return Err(PrimformError::SpecFile("superpotential is zero".into()));
        }
        let mut lg = LGSystem {
            name: name.to_string(),
            kind,
            vars: vars.clone(),
            weights,
            f,
            family: None,
        };
        if kind == LgKind::Polynomial && !lg.check_quasi_homogeneous() {
            return Err(PrimformError::SpecFile(
                "superpotential is not quasi-homogeneous for the declared weights".into(),
            ));
        }
        lg.family = self.build_family(&lg)?;
        Ok(lg)
    }

    fn build_family(&self, lg: &LGSystem) -> Result<Option<Family>, PrimformError> {
        if lg.vars.len() != 1 {
            return Ok(None);
        }
        let z = lg.vars[0].clone();
        match lg.kind {
            LgKind::Polynomial => {
                let basis: Vec<LaurentPoly> = if self.deformation_basis.is_empty() {
                    let probe = LGSystem {
                        family: None,
                        ..lg.clone()
                    };
                    crate::milnor::MilnorRing::build_undeformed(&probe)?.basis
                } else {
                    self.deformation_basis
                        .iter()
                        .map(|terms| terms_to_poly(terms, &lg.vars))
                        .collect::<Result<_, _>>()?
                };
                let mut f_family = lg.f.clone();
                let mut params = Vec::new();
                for (i, phi) in basis.iter().enumerate() {
                    let t = format!("t{}", i);
                    f_family = f_family.add(&LaurentPoly::var(&t).mul(phi));
                    params.push(t);
                }
                Ok(Some(Family {
                    params,
                    f_family,
                    exp_params: vec![],
                    basis_monomials: basis,
                }))
            }
            LgKind::Laurent => {
                // Torus mirror shape: z + (scalar) z^{-1}.
                let coeffs = lg.f.coeffs_in(&z);
                let plus = coeffs.get(&1).cloned().unwrap_or_else(LaurentPoly::zero);
                let minus = coeffs.get(&-1).cloned().unwrap_or_else(LaurentPoly::zero);
                let total_terms: usize = coeffs.len();
                if total_terms != 2 || plus != LaurentPoly::one() || minus.is_zero() {
                    return Ok(None);
                }
                let c = minus.constant_term();
                let dressed = c.mul(&ExactScalar::param("E1"));
                let f_family = LaurentPoly::var("t0")
                    .add(&LaurentPoly::var(&z))
                    .add(&LaurentPoly::var_pow(&z, -1).scale(&dressed));
                Ok(Some(Family {
                    params: vec!["t0".into(), "t1".into()],
                    f_family,
                    exp_params: vec![("E1".into(), "t1".into())],
                    basis_monomials: vec![
                        LaurentPoly::one(),
                        LaurentPoly::var_pow(&z, -1).scale(&c),
                    ],
                }))
            }
        }
    }

    /// The primitive-form candidate, when declared.
    pub fn zeta_class(&self, lg: &LGSystem) -> Result<Option<BrieskornClass>, PrimformError> {
        let Some(zs) = &self.zeta else {
            return Ok(None);
        };
        let expected = match lg.kind {
            LgKind::Laurent => "dz/z",
            LgKind::Polynomial => "dz",
        };
        if zs.volume != expected {
            return Err(PrimformError::SpecFile(format!(
                "volume token '{}' does not match kind (expected '{}')",
                zs.volume, expected
            )));
        }
        let num = terms_to_poly(&zs.terms, &lg.vars)?;
        Ok(Some(BrieskornClass::regular(num)))
    }
}

/// The spec-file rendering of a builtin system (used to document the format).
pub fn builtin_spec(name: &str) -> Option<LGSpecFile> {
    match name {
        "cp1" => Some(LGSpecFile {
            kind: "laurent".into(),
            variables: vec![VariableSpec {
                name: "z".into(),
                weight: None,
            }],
            superpotential: vec![
                TermSpec {
                    coefficient: "1".into(),
                    exponents: BTreeMap::from([("z".into(), 1)]),
                    parameters: BTreeMap::new(),
                },
                TermSpec {
                    coefficient: "1".into(),
                    exponents: BTreeMap::from([("z".into(), -1)]),
                    parameters: BTreeMap::from([("q".into(), 1)]),
                },
            ],
            deformation_basis: vec![],
            zeta: Some(ZetaSpec {
                terms: vec![TermSpec {
                    coefficient: "1".into(),
                    exponents: BTreeMap::new(),
                    parameters: BTreeMap::new(),
                }],
                volume: "dz/z".into(),
            }),
        }),
        _ => {
            let n: usize = name.strip_prefix('a')?.parse().ok()?;
            if !(1..=9).contains(&n) {
                return None;
            }
            Some(LGSpecFile {
                kind: "polynomial".into(),
                variables: vec![VariableSpec {
                    name: "z".into(),
                    weight: Some(format!("1/{}", n + 1)),
                }],
                superpotential: vec![TermSpec {
                    coefficient: "1".into(),
                    exponents: BTreeMap::from([("z".into(), (n + 1) as i64)]),
                    parameters: BTreeMap::new(),
                }],
                deformation_basis: vec![],
                zeta: Some(ZetaSpec {
                    terms: vec![TermSpec {
                        coefficient: "1".into(),
                        exponents: BTreeMap::new(),
                        parameters: BTreeMap::new(),
                    }],
                    volume: "dz".into(),
                }),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a2_spec_file_round_trip() {
        let spec = builtin_spec("a2").unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let parsed = LGSpecFile::from_json(&json).unwrap();
        let lg = parsed.build("a2").unwrap();
        assert_eq!(lg.kind, LgKind::Polynomial);
        let builtin = LGSystem::a_n(2);
        assert_eq!(lg.f, builtin.f);
        assert_eq!(
            lg.family.as_ref().unwrap().f_family,
            builtin.family.as_ref().unwrap().f_family
        );
    }

    #[test]
    fn cp1_spec_file_matches_builtin() {
        let spec = builtin_spec("cp1").unwrap();
        let lg = spec.build("cp1").unwrap();
        let builtin = LGSystem::cp1();
        assert_eq!(lg.f, builtin.f);
        assert_eq!(
            lg.family.as_ref().unwrap().f_family,
            builtin.family.as_ref().unwrap().f_family
        );
        let zeta = spec.zeta_class(&lg).unwrap().unwrap();
        assert_eq!(zeta.num, LaurentPoly::one());
    }

    #[test]
    fn undeclared_variable_is_rejected() {
        let json = r#"{
            "kind": "polynomial",
            "variables": [{"name": "z", "weight": "1/3"}],
            "superpotential": [{"coefficient": "1", "exponents": {"w": 3}}]
        }"#;
        let spec = LGSpecFile::from_json(json).unwrap();
        assert!(matches!(
            spec.build("bad"),
            Err(PrimformError::SpecFile(_))
        ));
    }

    #[test]
    fn bad_rational_is_rejected() {
        let json = r#"{
            "kind": "polynomial",
            "variables": [{"name": "z", "weight": "1/3"}],
            "superpotential": [{"coefficient": "x", "exponents": {"z": 3}}]
        }"#;
        let spec = LGSpecFile::from_json(json).unwrap();
        assert!(spec.build("bad").is_err());
    }
}
