//! Landau-Ginzburg systems: a superpotential together with its deformed
//! family over flat parameters.
//!
//! Two kinds are supported. Polynomial kind carries a quasi-homogeneous
//! superpotential in one or more variables with rational weights; the
//! deformed family is one-variable. Laurent kind is the one-variable
//! `z + q exp(t^1) z^-1` style family on the torus, where `q` is a formal
//! parameter and `E1 = exp(t^1)` is treated as an invertible formal
//! parameter tied to `t^1` by the derivative chain rule.

use num_rational::BigRational;
use std::collections::BTreeMap;

use crate::error::PrimformError;
use crate::poly::LaurentPoly;
use crate::scalar::ExactScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LgKind {
    Polynomial,
    Laurent,
}

#[derive(Clone, Debug)]
pub struct LGSystem {
    pub name: String,
    pub kind: LgKind,
    /// Fiber variables (one for deformed families; several allowed for
    /// undeformed ring computations).
    pub vars: Vec<String>,
    /// Quasi-homogeneous weights for polynomial kind, aligned with `vars`.
    pub weights: Vec<BigRational>,
    /// The undeformed superpotential `f = F(z, 0)`.
    pub f: LaurentPoly,
    /// The deformed family `F(z, t)`; `None` for ring-only systems.
    pub family: Option<Family>,
}

#[derive(Clone, Debug)]
pub struct Family {
    /// Flat parameter names, `t0` first.
    pub params: Vec<String>,
    /// `F(z, t)` as a Laurent polynomial in fiber variables and parameters.
    pub f_family: LaurentPoly,
    /// Parameters standing for exponentials: (scalar parameter, variable).
    pub exp_params: Vec<(String, String)>,
    /// The deformation monomials `phi_i` with `phi_0 = 1`.
    pub basis_monomials: Vec<LaurentPoly>,
}

impl LGSystem {
    /// The mirror family of the projective line:
    /// `F = t0 + z + q E1 z^-1` with `E1 = exp(t1)`.
    pub fn cp1() -> Self {
        let q_e1 = ExactScalar::param("q").mul(&ExactScalar::param("E1"));
        let f_family = LaurentPoly::var("t0")
            .add(&LaurentPoly::var("z"))
            .add(&LaurentPoly::var_pow("z", -1).scale(&q_e1));
        let f = LaurentPoly::var("z").add(
            &LaurentPoly::var_pow("z", -1).scale(&ExactScalar::param("q")),
        );
        LGSystem {
            name: "cp1".into(),
            kind: LgKind::Laurent,
            vars: vec!["z".into()],
            weights: vec![],
            f,
            family: Some(Family {
                params: vec!["t0".into(), "t1".into()],
                f_family,
                exp_params: vec![("E1".into(), "t1".into())],
                basis_monomials: vec![
                    LaurentPoly::one(),
                    LaurentPoly::var_pow("z", -1).scale(&ExactScalar::param("q")),
                ],
            }),
        }
    }

    /// The A_n miniversal family `F = z^{n+1} + t_{n-1} z^{n-1} + ... + t1 z + t0`.
    pub fn a_n(n: usize) -> Self {
        assert!(n >= 1, "A_n needs n >= 1");
        let mut f_family = LaurentPoly::var_pow("z", (n + 1) as i64);
        let mut params = Vec::new();
        let mut basis = Vec::new();
        for i in 0..n {
            let t = format!("t{}", i);
            f_family = f_family.add(&LaurentPoly::var(&t).mul(&LaurentPoly::var_pow("z", i as i64)));
            params.push(t);
            basis.push(LaurentPoly::var_pow("z", i as i64));
        }
        LGSystem {
            name: format!("a{}", n),
            kind: LgKind::Polynomial,
            vars: vec!["z".into()],
            weights: vec![BigRational::new(1.into(), ((n + 1) as i64).into())],
            f: LaurentPoly::var_pow("z", (n + 1) as i64),
            family: Some(Family {
                params,
                f_family,
                exp_params: vec![],
                basis_monomials: basis,
            }),
        }
    }

    /// Ring-only system for `x^3 + y^3` (tensor square of the cusp).
    pub fn x3y3() -> Self {
        let f = LaurentPoly::var_pow("x", 3).add(&LaurentPoly::var_pow("y", 3));
        LGSystem {
            name: "x3y3".into(),
            kind: LgKind::Polynomial,
            vars: vec!["x".into(), "y".into()],
            weights: vec![
                BigRational::new(1.into(), 3.into()),
                BigRational::new(1.into(), 3.into()),
            ],
            f,
            family: None,
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "cp1" => Some(LGSystem::cp1()),
            "x3y3" => Some(LGSystem::x3y3()),
            _ => {
                let rest = name.strip_prefix('a')?;
                let n: usize = rest.parse().ok()?;
                if (1..=9).contains(&n) {
                    Some(LGSystem::a_n(n))
                } else {
                    None
                }
            }
        }
    }

    pub fn family(&self) -> Result<&Family, PrimformError> {
        self.family
            .as_ref()
            .ok_or_else(|| PrimformError::Unsupported(format!("{} has no deformed family", self.name)))
    }

    /// The single fiber variable of a deformed system.
    pub fn fiber_var(&self) -> Result<&str, PrimformError> {
        if self.vars.len() != 1 {
            return Err(PrimformError::Unsupported(
                "deformed families are one-variable".into(),
            ));
        }
        Ok(&self.vars[0])
    }

    pub fn mu_expected(&self) -> Option<usize> {
        use num_traits::One;
        // mu = prod(1/w_i - 1) for polynomial kind.
        if self.kind != LgKind::Polynomial || self.weights.is_empty() {
            return None;
        }
        let mut mu = BigRational::one();
        for w in &self.weights {
            mu *= w.recip() - BigRational::one();
        }
        if mu.is_integer() {
            Some(mu.to_integer().try_into().ok()?)
        } else {
            None
        }
    }

    /// `theta F = z dF/dz` (laurent) or `F_z = dF/dz` (polynomial) of the
    /// deformed family.
    pub fn jacobian_generator(&self) -> Result<LaurentPoly, PrimformError> {
        let fam = self.family()?;
        let z = self.fiber_var()?;
        Ok(match self.kind {
            LgKind::Laurent => fam.f_family.log_derivative(z),
            LgKind::Polynomial => fam.f_family.derivative(z, &[]),
        })
    }

    /// Same for the undeformed superpotential.
    pub fn jacobian_generator_undeformed(&self) -> Result<LaurentPoly, PrimformError> {
        let z = self.fiber_var()?;
        Ok(match self.kind {
            LgKind::Laurent => self.f.log_derivative(z),
            LgKind::Polynomial => self.f.derivative(z, &[]),
        })
    }

    /// The direction fields `dF/dt_i` of the family.
    pub fn directions(&self) -> Result<Vec<LaurentPoly>, PrimformError> {
        let fam = self.family()?;
        Ok(fam
            .params
            .iter()
            .map(|p| fam.f_family.derivative(p, &fam.exp_params))
            .collect())
    }

    /// `F^0 = t0 - F`, the function the coordinate `t0` restricts to on the
    /// zero hypersurface of the family.
    pub fn f_zero(&self) -> Result<LaurentPoly, PrimformError> {
        let fam = self.family()?;
        Ok(LaurentPoly::var("t0").sub(&fam.f_family))
    }

    /// Check `dF/dt0 = 1` and `F(0) = 0` (with exponential parameters at 1).
    pub fn check_family_axioms(&self) -> Result<(), PrimformError> {
        let fam = self.family()?;
        let d0 = fam.f_family.derivative("t0", &fam.exp_params);
        if d0 != LaurentPoly::one() {
            return Err(PrimformError::Unsupported(format!(
                "dF/dt0 = {} is not 1",
                d0
            )));
        }
        let mut f0 = fam.f_family.clone();
        for p in &fam.params {
            f0 = f0.subst_scalar(p, &ExactScalar::zero())?;
        }
        for (param, _) in &fam.exp_params {
            f0 = f0.map_coeffs(|c| c.eval_param_one(param));
        }
        if f0 != self.f {
            return Err(PrimformError::Unsupported(format!(
                "F(z, 0) = {} differs from f = {}",
                f0, self.f
            )));
        }
        Ok(())
    }

    /// Quasi-homogeneity of `f`: every monomial has weighted degree 1.
    pub fn check_quasi_homogeneous(&self) -> bool {
        if self.kind != LgKind::Polynomial {
            return true;
        }
        let wmap: BTreeMap<&String, &BigRational> =
            self.vars.iter().zip(self.weights.iter()).collect();
        self.f.terms().all(|(mono, _)| {
            let mut d = BigRational::default();
            for (v, e) in &mono {
                if let Some(w) = wmap.get(v) {
                    d += BigRational::from_integer((*e).into()) * *w;
                }
            }
            d == BigRational::new(1.into(), 1.into())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cp1_family_axioms() {
        let lg = LGSystem::cp1();
        lg.check_family_axioms().unwrap();
        let theta_f = lg.jacobian_generator().unwrap();
        // theta F = z - q E1 z^-1
        let q_e1 = ExactScalar::param("q").mul(&ExactScalar::param("E1"));
        let expected = LaurentPoly::var("z").sub(&LaurentPoly::var_pow("z", -1).scale(&q_e1));
        assert_eq!(theta_f, expected);
    }

    #[test]
    fn cp1_directions() {
        let lg = LGSystem::cp1();
        let dirs = lg.directions().unwrap();
        assert_eq!(dirs[0], LaurentPoly::one());
        let q_e1 = ExactScalar::param("q").mul(&ExactScalar::param("E1"));
        assert_eq!(dirs[1], LaurentPoly::var_pow("z", -1).scale(&q_e1));
    }

    #[test]
    fn a2_family_axioms() {
        let lg = LGSystem::a_n(2);
        lg.check_family_axioms().unwrap();
        assert!(lg.check_quasi_homogeneous());
        assert_eq!(lg.mu_expected(), Some(2));
        let dirs = lg.directions().unwrap();
        assert_eq!(dirs[0], LaurentPoly::one());
        assert_eq!(dirs[1], LaurentPoly::var("z"));
    }

    #[test]
    fn x3y3_mu() {
        assert_eq!(LGSystem::x3y3().mu_expected(), Some(4));
    }

    #[test]
    fn builtin_names() {
        assert!(LGSystem::builtin("cp1").is_some());
        assert!(LGSystem::builtin("a6").is_some());
        assert!(LGSystem::builtin("b2").is_none());
    }
}
