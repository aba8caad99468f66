//! Exponents, degrees, and the Poincare polynomial of an LG system.
//!
//! Polynomial kind reads the exponent of a basis monomial from the weights:
//! `alpha = sum (a_i + 1) w_i`. Laurent kind reads degrees off the Euler
//! field, `deg t^0 = 1` and, for the torus direction, the constant
//! coefficient of the Euler field (2 for the projective-line mirror).

use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

use crate::error::PrimformError;
use crate::lg::{LGSystem, LgKind};
use crate::milnor::MilnorRing;
use crate::poly::LaurentPoly;

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// Exponents alpha_i in basis order.
    pub exponents: Vec<BigRational>,
    /// Shifted exponents q_i = alpha_i - r.
    pub qs: Vec<BigRational>,
    /// Minimal exponent.
    pub r: BigRational,
    /// Coordinate degrees deg(t^i) = 1 - q_i.
    pub degrees: Vec<BigRational>,
    /// c-hat as q_{mu-1} in basis order.
    pub c_hat: BigRational,
    /// The closed-form (n+1) - 2r, reported alongside; may disagree with
    /// `c_hat` for Laurent kind.
    pub c_hat_formula: BigRational,
    /// Exponent-duality flag: {alpha} = {n+1-alpha} as multisets.
    pub exponent_duality: bool,
}

impl Spectrum {
    pub fn compute(
        lg: &LGSystem,
        ring: &MilnorRing,
        r_supplied: Option<BigRational>,
    ) -> Result<Self, PrimformError> {
        match lg.kind {
            LgKind::Polynomial => Self::polynomial_kind(lg, ring, r_supplied),
            LgKind::Laurent => Self::laurent_kind(lg, ring, r_supplied),
        }
    }

    fn polynomial_kind(
        lg: &LGSystem,
        ring: &MilnorRing,
        r_supplied: Option<BigRational>,
    ) -> Result<Self, PrimformError> {
        let wmap: BTreeMap<&String, &BigRational> =
            lg.vars.iter().zip(lg.weights.iter()).collect();
        let mut exponents = Vec::with_capacity(ring.mu);
        for b in &ring.basis {
            let mut alpha = BigRational::zero();
            let mono = b.terms().next().map(|(m, _)| m).unwrap_or_default();
            for (v, w) in &wmap {
                let a = mono.get(*v).copied().unwrap_or(0);
                alpha += BigRational::from_integer((a + 1).into()) * *w;
            }
            exponents.push(alpha);
        }
        let r = r_supplied.unwrap_or_else(|| exponents[0].clone());
        let qs: Vec<BigRational> = exponents.iter().map(|a| a - &r).collect();
        let n_plus_1 = BigRational::from_integer((lg.vars.len() as i64).into());
        Ok(Self::finish(exponents, qs, r, n_plus_1))
    }

    fn laurent_kind(
        lg: &LGSystem,
        ring: &MilnorRing,
        r_supplied: Option<BigRational>,
    ) -> Result<Self, PrimformError> {
        let r = r_supplied.unwrap_or_else(BigRational::zero);
        let euler = euler_components(lg, ring)?;
        let fam = lg.family()?;
        let mut degrees = Vec::with_capacity(ring.mu);
        for (i, comp) in euler.iter().enumerate() {
            let ti = &fam.params[i];
            let deg = read_degree(comp, ti).ok_or_else(|| {
                PrimformError::Unsupported(format!(
                    "Euler component {} for {} is neither c*{} nor constant",
                    comp, ti, ti
                ))
            })?;
            degrees.push(deg);
        }
        let qs: Vec<BigRational> = degrees.iter().map(|d| BigRational::one() - d).collect();
        let exponents: Vec<BigRational> = qs.iter().map(|q| q + &r).collect();
        let n_plus_1 = BigRational::one();
        let mut sp = Self::finish(exponents, qs, r, n_plus_1);
        sp.degrees = degrees;
        Ok(sp)
    }

    fn finish(
        exponents: Vec<BigRational>,
        qs: Vec<BigRational>,
        r: BigRational,
        n_plus_1: BigRational,
    ) -> Self {
        let degrees: Vec<BigRational> = qs.iter().map(|q| BigRational::one() - q).collect();
        let c_hat = qs.last().cloned().unwrap_or_else(BigRational::zero);
        let c_hat_formula = &n_plus_1 - BigRational::from_integer(2.into()) * &r;
        let mut sorted: Vec<BigRational> = exponents.clone();
        sorted.sort();
        let mut dual: Vec<BigRational> = exponents.iter().map(|a| &n_plus_1 - a).collect();
        dual.sort();
        let exponent_duality = sorted == dual;
        Spectrum {
            exponents,
            qs,
            r,
            degrees,
            c_hat,
            c_hat_formula,
            exponent_duality,
        }
    }
}

/// Euler field components `E = t^0 d/dt^0 - t^0 o d/dt^0` on the parameter
/// fields, each a polynomial in the parameters.
pub fn euler_components(
    lg: &LGSystem,
    ring: &MilnorRing,
) -> Result<Vec<LaurentPoly>, PrimformError> {
    let t0_col = crate::frobenius::t0_product(0, lg, ring)?;
    let mut out = Vec::with_capacity(t0_col.len());
    for (i, c) in t0_col.iter().enumerate() {
        let direct = if i == 0 {
            LaurentPoly::var("t0")
        } else {
            LaurentPoly::zero()
        };
        out.push(direct.sub(c));
    }
    Ok(out)
}

fn read_degree(comp: &LaurentPoly, ti: &str) -> Option<BigRational> {
    if comp.is_zero() {
        return Some(BigRational::zero());
    }
    if comp.num_terms() != 1 {
        return None;
    }
    let (mono, c) = comp.terms().next()?;
    let c = c.as_rational()?;
    if mono.is_empty() {
        // Constant component: its value is the degree datum.
        return Some(c);
    }
    if mono.len() == 1 && mono.get(ti) == Some(&1) {
        return Some(c);
    }
    None
}

/// The Poincare polynomial as (q-power, multiplicity) pairs plus a duality
/// flag against `c_hat`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoincarePolynomial {
    pub powers: Vec<(BigRational, usize)>,
    pub c_hat: BigRational,
    pub duality: bool,
    pub c_hat_formula_matches: bool,
}

pub fn poincare_polynomial(sp: &Spectrum) -> PoincarePolynomial {
    let mut counts: BTreeMap<BigRational, usize> = BTreeMap::new();
    for q in &sp.qs {
        *counts.entry(q.clone()).or_insert(0) += 1;
    }
    // Duality: multiset {q} equals {c_hat - q}.
    let dual: BTreeMap<BigRational, usize> = counts
        .iter()
        .map(|(q, &m)| (&sp.c_hat - q, m))
        .collect();
    let duality = counts == dual;
    PoincarePolynomial {
        powers: counts.into_iter().collect(),
        c_hat: sp.c_hat.clone(),
        duality,
        c_hat_formula_matches: sp.c_hat == sp.c_hat_formula,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn a2_spectrum_oracle() {
        // alpha = (a+1)/3 on basis {1, z}: {1/3, 2/3}; q = {0, 1/3};
        // deg t = {1, 2/3}
        let lg = LGSystem::a_n(2);
        let ring = MilnorRing::build(&lg).unwrap();
        let sp = Spectrum::compute(&lg, &ring, None).unwrap();
        assert_eq!(sp.exponents, vec![rat(1, 3), rat(2, 3)]);
        assert_eq!(sp.qs, vec![rat(0, 1), rat(1, 3)]);
        assert_eq!(sp.degrees, vec![rat(1, 1), rat(2, 3)]);
        assert_eq!(sp.r, rat(1, 3));
        assert!(sp.exponent_duality);
        assert_eq!(sp.c_hat, sp.c_hat_formula);
    }

    #[test]
    fn a3_degrees_oracle() {
        // weights 1/4: deg t = {1, 3/4, 1/2}
        let lg = LGSystem::a_n(3);
        let ring = MilnorRing::build(&lg).unwrap();
        let sp = Spectrum::compute(&lg, &ring, None).unwrap();
        assert_eq!(sp.degrees, vec![rat(1, 1), rat(3, 4), rat(1, 2)]);
    }

    #[test]
    fn cp1_degrees_from_euler_field() {
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        let sp = Spectrum::compute(&lg, &ring, None).unwrap();
        assert_eq!(sp.degrees, vec![rat(1, 1), rat(2, 1)]);
        assert_eq!(sp.qs, vec![rat(0, 1), rat(-1, 1)]);
        // q_{mu-1} and (n+1)-2r disagree for the Laurent system: -1 vs 1.
        assert_eq!(sp.c_hat, rat(-1, 1));
        assert_eq!(sp.c_hat_formula, rat(1, 1));
    }

    #[test]
    fn poincare_duality_small_cases() {
        // A2: chi = 1 + (y ybar)^{1/3}, c = 1/3
        let lg = LGSystem::a_n(2);
        let ring = MilnorRing::build(&lg).unwrap();
        let sp = Spectrum::compute(&lg, &ring, None).unwrap();
        let chi = poincare_polynomial(&sp);
        assert_eq!(chi.c_hat, rat(1, 3));
        assert!(chi.duality);
        // A3: chi = 1 + (y ybar)^{1/4} + (y ybar)^{1/2}, c = 1/2
        let lg = LGSystem::a_n(3);
        let ring = MilnorRing::build(&lg).unwrap();
        let sp = Spectrum::compute(&lg, &ring, None).unwrap();
        let chi = poincare_polynomial(&sp);
        assert_eq!(chi.c_hat, rat(1, 2));
        assert!(chi.duality);
        assert_eq!(
            chi.powers,
            vec![(rat(0, 1), 1), (rat(1, 4), 1), (rat(1, 2), 1)]
        );
    }

    #[test]
    fn cp1_poincare_duality_with_negative_chat() {
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        let sp = Spectrum::compute(&lg, &ring, None).unwrap();
        let chi = poincare_polynomial(&sp);
        assert!(chi.duality);
        assert_eq!(chi.c_hat, rat(-1, 1));
        assert!(!chi.c_hat_formula_matches);
    }

    #[test]
    fn duality_a1_through_a6() {
        for n in 1..=6 {
            let lg = LGSystem::a_n(n);
            let ring = MilnorRing::build(&lg).unwrap();
            assert_eq!(ring.mu, n, "mu formula cross-check for A_{}", n);
            let sp = Spectrum::compute(&lg, &ring, None).unwrap();
            assert!(sp.exponent_duality, "duality fails for A_{}", n);
            assert!(poincare_polynomial(&sp).duality);
        }
    }

    #[test]
    fn x3y3_exponent_duality() {
        let lg = LGSystem::x3y3();
        let ring = MilnorRing::build(&lg).unwrap();
        let sp = Spectrum::compute(&lg, &ring, None).unwrap();
        assert!(sp.exponent_duality);
        assert_eq!(sp.exponents.len(), 4);
    }
}
