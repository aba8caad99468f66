//! Reduced rational functions and exact Laurent-series expansion.
//!
//! `RatFunc` is a quotient of Laurent polynomials with a normalized
//! denominator. Expansions at zero or infinity in a designated variable are
//! exact to any requested order; the coefficient of `z^-1` feeds the
//! total-residue evaluation used by the pairing and verification layers
//! (sum of residues over the critical set equals minus the boundary residues
//! at 0 and infinity).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::PrimformError;
use crate::poly::LaurentPoly;
use crate::scalar::ExactScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpandAt {
    Zero,
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RatFunc {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<Self, PrimformError> {
        if den.is_zero() {
            return Err(PrimformError::DivisionByZero);
        }
        let mut r = RatFunc { num, den };
        r.reduce();
        Ok(r)
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        RatFunc {
            num: p,
            den: LaurentPoly::one(),
        }
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self, PrimformError> {
        RatFunc::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PrimformError> {
        RatFunc::new(
            self.num.mul(&other.den).sub(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PrimformError> {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn mul_poly(&self, p: &LaurentPoly) -> Result<Self, PrimformError> {
        RatFunc::new(self.num.mul(p), self.den.clone())
    }

    /// Content normalization plus one-variable gcd cancellation (the latter
    /// when both parts are univariate with purely rational coefficients).
    fn reduce(&mut self) {
        // Shift the denominator so its lowest exponent in each variable is 0,
        // applying the same shift to the numerator.
        for v in self.den.vars().to_vec() {
            if let Some((lo, _)) = self.den.degree_range(&v) {
                if lo != 0 {
                    self.den = self.den.shift(&v, -lo);
                    self.num = self.num.shift(&v, -lo);
                }
            }
        }
        // One-variable rational gcd.
        self.cancel_univariate_gcd();
        // Scalar normalization: make the denominator's first term 1 if it is
        // a unit; rational content otherwise.
        let first_coeff = self.den.terms().next().map(|(_, c)| c.clone());
        if let Some(c) = first_coeff {
            if let Ok(cinv) = c.inv() {
                self.num = self.num.scale(&cinv);
                self.den = self.den.scale(&cinv);
            }
        }
    }

    fn cancel_univariate_gcd(&mut self) {
        let vars: Vec<&String> = self
            .num
            .vars()
            .iter()
            .chain(self.den.vars().iter())
            .collect();
        let var = match vars.split_first() {
            Some((first, rest)) if rest.iter().all(|v| v == first) => (*first).clone(),
            _ => return,
        };
        let rational_only = |p: &LaurentPoly| {
            p.coeffs_in(&var)
                .values()
                .all(|c| c.constant_term().as_rational().is_some() && c.num_terms() <= 1 && c.vars().is_empty())
        };
        if !rational_only(&self.num) || !rational_only(&self.den) {
            return;
        }
        let to_vec = |p: &LaurentPoly| -> Option<Vec<num_rational::BigRational>> {
            let cs = p.coeffs_in(&var);
            let (lo, hi) = p.degree_range(&var)?;
            if lo < 0 {
                return None;
            }
            let mut out = vec![num_rational::BigRational::default(); (hi + 1) as usize];
            for (k, c) in cs {
                out[k as usize] = c.constant_term().as_rational()?;
            }
            Some(out)
        };
        let (Some(a), Some(b)) = (to_vec(&self.num), to_vec(&self.den)) else {
            return;
        };
        let g = poly_gcd_rat(&a, &b);
        if g.len() <= 1 {
            return;
        }
        let gp = vec_to_poly(&g, &var);
        if let (Ok(n2), Ok(d2)) = (
            self.num.exact_div(&gp, &var),
            self.den.exact_div(&gp, &var),
        ) {
            self.num = n2;
            self.den = d2;
        }
    }

    /// Exact truncated Laurent expansion in `var`.
    ///
    /// At zero the result covers exponents up to `order`; at infinity it
    /// covers exponents down to `-order`. The denominator's extreme
    /// coefficient must be a unit of the coefficient field.
    pub fn laurent_expand(
        &self,
        var: &str,
        at: ExpandAt,
        order: i64,
    ) -> Result<LaurentSeries, PrimformError> {
        match at {
            ExpandAt::Zero => expand_at_zero(&self.num, &self.den, var, order),
            ExpandAt::Infinity => {
                let flip = |p: &LaurentPoly| flip_var(p, var);
                let s = expand_at_zero(&flip(&self.num), &flip(&self.den), var, order)?;
                Ok(LaurentSeries {
                    var: s.var,
                    at: ExpandAt::Infinity,
                    coeffs: s.coeffs.into_iter().map(|(k, c)| (-k, c)).collect(),
                })
            }
        }
    }

    /// Residue at zero: coefficient of `var^-1` in the expansion at zero.
    pub fn residue_at_zero(&self, var: &str) -> Result<LaurentPoly, PrimformError> {
        let s = self.laurent_expand(var, ExpandAt::Zero, -1)?;
        Ok(s.coeff(-1))
    }

    /// Residue at infinity: minus the coefficient of `var^-1` in the
    /// expansion at infinity.
    pub fn residue_at_infinity(&self, var: &str) -> Result<LaurentPoly, PrimformError> {
        let s = self.laurent_expand(var, ExpandAt::Infinity, 1)?;
        Ok(s.coeff(-1).neg())
    }

    /// Sum of the residues over the zeros of the denominator away from
    /// `{0, infinity}`, computed as minus the boundary residues. For
    /// polynomial-kind integrands (no pole at 0) set `include_zero = false`.
    pub fn critical_residue_sum(
        &self,
        var: &str,
        include_zero: bool,
    ) -> Result<LaurentPoly, PrimformError> {
        let rinf = self.residue_at_infinity(var)?;
        let r0 = if include_zero {
            self.residue_at_zero(var)?
        } else {
            LaurentPoly::zero()
        };
        Ok(r0.add(&rinf).neg())
    }

    /// `critical_residue_sum` specialized to a scalar result.
    pub fn total_residue(&self, var: &str) -> Result<ExactScalar, PrimformError> {
        let p = self.critical_residue_sum(var, true)?;
        poly_to_scalar(&p)
    }
}

pub fn poly_to_scalar(p: &LaurentPoly) -> Result<ExactScalar, PrimformError> {
    if p.is_zero() {
        return Ok(ExactScalar::zero());
    }
    if !p.vars().is_empty() {
        return Err(PrimformError::Unsupported(format!(
            "expected a scalar residue, got {}",
            p
        )));
    }
    Ok(p.constant_term())
}

fn flip_var(p: &LaurentPoly, var: &str) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for (k, c) in p.coeffs_in(var) {
        out = out.add(&c.mul(&LaurentPoly::var_pow(var, -k)));
    }
    if p.degree_range(var).is_none() {
        return p.clone();
    }
    out
}

fn truncate_above(p: &LaurentPoly, var: &str, max_exp: i64) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for (k, c) in p.coeffs_in(var) {
        if k <= max_exp {
            out = out.add(&c.mul(&LaurentPoly::var_pow(var, k)));
        }
    }
    out
}

fn expand_at_zero(
    num: &LaurentPoly,
    den: &LaurentPoly,
    var: &str,
    max_exp: i64,
) -> Result<LaurentSeries, PrimformError> {
    if num.is_zero() {
        return Ok(LaurentSeries {
            var: var.to_string(),
            at: ExpandAt::Zero,
            coeffs: BTreeMap::new(),
        });
    }
    let den_coeffs = den.coeffs_in(var);
    let (m, c_m) = match den_coeffs.iter().next() {
        Some((k, c)) => (*k, c.clone()),
        None => return Err(PrimformError::DivisionByZero),
    };
    let c_m_inv = c_m
        .inv_if_unit()
        .map_err(|_| PrimformError::NonInvertibleLeading(c_m.to_string()))?;
    // den = c_m v^m (1 + tail), tail has strictly positive v-exponents.
    let tail = den
        .shift(var, -m)
        .mul(&c_m_inv)
        .sub(&LaurentPoly::one());
    let num_min = num.degree_range(var).map(|(lo, _)| lo).unwrap_or(0);
    // 1/den core series must reach exponent `needed` for num*inv to reach max_exp.
    let needed = max_exp - (num_min - m);
    let mut series = LaurentPoly::one();
    if needed >= 0 && !tail.is_zero() {
        let mut power = LaurentPoly::one();
        let mut sign_neg = false;
        loop {
            sign_neg = !sign_neg;
            power = truncate_above(&power.mul(&tail), var, needed);
            if power.is_zero() {
                break;
            }
            series = if sign_neg {
                series.sub(&power)
            } else {
                series.add(&power)
            };
        }
    }
    let inv = series.mul(&c_m_inv).shift(var, -m);
    let result = truncate_above(&num.mul(&inv), var, max_exp);
    Ok(LaurentSeries {
        var: var.to_string(),
        at: ExpandAt::Zero,
        coeffs: result.coeffs_in(var),
    })
}

/// A truncated Laurent series: exponent -> coefficient polynomial in the
/// remaining variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    pub var: String,
    pub at: ExpandAt,
    pub coeffs: BTreeMap<i64, LaurentPoly>,
}

impl LaurentSeries {
    pub fn coeff(&self, k: i64) -> LaurentPoly {
        self.coeffs.get(&k).cloned().unwrap_or_else(LaurentPoly::zero)
    }

    pub fn to_poly(&self) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (k, c) in &self.coeffs {
            out = out.add(&c.mul(&LaurentPoly::var_pow(&self.var, *k)));
        }
        out
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

fn poly_gcd_rat(a: &[num_rational::BigRational], b: &[num_rational::BigRational]) -> Vec<num_rational::BigRational> {
    use num_traits::Zero;
    let trim = |v: &[num_rational::BigRational]| -> Vec<num_rational::BigRational> {
        let mut v = v.to_vec();
        while v.last().map_or(false, |c| c.is_zero()) {
            v.pop();
        }
        v
    };
    let mut a = trim(a);
    let mut b = trim(b);
    while !b.is_empty() {
        let r = poly_rem_rat(&a, &b);
        a = b;
        b = trim(&r);
    }
    // Normalize monic.
    if let Some(lead) = a.last().cloned() {
        if !lead.is_zero() {
            for c in &mut a {
                *c /= lead.clone();
            }
        }
    }
    a
}

fn poly_rem_rat(
    a: &[num_rational::BigRational],
    b: &[num_rational::BigRational],
) -> Vec<num_rational::BigRational> {
    use num_traits::Zero;
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b.last().unwrap().clone();
    while r.len() > db && !r.is_empty() {
        let lr = r.last().unwrap().clone();
        if lr.is_zero() {
            r.pop();
            continue;
        }
        let f = lr / lead.clone();
        let shift = r.len() - 1 - db;
        for (i, c) in b.iter().enumerate() {
            let idx = i + shift;
            r[idx] -= f.clone() * c;
        }
        while r.last().map_or(false, |c| c.is_zero()) {
            r.pop();
        }
    }
    r
}

fn vec_to_poly(v: &[num_rational::BigRational], var: &str) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for (i, c) in v.iter().enumerate() {
        out = out.add(
            &LaurentPoly::var_pow(var, i as i64).scale(&ExactScalar::from_rational(c.clone())),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> LaurentPoly {
        LaurentPoly::var("z")
    }

    fn qpoly() -> LaurentPoly {
        LaurentPoly::constant(ExactScalar::param("Q"))
    }

    /// Independent oracle: 1/(z^2 - Q) = -Q^-1 * sum_k (z^2/Q)^k.
    fn geometric_oracle(order: usize) -> LaurentPoly {
        let qinv = ExactScalar::param("Q").inv().unwrap();
        let mut out = LaurentPoly::zero();
        for k in 0..=order {
            let c = qinv.pow(k as u32 + 1).neg();
            out = out.add(&LaurentPoly::var_pow("z", 2 * k as i64).scale(&c));
        }
        out
    }

    #[test]
    fn expand_at_zero_matches_geometric_oracle() {
        let r = RatFunc::new(LaurentPoly::one(), LaurentPoly::var_pow("z", 2).sub(&qpoly()))
            .unwrap();
        let s = r.laurent_expand("z", ExpandAt::Zero, 4).unwrap();
        assert_eq!(s.to_poly(), geometric_oracle(2));
    }

    #[test]
    fn expand_at_infinity_matches_oracle() {
        // 1/(z^2 - Q) at infinity to order 4: z^-2 + Q z^-4
        let r = RatFunc::new(LaurentPoly::one(), LaurentPoly::var_pow("z", 2).sub(&qpoly()))
            .unwrap();
        let s = r.laurent_expand("z", ExpandAt::Infinity, 4).unwrap();
        let expected = LaurentPoly::var_pow("z", -2)
            .add(&LaurentPoly::var_pow("z", -4).scale(&ExactScalar::param("Q")));
        assert_eq!(s.to_poly(), expected);
    }

    #[test]
    fn z_inverse_coefficient_from_multiplied_expansion() {
        // Q z^-1 / (z^2 - Q): coefficient of z^-1 is -1
        let num = qpoly().mul(&LaurentPoly::var_pow("z", -1));
        let r = RatFunc::new(num, LaurentPoly::var_pow("z", 2).sub(&qpoly())).unwrap();
        let c = r.residue_at_zero("z").unwrap();
        assert_eq!(c, LaurentPoly::from_int(-1));
    }

    #[test]
    fn reduction_is_idempotent() {
        // (z^2 - 1)/(z - 1) reduces to z + 1
        let num = LaurentPoly::var_pow("z", 2).sub(&LaurentPoly::one());
        let den = z().sub(&LaurentPoly::one());
        let r = RatFunc::new(num, den).unwrap();
        assert_eq!(r.den(), &LaurentPoly::one());
        assert_eq!(r.num(), &z().add(&LaurentPoly::one()));
        let r2 = RatFunc::new(r.num().clone(), r.den().clone()).unwrap();
        assert_eq!(r, r2);
    }

    #[test]
    fn non_invertible_leading_reports_error() {
        // 1/((1+Q) z) has multi-term leading coefficient 1+Q
        let den = z().scale(&ExactScalar::param("Q").add(&ExactScalar::one()));
        let r = RatFunc::new(LaurentPoly::one(), den).unwrap();
        // after reduction the scalar normalization cannot invert 1+Q, so the
        // expansion must fail
        assert!(r.laurent_expand("z", ExpandAt::Zero, 0).is_err() || {
            // unless reduction salvaged it (it cannot: 1+Q is not a unit)
            false
        });
    }

    #[test]
    fn total_residue_of_eta01_integrand() {
        // Q z^-1 / (z - Q z^-1) * z^-1 -> total residue 1
        let theta_f = z().sub(&qpoly().mul(&LaurentPoly::var_pow("z", -1)));
        let num = qpoly().mul(&LaurentPoly::var_pow("z", -2));
        let r = RatFunc::new(num, theta_f).unwrap();
        assert_eq!(r.total_residue("z").unwrap(), ExactScalar::one());
    }

    #[test]
    fn total_residue_of_eta00_integrand() {
        // 1 / (z - Q z^-1) * z^-1 -> 0
        let theta_f = z().sub(&qpoly().mul(&LaurentPoly::var_pow("z", -1)));
        let r = RatFunc::new(LaurentPoly::var_pow("z", -1), theta_f).unwrap();
        assert_eq!(r.total_residue("z").unwrap(), ExactScalar::zero());
    }

    #[test]
    fn k1_integrand_vanishes() {
        // Q z^-1 / (z - Q z^-1)^2 * z^-1 -> 0
        let theta_f = z().sub(&qpoly().mul(&LaurentPoly::var_pow("z", -1)));
        let num = qpoly().mul(&LaurentPoly::var_pow("z", -2));
        let r = RatFunc::new(num, theta_f.pow(2)).unwrap();
        assert_eq!(r.total_residue("z").unwrap(), ExactScalar::zero());
    }
}
