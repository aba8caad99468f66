//! Multivariate Laurent polynomials over exact scalars.
//!
//! Variables are named and kept in sorted order; exponent vectors are
//! integers, negatives allowed. Terms map exponent vectors to `ExactScalar`
//! coefficients with no zero coefficients stored, so equality is structural.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::PrimformError;
use crate::scalar::ExactScalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    /// Sorted variable names.
    vars: Vec<String>,
    /// Exponent vector (aligned with `vars`) -> coefficient.
    terms: BTreeMap<Vec<i64>, ExactScalar>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly {
            vars: Vec::new(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        LaurentPoly::constant(ExactScalar::one())
    }

    pub fn constant(c: ExactScalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        LaurentPoly {
            vars: Vec::new(),
            terms,
        }
    }

    pub fn from_int(n: i64) -> Self {
        LaurentPoly::constant(ExactScalar::from_int(n))
    }

    /// The variable `name` to the first power.
    pub fn var(name: &str) -> Self {
        LaurentPoly::var_pow(name, 1)
    }

    pub fn var_pow(name: &str, e: i64) -> Self {
        if e == 0 {
            return LaurentPoly::one();
        }
        let mut terms = BTreeMap::new();
        terms.insert(vec![e], ExactScalar::one());
        LaurentPoly {
            vars: vec![name.to_string()],
            terms,
        }
    }

    pub fn monomial(vars: &[(&str, i64)], c: ExactScalar) -> Self {
        let mut p = LaurentPoly::constant(c);
        for (v, e) in vars {
            p = p.mul(&LaurentPoly::var_pow(v, *e));
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True when every exponent is nonnegative.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x >= 0))
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    fn normalize(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
        // Drop variables that no longer occur.
        if self.terms.is_empty() {
            self.vars.clear();
            return;
        }
        let used: Vec<bool> = (0..self.vars.len())
            .map(|i| self.terms.keys().any(|e| e[i] != 0))
            .collect();
        if used.iter().all(|&u| u) {
            return;
        }
        let keep: Vec<usize> = (0..self.vars.len()).filter(|&i| used[i]).collect();
        self.vars = keep.iter().map(|&i| self.vars[i].clone()).collect();
        self.terms = std::mem::take(&mut self.terms)
            .into_iter()
            .map(|(e, c)| (keep.iter().map(|&i| e[i]).collect(), c))
            .collect();
    }

    /// Re-express both polynomials over the union of their variable lists.
    fn aligned(&self, other: &Self) -> (Vec<String>, Vec<(Vec<i64>, ExactScalar)>, Vec<(Vec<i64>, ExactScalar)>) {
        let mut names: BTreeSet<String> = self.vars.iter().cloned().collect();
        names.extend(other.vars.iter().cloned());
        let vars: Vec<String> = names.into_iter().collect();
        let map_terms = |p: &LaurentPoly| -> Vec<(Vec<i64>, ExactScalar)> {
            let idx: Vec<usize> = p
                .vars
                .iter()
                .map(|v| vars.iter().position(|w| w == v).unwrap())
                .collect();
            p.terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = vec![0i64; vars.len()];
                    for (j, &exp) in e.iter().enumerate() {
                        e2[idx[j]] = exp;
                    }
                    (e2, c.clone())
                })
                .collect()
        };
        (vars.clone(), map_terms(self), map_terms(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (vars, a, b) = self.aligned(other);
        let mut terms: BTreeMap<Vec<i64>, ExactScalar> = BTreeMap::new();
        for (e, c) in a.into_iter().chain(b) {
            let entry = terms.entry(e).or_insert_with(ExactScalar::zero);
            *entry = entry.add(&c);
        }
        let mut out = LaurentPoly { vars, terms };
        out.normalize();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return LaurentPoly::zero();
        }
        let (vars, a, b) = self.aligned(other);
        let mut terms: BTreeMap<Vec<i64>, ExactScalar> = BTreeMap::new();
        for (e1, c1) in &a {
            for (e2, c2) in &b {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                let c = c1.mul(c2);
                let entry = terms.entry(e).or_insert_with(ExactScalar::zero);
                *entry = entry.add(&c);
            }
        }
        let mut out = LaurentPoly { vars, terms };
        out.normalize();
        out
    }

    pub fn scale(&self, c: &ExactScalar) -> Self {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        let mut out = LaurentPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.clone(), k.mul(c)))
                .collect(),
        };
        out.normalize();
        out
    }

    pub fn scale_rat(&self, r: &BigRational) -> Self {
        self.scale(&ExactScalar::from_rational(r.clone()))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = LaurentPoly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Iterate terms as (sparse exponent map, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (BTreeMap<String, i64>, &ExactScalar)> {
        self.terms.iter().map(move |(e, c)| {
            let m: BTreeMap<String, i64> = self
                .vars
                .iter()
                .zip(e)
                .filter(|(_, &x)| x != 0)
                .map(|(v, &x)| (v.clone(), x))
                .collect();
            (m, c)
        })
    }

    /// Coefficient of a sparse monomial.
    pub fn coeff(&self, mono: &BTreeMap<String, i64>) -> ExactScalar {
        for (e, c) in &self.terms {
            let matches = self.vars.iter().zip(e).all(|(v, &x)| mono.get(v).copied().unwrap_or(0) == x)
                && mono
                    .iter()
                    .all(|(v, &x)| x == 0 || self.var_index(v).map_or(false, |i| e[i] == x));
            if matches {
                return c.clone();
            }
        }
        ExactScalar::zero()
    }

    /// The constant term (all exponents zero).
    pub fn constant_term(&self) -> ExactScalar {
        self.coeff(&BTreeMap::new())
    }

    /// Partial derivative with respect to a variable. Parameters listed in
    /// `exp_params` stand for exponentials of variables: a pair
    /// `(param, var)` contributes `param * d/d(param)` to `d/d(var)`.
    pub fn derivative(&self, var: &str, exp_params: &[(String, String)]) -> Self {
        let mut out = LaurentPoly::zero();
        // Ordinary polynomial part.
        if let Some(i) = self.var_index(var) {
            let mut terms: BTreeMap<Vec<i64>, ExactScalar> = BTreeMap::new();
            for (e, c) in &self.terms {
                let k = e[i];
                if k == 0 {
                    continue;
                }
                let mut e2 = e.clone();
                e2[i] -= 1;
                let c2 = c.scale(&BigRational::from_integer(BigInt::from(k)));
                let entry = terms.entry(e2).or_insert_with(ExactScalar::zero);
                *entry = entry.add(&c2);
            }
            let mut p = LaurentPoly {
                vars: self.vars.clone(),
                terms,
            };
            p.normalize();
            out = out.add(&p);
        }
        // Exponential-parameter chain rule.
        for (param, v) in exp_params {
            if v != var {
                continue;
            }
            let mut terms: BTreeMap<Vec<i64>, ExactScalar> = BTreeMap::new();
            for (e, c) in &self.terms {
                let c2 = c.exp_scale_derivative(param);
                if c2.is_zero() {
                    continue;
                }
                let entry = terms.entry(e.clone()).or_insert_with(ExactScalar::zero);
                *entry = entry.add(&c2);
            }
            let mut p = LaurentPoly {
                vars: self.vars.clone(),
                terms,
            };
            p.normalize();
            out = out.add(&p);
        }
        out
    }

    /// The logarithmic derivative `theta = var * d/d(var)`: `z^k -> k z^k`.
    pub fn log_derivative(&self, var: &str) -> Self {
        let Some(i) = self.var_index(var) else {
            return LaurentPoly::zero();
        };
        let mut terms: BTreeMap<Vec<i64>, ExactScalar> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = e[i];
            if k == 0 {
                continue;
            }
            terms.insert(e.clone(), c.scale(&BigRational::from_integer(BigInt::from(k))));
        }
        let mut p = LaurentPoly {
            vars: self.vars.clone(),
            terms,
        };
        p.normalize();
        p
    }

    /// Termwise antiderivative of the logarithmic derivative: `z^k -> z^k / k`.
    /// Errors when a `z^0` term is present (the log obstruction).
    pub fn log_antiderivative(&self, var: &str) -> Result<Self, PrimformError> {
        let i = match self.var_index(var) {
            Some(i) => i,
            None => {
                if self.is_zero() {
                    return Ok(LaurentPoly::zero());
                }
                return Err(PrimformError::LogObstruction(self.to_string()));
            }
        };
        let mut terms: BTreeMap<Vec<i64>, ExactScalar> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = e[i];
            if k == 0 {
                return Err(PrimformError::LogObstruction(c.to_string()));
            }
            terms.insert(
                e.clone(),
                c.scale(&BigRational::new(BigInt::one(), BigInt::from(k))),
            );
        }
        let mut p = LaurentPoly {
            vars: self.vars.clone(),
            terms,
        };
        p.normalize();
        Ok(p)
    }

    /// Termwise antiderivative in `var`: `z^k -> z^{k+1}/(k+1)`; errors on `z^{-1}`.
    pub fn antiderivative(&self, var: &str) -> Result<Self, PrimformError> {
        if self.is_zero() {
            return Ok(LaurentPoly::zero());
        }
        let mut p = self.clone();
        if p.var_index(var).is_none() {
            p = p.mul(&LaurentPoly::var_pow(var, 0).add(&LaurentPoly::zero()));
            // var_pow with exponent 0 is 1; force the variable in:
            p = inject_var(&p, var);
        }
        let i = p.var_index(var).unwrap();
        let mut terms: BTreeMap<Vec<i64>, ExactScalar> = BTreeMap::new();
        for (e, c) in &p.terms {
            let k = e[i];
            if k == -1 {
                return Err(PrimformError::LogObstruction(c.to_string()));
            }
            let mut e2 = e.clone();
            e2[i] += 1;
            terms.insert(
                e2,
                c.scale(&BigRational::new(BigInt::one(), BigInt::from(k + 1))),
            );
        }
        let mut out = LaurentPoly { vars: p.vars, terms };
        out.normalize();
        Ok(out)
    }

    /// Substitute a variable by a whole polynomial.
    pub fn subst(&self, var: &str, value: &LaurentPoly) -> Result<Self, PrimformError> {
        let Some(i) = self.var_index(var) else {
            return Ok(self.clone());
        };
        let mut out = LaurentPoly::zero();
        let value_inv = {
            // Only needed when negative powers of var occur.
            let needs = self.terms.keys().any(|e| e[i] < 0);
            if needs {
                Some(value.inv_if_unit()?)
            } else {
                None
            }
        };
        for (e, c) in &self.terms {
            let k = e[i];
            let mut rest_vars: Vec<String> = Vec::new();
            let mut rest_exp: Vec<i64> = Vec::new();
            for (j, v) in self.vars.iter().enumerate() {
                if j != i && e[j] != 0 {
                    rest_vars.push(v.clone());
                    rest_exp.push(e[j]);
                }
            }
            let mut term = LaurentPoly::constant(c.clone());
            for (v, x) in rest_vars.iter().zip(&rest_exp) {
                term = term.mul(&LaurentPoly::var_pow(v, *x));
            }
            let factor = if k >= 0 {
                value.pow(k as u32)
            } else {
                value_inv.as_ref().unwrap().pow((-k) as u32)
            };
            out = out.add(&term.mul(&factor));
        }
        Ok(out)
    }

    /// Inverse of a single-term polynomial (a unit of the Laurent ring).
    pub fn inv_if_unit(&self) -> Result<Self, PrimformError> {
        if self.terms.len() != 1 {
            return Err(PrimformError::NonInvertibleLeading(self.to_string()));
        }
        let (e, c) = self.terms.iter().next().unwrap();
        let cinv = c.inv()?;
        let e2: Vec<i64> = e.iter().map(|x| -x).collect();
        let mut terms = BTreeMap::new();
        terms.insert(e2, cinv);
        let mut out = LaurentPoly {
            vars: self.vars.clone(),
            terms,
        };
        out.normalize();
        Ok(out)
    }

    /// Substitute a variable by a scalar, exactly.
    pub fn subst_scalar(&self, var: &str, value: &ExactScalar) -> Result<Self, PrimformError> {
        let Some(i) = self.var_index(var) else {
            return Ok(self.clone());
        };
        let needs_inv = self.terms.keys().any(|e| e[i] < 0);
        let vinv = if needs_inv { Some(value.inv()?) } else { None };
        let mut out = LaurentPoly::zero();
        for (e, c) in &self.terms {
            let k = e[i];
            let factor = if k >= 0 {
                value.pow(k as u32)
            } else {
                vinv.as_ref().unwrap().pow((-k) as u32)
            };
            let mut term_vars = Vec::new();
            for (j, v) in self.vars.iter().enumerate() {
                if j != i && e[j] != 0 {
                    term_vars.push((v.as_str(), e[j]));
                }
            }
            out = out.add(&LaurentPoly::monomial(&term_vars, c.mul(&factor)));
        }
        Ok(out)
    }

    /// Group terms by the exponent of one variable: exponent -> coefficient
    /// polynomial in the remaining variables.
    pub fn coeffs_in(&self, var: &str) -> BTreeMap<i64, LaurentPoly> {
        let mut out: BTreeMap<i64, LaurentPoly> = BTreeMap::new();
        let Some(i) = self.var_index(var) else {
            if !self.is_zero() {
                out.insert(0, self.clone());
            }
            return out;
        };
        for (e, c) in &self.terms {
            let k = e[i];
            let mut term_vars = Vec::new();
            for (j, v) in self.vars.iter().enumerate() {
                if j != i && e[j] != 0 {
                    term_vars.push((v.as_str(), e[j]));
                }
            }
            let t = LaurentPoly::monomial(&term_vars, c.clone());
            let entry = out.entry(k).or_insert_with(LaurentPoly::zero);
            *entry = entry.add(&t);
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Lowest/highest exponent of `var` among terms.
    pub fn degree_range(&self, var: &str) -> Option<(i64, i64)> {
        let i = self.var_index(var)?;
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for e in self.terms.keys() {
            lo = lo.min(e[i]);
            hi = hi.max(e[i]);
        }
        if lo == i64::MAX {
            None
        } else {
            Some((lo, hi))
        }
    }

    /// Multiply by `var^k`.
    pub fn shift(&self, var: &str, k: i64) -> Self {
        self.mul(&LaurentPoly::var_pow(var, k))
    }

    /// Exact division in the Laurent ring, treating `var` as the main
    /// variable (coefficients may involve other variables). Both sides are
    /// polynomialized in `var`, divided, and the quotient shifted back; the
    /// division is exact iff the polynomial remainder vanishes. The divisor's
    /// leading coefficient in `var` must be a unit.
    pub fn exact_div(&self, divisor: &Self, var: &str) -> Result<Self, PrimformError> {
        if divisor.is_zero() {
            return Err(PrimformError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(LaurentPoly::zero());
        }
        let (dlo, _) = divisor.degree_range(var).unwrap_or((0, 0));
        let (nlo, _) = self.degree_range(var).unwrap_or((0, 0));
        let num = self.shift(var, -nlo);
        let den = divisor.shift(var, -dlo);
        let (q, r) = poly_div_rem(&num, &den, var)?;
        if !r.is_zero() {
            return Err(PrimformError::InexactDivision(format!(
                "remainder {} dividing by {}",
                r, divisor
            )));
        }
        Ok(q.shift(var, nlo - dlo))
    }

    /// Evaluate with every variable and parameter set to a rational.
    pub fn eval_rational(&self, values: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut term = c.eval_rational(values)?;
            for (j, v) in self.vars.iter().enumerate() {
                let x = values.get(v)?;
                let mut p = BigRational::one();
                for _ in 0..e[j].unsigned_abs() {
                    p *= x;
                }
                if e[j] < 0 {
                    p = p.recip();
                }
                term *= p;
            }
            acc += term;
        }
        Some(acc)
    }

    /// Apply a scalar-level map to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&ExactScalar) -> ExactScalar) -> Self {
        let mut out = LaurentPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), f(c)))
                .collect(),
        };
        out.normalize();
        out
    }

    /// Total degree in the listed variables of each term must satisfy the
    /// predicate for the term to be kept.
    pub fn filter_total_degree(&self, vars: &[String], keep: impl Fn(i64) -> bool) -> Self {
        let idx: Vec<Option<usize>> = vars.iter().map(|v| self.var_index(v)).collect();
        let mut out = LaurentPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| {
                    let d: i64 = idx.iter().filter_map(|i| i.map(|i| e[i])).sum();
                    keep(d)
                })
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        };
        out.normalize();
        out
    }
}

impl LaurentPoly {
    /// Division with remainder in the Laurent ring: `self = q * divisor + r`
    /// where the polynomialization of `r` in `var` has degree below the
    /// divisor's. Deterministic, so it yields canonical decompositions.
    pub fn div_rem_in(
        &self,
        divisor: &Self,
        var: &str,
    ) -> Result<(Self, Self), PrimformError> {
        if divisor.is_zero() {
            return Err(PrimformError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok((LaurentPoly::zero(), LaurentPoly::zero()));
        }
        let (dlo, _) = divisor.degree_range(var).unwrap_or((0, 0));
        let (nlo, _) = self.degree_range(var).unwrap_or((0, 0));
        let num = self.shift(var, -nlo);
        let den = divisor.shift(var, -dlo);
        let (q0, r0) = poly_div_rem(&num, &den, var)?;
        Ok((q0.shift(var, nlo - dlo), r0.shift(var, nlo)))
    }
}

/// Long division of polynomials (in `var`) with multivariate coefficients.
fn poly_div_rem(
    num: &LaurentPoly,
    den: &LaurentPoly,
    var: &str,
) -> Result<(LaurentPoly, LaurentPoly), PrimformError> {
    let den_deg = den.degree_range(var).map(|(_, hi)| hi).unwrap_or(0);
    let den_coeffs = den.coeffs_in(var);
    let lead = den_coeffs
        .get(&den_deg)
        .cloned()
        .ok_or_else(|| PrimformError::InexactDivision("missing leading term".into()))?;
    let lead_inv = lead.inv_if_unit().map_err(|_| {
        PrimformError::NonInvertibleLeading(format!("leading coefficient {}", lead))
    })?;
    let mut rem = num.clone();
    let mut quot = LaurentPoly::zero();
    loop {
        let Some((_, rhi)) = rem.degree_range(var) else {
            if rem.is_zero() {
                break;
            }
            // rem is var-free
            if den_deg == 0 {
                quot = quot.add(&rem.mul(&lead_inv));
                rem = LaurentPoly::zero();
            }
            break;
        };
        if rhi < den_deg {
            break;
        }
        let rc = rem.coeffs_in(var);
        let Some(rlead) = rc.get(&rhi) else { break };
        let factor = rlead.mul(&lead_inv).shift(var, rhi - den_deg);
        quot = quot.add(&factor);
        rem = rem.sub(&factor.mul(&den));
        if let Some((_, new_hi)) = rem.degree_range(var) {
            if new_hi >= rhi && !rem.is_zero() {
                return Err(PrimformError::InexactDivision(
                    "division does not reduce degree".into(),
                ));
            }
        }
    }
    Ok((quot, rem))
}

fn inject_var(p: &LaurentPoly, var: &str) -> LaurentPoly {
    // Multiply by var^0 won't add the variable; rebuild explicitly.
    let mut vars: Vec<String> = p.vars.clone();
    if vars.iter().any(|v| v == var) {
        return p.clone();
    }
    vars.push(var.to_string());
    vars.sort();
    let pos = vars.iter().position(|v| v == var).unwrap();
    let terms = p
        .terms
        .iter()
        .map(|(e, c)| {
            let mut e2 = e.clone();
            e2.insert(pos, 0);
            (e2, c.clone())
        })
        .collect();
    LaurentPoly { vars, terms }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = self
                .vars
                .iter()
                .zip(e)
                .filter(|(_, &x)| x != 0)
                .map(|(v, &x)| if x == 1 { v.clone() } else { format!("{}^{}", v, x) })
                .collect();
            if mono.is_empty() {
                write!(f, "({})", c)?;
            } else {
                write!(f, "({})*{}", c, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> LaurentPoly {
        LaurentPoly::var("z")
    }

    fn zinv() -> LaurentPoly {
        LaurentPoly::var_pow("z", -1)
    }

    fn param_q() -> LaurentPoly {
        LaurentPoly::constant(ExactScalar::param("q"))
    }

    #[test]
    fn difference_of_squares() {
        // (z + Q z^-1)(z - Q z^-1) = z^2 - Q^2 z^-2
        let qq = param_q();
        let a = z().add(&qq.mul(&zinv()));
        let b = z().sub(&qq.mul(&zinv()));
        let prod = a.mul(&b);
        let expected = LaurentPoly::var_pow("z", 2)
            .sub(&qq.mul(&qq).mul(&LaurentPoly::var_pow("z", -2)));
        assert_eq!(prod, expected);
    }

    #[test]
    fn exponent_cancellation() {
        assert_eq!(z().mul(&zinv()), LaurentPoly::one());
    }

    #[test]
    fn like_term_merge() {
        assert_eq!(z().add(&z()), z().scale(&ExactScalar::from_int(2)));
    }

    #[test]
    fn theta_termwise() {
        // theta(z + Q z^-1) = z - Q z^-1
        let qq = param_q();
        let p = z().add(&qq.mul(&zinv()));
        assert_eq!(p.log_derivative("z"), z().sub(&qq.mul(&zinv())));
        // theta of a constant is 0
        assert!(param_q().log_derivative("z").is_zero());
        // theta(z^3) = 3 z^3
        assert_eq!(
            LaurentPoly::var_pow("z", 3).log_derivative("z"),
            LaurentPoly::var_pow("z", 3).scale(&ExactScalar::from_int(3))
        );
    }

    #[test]
    fn exact_division_by_laurent() {
        // (z^2 - Q) / (z - Q z^-1) = z
        let qq = param_q();
        let num = LaurentPoly::var_pow("z", 2).sub(&qq);
        let den = z().sub(&qq.mul(&zinv()));
        assert_eq!(num.exact_div(&den, "z").unwrap(), z());
    }

    #[test]
    fn inexact_division_reports_error() {
        let num = LaurentPoly::var_pow("z", 2).add(&LaurentPoly::one());
        let den = z();
        // z^2 + 1 is divisible by z in the Laurent ring: (z^2+1)/z = z + z^-1.
        assert_eq!(num.exact_div(&den, "z").unwrap(), z().add(&zinv()));
        // but not by (z - 1) exactly... z^2+1 = (z+1)(z-1) + 2
        let den2 = z().sub(&LaurentPoly::one());
        assert!(num.exact_div(&den2, "z").is_err());
    }

    #[test]
    fn derivative_with_exp_param() {
        // d/dt1 of (q E1 z^-1) = q E1 z^-1 when E1 = exp(t1)
        let qe = ExactScalar::param("q").mul(&ExactScalar::param("E1"));
        let p = LaurentPoly::constant(qe).mul(&zinv());
        let chain = vec![("E1".to_string(), "t1".to_string())];
        assert_eq!(p.derivative("t1", &chain), p);
    }
}
