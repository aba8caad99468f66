//! Exact coefficient scalars: rationals dressed with formal parameter monomials.
//!
//! A scalar is a finite sum of terms `c · p1^{e1} · p2^{e2} · ...` where `c`
//! is an arbitrary-precision rational and the `pi` are named formal parameters
//! (e.g. `q`, or `E1` standing for `exp(t^1)`) with integer (possibly
//! negative) exponents. Optionally a square root `s` may be adjoined with a
//! defining relation `s^2 = P` for a parameter monomial `P`; any `s`-exponent
//! of 2 or more is rewritten away, so normal forms carry `s^0` or `s^1` only.
//!
//! All arithmetic is exact. Equal scalars compare equal after normalization.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::PrimformError;

/// A monomial in the formal parameters: name -> integer exponent.
///
/// No zero exponents are stored, so the map itself is a normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ParamMono(pub BTreeMap<String, i64>);

impl ParamMono {
    pub fn one() -> Self {
        ParamMono(BTreeMap::new())
    }

    pub fn var(name: &str) -> Self {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), 1);
        ParamMono(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, name: &str) -> i64 {
        self.0.get(name).copied().unwrap_or(0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m = self.0.clone();
        for (k, v) in &other.0 {
            let e = m.entry(k.clone()).or_insert(0);
            *e += v;
            if *e == 0 {
                m.remove(k);
            }
        }
        ParamMono(m)
    }

    pub fn inv(&self) -> Self {
        ParamMono(self.0.iter().map(|(k, v)| (k.clone(), -v)).collect())
    }

    pub fn pow(&self, n: i64) -> Self {
        if n == 0 {
            return ParamMono::one();
        }
        ParamMono(
            self.0
                .iter()
                .map(|(k, v)| (k.clone(), v * n))
                .filter(|(_, v)| *v != 0)
                .collect(),
        )
    }
}

impl fmt::Display for ParamMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| {
                if *v == 1 {
                    k.clone()
                } else {
                    format!("{}^{}", k, v)
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// The adjoined square root, with its defining relation `name^2 = square`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjoinedRoot {
    pub name: String,
    pub square: ParamMono,
}

/// An exact scalar: a sum of parameter monomials with rational coefficients,
/// possibly living in a quadratic extension by `root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactScalar {
    terms: BTreeMap<ParamMono, BigRational>,
    root: Option<AdjoinedRoot>,
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar {
            terms: BTreeMap::new(),
            root: None,
        }
    }

    pub fn one() -> Self {
        ExactScalar::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(ParamMono::one(), r);
        }
        ExactScalar { terms, root: None }
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        ExactScalar::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// A single formal parameter, e.g. `q` or `E1`.
    pub fn param(name: &str) -> Self {
        ExactScalar::monomial(ParamMono::var(name), BigRational::one())
    }

    pub fn monomial(m: ParamMono, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ExactScalar { terms, root: None }
    }

    /// Adjoin a root named `name` with `name^2 = square` to this scalar's field.
    pub fn with_root(mut self, name: &str, square: ParamMono) -> Self {
        self.root = Some(AdjoinedRoot {
            name: name.to_string(),
            square,
        });
        self.reduce_root();
        self
    }

    /// The root generator itself (e.g. `s` with `s^2 = q*E1`).
    pub fn root_gen(name: &str, square: ParamMono) -> Self {
        ExactScalar::monomial(ParamMono::var(name), BigRational::one()).with_root(name, square)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&ParamMono::one())
                .map_or(false, |c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ParamMono, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The rational coefficient of the trivial monomial.
    pub fn rational_part(&self) -> BigRational {
        self.terms
            .get(&ParamMono::one())
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Interpret as a plain rational; None when parameters are present.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&ParamMono::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn unify_root(a: &ExactScalar, b: &ExactScalar) -> Option<AdjoinedRoot> {
        match (&a.root, &b.root) {
            (None, None) => None,
            (Some(r), None) | (None, Some(r)) => Some(r.clone()),
            (Some(r1), Some(r2)) => {
                assert_eq!(r1, r2, "mismatched adjoined roots");
                Some(r1.clone())
            }
        }
    }

    /// Rewrite every s-exponent >= 2 via s^2 = P.
    fn reduce_root(&mut self) {
        let Some(root) = self.root.clone() else {
            return;
        };
        let mut out: BTreeMap<ParamMono, BigRational> = BTreeMap::new();
        for (m, c) in std::mem::take(&mut self.terms) {
            let e = m.exponent(&root.name);
            // Normalize s-exponent into {0, 1}. Negative exponents use
            // s^{-1} = s / P.
            let (k, rem) = if e >= 0 { (e / 2, e % 2) } else {
                // e = 2k + rem with rem in {0,1}
                let rem = e.rem_euclid(2);
                ((e - rem) / 2, rem)
            };
            let mut m2 = m.clone();
            if k != 0 {
                m2.0.remove(&root.name);
                if rem != 0 {
                    m2.0.insert(root.name.clone(), rem);
                }
                m2 = m2.mul(&root.square.pow(k));
            }
            let entry = out.entry(m2).or_insert_with(BigRational::zero);
            *entry += c;
        }
        out.retain(|_, c| !c.is_zero());
        self.terms = out;
    }

    pub fn add(&self, other: &Self) -> Self {
        let root = Self::unify_root(self, other);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms.entry(m.clone()).or_insert_with(BigRational::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        ExactScalar { terms, root }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ExactScalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
            root: self.root.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let root = Self::unify_root(self, other);
        let mut terms: BTreeMap<ParamMono, BigRational> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                let c = c1 * c2;
                let entry = terms.entry(m).or_insert_with(BigRational::zero);
                *entry += c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        let mut out = ExactScalar { terms, root };
        out.reduce_root();
        out
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return ExactScalar {
                terms: BTreeMap::new(),
                root: self.root.clone(),
            };
        }
        ExactScalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
            root: self.root.clone(),
        }
    }

    /// True when the scalar is a single term (unit in the monomial group,
    /// possibly times the root generator).
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1
    }

    /// Exact inverse of a single-term scalar. Multi-term scalars are not
    /// invertible in this representation and yield a structured error.
    pub fn inv(&self) -> Result<Self, PrimformError> {
        if self.terms.len() != 1 {
            return Err(PrimformError::NonInvertibleScalar(self.to_string()));
        }
        let (m, c) = self.terms.iter().next().unwrap();
        let cinv = c.recip();
        match &self.root {
            Some(root) if m.exponent(&root.name) != 0 => {
                // (c * m0 * s)^{-1} = s / (c * m0 * P)
                let e = m.exponent(&root.name);
                debug_assert_eq!(e, 1);
                let mut m0 = m.clone();
                m0.0.remove(&root.name);
                let minv = m0.inv().mul(&root.square.inv()).mul(&ParamMono::var(&root.name));
                let mut out = ExactScalar::monomial(minv, cinv);
                out.root = self.root.clone();
                out.reduce_root();
                Ok(out)
            }
            _ => {
                let mut out = ExactScalar::monomial(m.inv(), cinv);
                out.root = self.root.clone();
                Ok(out)
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PrimformError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = ExactScalar::one();
        out.root = self.root.clone();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Multiply each term by its exponent of `param` (the chain rule for a
    /// parameter standing for an exponential of a variable).
    pub fn exp_scale_derivative(&self, param: &str) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let e = m.exponent(param);
                if e == 0 {
                    None
                } else {
                    Some((m.clone(), c * BigRational::from_integer(BigInt::from(e))))
                }
            })
            .collect();
        ExactScalar {
            terms,
            root: self.root.clone(),
        }
    }

    /// Substitute `param -> 1` (e.g. evaluate `E1 = exp(t^1)` at `t^1 = 0`).
    pub fn eval_param_one(&self, param: &str) -> Self {
        let mut out = ExactScalar {
            terms: BTreeMap::new(),
            root: self.root.clone(),
        };
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            m2.0.remove(param);
            let t = ExactScalar::monomial(m2, c.clone());
            out = out.add(&t);
        }
        out
    }

    /// Substitute a parameter by a scalar value, exactly.
    pub fn subst_param(&self, param: &str, value: &ExactScalar) -> Result<Self, PrimformError> {
        let mut out = ExactScalar::zero();
        out.root = Self::unify_root(self, value);
        for (m, c) in &self.terms {
            let e = m.exponent(param);
            let mut m2 = m.clone();
            m2.0.remove(param);
            let base = ExactScalar {
                terms: BTreeMap::from([(m2, c.clone())]),
                root: out.root.clone(),
            };
            let factor = if e >= 0 {
                value.pow(e as u32)
            } else {
                value.inv()?.pow((-e) as u32)
            };
            out = out.add(&base.mul(&factor));
        }
        Ok(out)
    }

    /// The exponent of `param` shared by all terms, if uniform.
    pub fn uniform_exponent(&self, param: &str) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| m.exponent(param));
        let first = it.next()?;
        if it.all(|e| e == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Decompose into (exponent of `param`) -> scalar with that power removed.
    pub fn split_by_param(&self, param: &str) -> BTreeMap<i64, ExactScalar> {
        let mut out: BTreeMap<i64, ExactScalar> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(param);
            let mut m2 = m.clone();
            m2.0.remove(param);
            let t = ExactScalar::monomial(m2, c.clone());
            let entry = out.entry(e).or_insert_with(ExactScalar::zero);
            *entry = entry.add(&t);
        }
        out
    }

    /// Numeric evaluation with all parameters set to given rationals.
    pub fn eval_rational(&self, values: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (name, e) in &m.0 {
                let v = values.get(name)?;
                let mut p = BigRational::one();
                for _ in 0..e.unsigned_abs() {
                    p *= v;
                }
                if *e < 0 {
                    p = p.recip();
                }
                term *= p;
            }
            acc += term;
        }
        Some(acc)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", abs)?;
            } else if abs.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", abs, m)?;
            }
        }
        Ok(())
    }
}
