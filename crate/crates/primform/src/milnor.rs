//! Milnor (Jacobian, chiral) rings: monomial bases, normal forms, the
//! Grothendieck residue functional, and the K0 residue pairing.
//!
//! Quotients are presented by a terminating rewrite on leading monomials in
//! weighted-degree order. Quasi-homogeneous one-variable families and
//! monomial ideals (the in-scope multivariate cases) admit such a rewrite
//! without general Groebner machinery. Laurent-kind rings additionally carry
//! a derived rule for the inverse variable, so every Laurent monomial has a
//! normal form on the finite basis.

use num_rational::BigRational;
use std::collections::BTreeMap;

use crate::error::PrimformError;
use crate::lg::{LGSystem, LgKind};
use crate::poly::LaurentPoly;
use crate::ratfunc::RatFunc;
use crate::scalar::ExactScalar;

/// Iteration bound for the rewrite loop; exceeding it signals a
/// non-isolated singularity (or an ideal outside the supported class).
const REWRITE_BOUND: usize = 20_000;

#[derive(Clone, Debug)]
struct RewriteRule {
    /// Leading monomial over the fiber variables; exponents may be negative
    /// only for the derived inverse rule of Laurent kind.
    lhs: BTreeMap<String, i64>,
    /// Replacement polynomial (coefficients may involve parameters and
    /// deformation variables).
    rhs: LaurentPoly,
}

impl RewriteRule {
    /// Does `mono` contain `lhs` (componentwise, respecting sign)?
    fn divides(&self, mono: &BTreeMap<String, i64>) -> bool {
        self.lhs.iter().all(|(v, &e)| {
            let m = mono.get(v).copied().unwrap_or(0);
            if e >= 0 {
                m >= e
            } else {
                m <= e
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct MilnorRing {
    /// Fiber variables of the ambient ring.
    pub vars: Vec<String>,
    /// Monomial basis, ordered by ascending weighted degree.
    pub basis: Vec<LaurentPoly>,
    /// Basis as sparse exponent maps, aligned with `basis`.
    basis_monos: Vec<BTreeMap<String, i64>>,
    /// Milnor number.
    pub mu: usize,
    /// Index of the socle (top weighted degree) element in `basis`.
    pub socle_index: usize,
    /// Normalizer making the residue of the Hessian equal mu.
    pub residue_normalizer: ExactScalar,
    rules: Vec<RewriteRule>,
    pub kind: LgKind,
    /// The Jacobian generators that were rewritten away (family level).
    pub generators: Vec<LaurentPoly>,
}

impl MilnorRing {
    /// Build the ring of the deformed family when present, else of `f`.
    pub fn build(lg: &LGSystem) -> Result<Self, PrimformError> {
        if lg.family.is_some() {
            Self::build_family(lg)
        } else {
            Self::build_undeformed(lg)
        }
    }

    /// Ring of the undeformed superpotential.
    pub fn build_undeformed(lg: &LGSystem) -> Result<Self, PrimformError> {
        match lg.kind {
            LgKind::Laurent => {
                let z = lg.fiber_var()?;
                let gen = lg.jacobian_generator_undeformed()?;
                Self::from_laurent_generator(lg, gen, z)
            }
            LgKind::Polynomial => {
                let gens: Vec<LaurentPoly> = lg
                    .vars
                    .iter()
                    .map(|v| lg.f.derivative(v, &[]))
                    .collect();
                Self::from_polynomial_generators(lg, gens)
            }
        }
    }

    fn build_family(lg: &LGSystem) -> Result<Self, PrimformError> {
        let z = lg.fiber_var()?;
        match lg.kind {
            LgKind::Laurent => {
                let gen = lg.jacobian_generator()?;
                Self::from_laurent_generator(lg, gen, z)
            }
            LgKind::Polynomial => {
                let gen = lg.jacobian_generator()?;
                Self::from_polynomial_generators(lg, vec![gen])
            }
        }
    }

    fn from_laurent_generator(
        lg: &LGSystem,
        gen: LaurentPoly,
        z: &str,
    ) -> Result<Self, PrimformError> {
        let (lo, hi) = gen
            .degree_range(z)
            .ok_or_else(|| PrimformError::Unsupported("constant Jacobian generator".into()))?;
        // Polynomialize: p = gen * z^{-lo} has degree d = hi - lo and an
        // invertible constant term (all roots nonzero).
        let p = gen.shift(z, -lo);
        let d = (hi - lo) as usize;
        let coeffs = p.coeffs_in(z);
        let lead = coeffs
            .get(&(d as i64))
            .cloned()
            .ok_or_else(|| PrimformError::Unsupported("missing leading term".into()))?;
        let lead_inv = lead.inv_if_unit()?;
        let c0 = coeffs
            .get(&0)
            .cloned()
            .ok_or_else(|| PrimformError::Unsupported("Jacobian generator has a root at 0".into()))?;
        let c0_inv = c0.inv_if_unit()?;
        // Rule 1: z^d -> -(lower part)/lead.
        let mut lower = LaurentPoly::zero();
        for (k, c) in &coeffs {
            if (*k as usize) < d {
                lower = lower.add(&c.mul(&LaurentPoly::var_pow(z, *k)));
            }
        }
        let rule_top = RewriteRule {
            lhs: BTreeMap::from([(z.to_string(), d as i64)]),
            rhs: lower.neg().mul(&lead_inv),
        };
        // Rule 2: z^-1 -> -(sum_{k>=1} a_k z^{k-1})/a_0.
        let mut upper = LaurentPoly::zero();
        for (k, c) in &coeffs {
            if *k >= 1 {
                upper = upper.add(&c.mul(&LaurentPoly::var_pow(z, *k - 1)));
            }
        }
        let rule_inv = RewriteRule {
            lhs: BTreeMap::from([(z.to_string(), -1)]),
            rhs: upper.neg().mul(&c0_inv),
        };
        let rules = vec![rule_top, rule_inv];
        let basis_monos: Vec<BTreeMap<String, i64>> = (0..d)
            .map(|k| {
                if k == 0 {
                    BTreeMap::new()
                } else {
                    BTreeMap::from([(z.to_string(), k as i64)])
                }
            })
            .collect();
        Self::finish(lg, rules, basis_monos, vec![gen])
    }

    fn from_polynomial_generators(
        lg: &LGSystem,
        gens: Vec<LaurentPoly>,
    ) -> Result<Self, PrimformError> {
        let wmap: BTreeMap<String, BigRational> = lg
            .vars
            .iter()
            .cloned()
            .zip(lg.weights.iter().cloned())
            .collect();
        let fiber_weight = |mono: &BTreeMap<String, i64>| -> BigRational {
            mono.iter()
                .filter_map(|(v, e)| wmap.get(v).map(|w| BigRational::from_integer((*e).into()) * w))
                .sum()
        };
        let mut rules = Vec::new();
        for g in &gens {
            // Leading monomial: top fiber weighted degree, ties by exponent order.
            let mut best: Option<(BigRational, BTreeMap<String, i64>, ExactScalar)> = None;
            for (mono, c) in g.terms() {
                let fiber: BTreeMap<String, i64> = mono
                    .iter()
                    .filter(|(v, _)| wmap.contains_key(*v))
                    .map(|(v, e)| (v.clone(), *e))
                    .collect();
                if fiber.len() != mono.len() {
                    // Term mixes deformation variables; never leading.
                    continue;
                }
                let w = fiber_weight(&fiber);
                let replace = match &best {
                    None => true,
                    Some((bw, bm, _)) => w > *bw || (w == *bw && fiber > *bm),
                };
                if replace {
                    best = Some((w, fiber, c.clone()));
                }
            }
            let (_, lhs, lead) = best.ok_or_else(|| {
                PrimformError::Unsupported("Jacobian generator without fiber leading term".into())
            })?;
            let lead_inv = lead.inv()?;
            let lhs_poly = LaurentPoly::monomial(
                &lhs.iter().map(|(v, e)| (v.as_str(), *e)).collect::<Vec<_>>(),
                lead.clone(),
            );
            let rest = g.sub(&lhs_poly);
            rules.push(RewriteRule {
                lhs,
                rhs: rest.neg().scale(&lead_inv),
            });
        }
        // Enumerate irreducible monomials by ascending total degree.
        let mu_target = lg.mu_expected();
        let mut basis_monos: Vec<BTreeMap<String, i64>> = Vec::new();
        let degree_bound = 64usize;
        let nvars = lg.vars.len();
        for total in 0..=degree_bound {
            let mut found_any = false;
            for combo in compositions(total, nvars) {
                let mono: BTreeMap<String, i64> = lg
                    .vars
                    .iter()
                    .cloned()
                    .zip(combo.iter().map(|&e| e as i64))
                    .filter(|(_, e)| *e != 0)
                    .collect();
                if !rules.iter().any(|r| r.divides(&mono)) {
                    basis_monos.push(mono);
                    found_any = true;
                }
            }
            if !found_any && total > 0 {
                break;
            }
            if let Some(mu) = mu_target {
                if basis_monos.len() > mu {
                    return Err(PrimformError::NonIsolated(basis_monos.len()));
                }
            }
        }
        if let Some(mu) = mu_target {
            if basis_monos.len() != mu {
                return Err(PrimformError::NonIsolated(basis_monos.len()));
            }
        }
        // Sort by weighted degree, then exponent order.
        basis_monos.sort_by(|a, b| {
            let wa = fiber_weight(a);
            let wb = fiber_weight(b);
            wa.cmp(&wb).then(a.cmp(b))
        });
        Self::finish(lg, rules, basis_monos, gens)
    }

    fn finish(
        lg: &LGSystem,
        rules: Vec<RewriteRule>,
        basis_monos: Vec<BTreeMap<String, i64>>,
        generators: Vec<LaurentPoly>,
    ) -> Result<Self, PrimformError> {
        let basis: Vec<LaurentPoly> = basis_monos
            .iter()
            .map(|m| {
                LaurentPoly::monomial(
                    &m.iter().map(|(v, e)| (v.as_str(), *e)).collect::<Vec<_>>(),
                    ExactScalar::one(),
                )
            })
            .collect();
        let mu = basis.len();
        if mu == 0 {
            return Err(PrimformError::NonIsolated(0));
        }
        let socle_index = mu - 1;
        let mut ring = MilnorRing {
            vars: lg.vars.clone(),
            basis,
            basis_monos,
            mu,
            socle_index,
            residue_normalizer: ExactScalar::one(),
            rules,
            kind: lg.kind,
            generators,
        };
        // Normalize the residue so Res(hessian) = mu.
        let hess = ring.hessian(lg)?;
        let nf = ring.normal_form(&hess)?;
        let top = ring.basis_coefficient(&nf, ring.socle_index)?;
        let top_scalar = scalar_of(&top)?;
        if top_scalar.is_zero() {
            return Err(PrimformError::DegenerateGram(
                "hessian has no socle component".into(),
            ));
        }
        ring.residue_normalizer = ExactScalar::from_int(mu as i64).mul(&top_scalar.inv()?);
        Ok(ring)
    }

    /// The Hessian of the (deformed when present) potential: determinant of
    /// second derivatives for polynomial kind, `theta theta F` for Laurent.
    fn hessian(&self, lg: &LGSystem) -> Result<LaurentPoly, PrimformError> {
        let f = match &lg.family {
            Some(fam) => fam.f_family.clone(),
            None => lg.f.clone(),
        };
        match lg.kind {
            LgKind::Laurent => {
                let z = lg.fiber_var()?;
                Ok(f.log_derivative(z).log_derivative(z))
            }
            LgKind::Polynomial => {
                let n = lg.vars.len();
                let mut m = Vec::with_capacity(n * n);
                for a in 0..n {
                    for b in 0..n {
                        m.push(f.derivative(&lg.vars[a], &[]).derivative(&lg.vars[b], &[]));
                    }
                }
                Ok(det_poly(&m, n))
            }
        }
    }

    /// Reduce to the normal form on the basis. Idempotent; kills the
    /// Jacobian ideal.
    pub fn normal_form(&self, g: &LaurentPoly) -> Result<LaurentPoly, PrimformError> {
        let mut current = g.clone();
        for _ in 0..REWRITE_BOUND {
            let mut target: Option<(BTreeMap<String, i64>, ExactScalar, usize)> = None;
            for (mono, c) in current.terms() {
                for (ri, rule) in self.rules.iter().enumerate() {
                    if rule.divides(&mono) {
                        target = Some((mono.clone(), c.clone(), ri));
                        break;
                    }
                }
                if target.is_some() {
                    break;
                }
            }
            let Some((mono, coeff, ri)) = target else {
                return Ok(current);
            };
            let rule = &self.rules[ri];
            // term = coeff * mono = coeff * (mono / lhs) * lhs
            //      -> coeff * (mono / lhs) * rhs
            let mut quotient_vars: Vec<(String, i64)> = Vec::new();
            for (v, e) in &mono {
                let l = rule.lhs.get(v).copied().unwrap_or(0);
                if e - l != 0 {
                    quotient_vars.push((v.clone(), e - l));
                }
            }
            let term = LaurentPoly::monomial(
                &mono.iter().map(|(v, e)| (v.as_str(), *e)).collect::<Vec<_>>(),
                coeff.clone(),
            );
            let replacement = LaurentPoly::monomial(
                &quotient_vars
                    .iter()
                    .map(|(v, e)| (v.as_str(), *e))
                    .collect::<Vec<_>>(),
                coeff,
            )
            .mul(&rule.rhs);
            current = current.sub(&term).add(&replacement);
        }
        Err(PrimformError::NonIsolated(REWRITE_BOUND))
    }

    /// Coefficient of the `i`-th basis monomial in an already-reduced
    /// polynomial (a polynomial in deformation variables and parameters).
    pub fn basis_coefficient(
        &self,
        reduced: &LaurentPoly,
        i: usize,
    ) -> Result<LaurentPoly, PrimformError> {
        Ok(self.coefficients(reduced)?[i].clone())
    }

    /// Express a reduced polynomial on the basis; errors when a fiber
    /// monomial outside the basis survives.
    pub fn coefficients(&self, reduced: &LaurentPoly) -> Result<Vec<LaurentPoly>, PrimformError> {
        let mut out = vec![LaurentPoly::zero(); self.mu];
        'terms: for (mono, c) in reduced.terms() {
            let fiber: BTreeMap<String, i64> = mono
                .iter()
                .filter(|(v, _)| self.vars.contains(v))
                .map(|(v, e)| (v.clone(), *e))
                .collect();
            let rest: Vec<(String, i64)> = mono
                .iter()
                .filter(|(v, _)| !self.vars.contains(*v))
                .map(|(v, e)| (v.clone(), *e))
                .collect();
            for (bi, bm) in self.basis_monos.iter().enumerate() {
                if *bm == fiber {
                    let t = LaurentPoly::monomial(
                        &rest.iter().map(|(v, e)| (v.as_str(), *e)).collect::<Vec<_>>(),
                        c.clone(),
                    );
                    out[bi] = out[bi].add(&t);
                    continue 'terms;
                }
            }
            return Err(PrimformError::Unsupported(format!(
                "monomial outside basis after reduction: {:?}",
                fiber
            )));
        }
        Ok(out)
    }

    /// Normal form followed by basis expansion.
    pub fn normal_form_vector(&self, g: &LaurentPoly) -> Result<Vec<LaurentPoly>, PrimformError> {
        let nf = self.normal_form(g)?;
        self.coefficients(&nf)
    }

    /// The Grothendieck residue functional, normalized so the Hessian of the
    /// potential has residue mu.
    pub fn residue(&self, g: &LaurentPoly) -> Result<LaurentPoly, PrimformError> {
        let nf = self.normal_form(g)?;
        let top = self.basis_coefficient(&nf, self.socle_index)?;
        Ok(top.scale(&self.residue_normalizer))
    }

    /// Scalar residue (errors when deformation variables survive).
    pub fn residue_scalar(&self, g: &LaurentPoly) -> Result<ExactScalar, PrimformError> {
        scalar_of(&self.residue(g)?)
    }

    /// K0 pairing of two ambient elements, as a polynomial in the
    /// deformation variables. Laurent kind goes through total residues at 0
    /// and infinity of `g1 g2 / (theta F) dz/z`; polynomial kind through the
    /// residue at infinity of `g1 g2 / F_z dz`.
    pub fn k0_poly(
        &self,
        g1: &LaurentPoly,
        g2: &LaurentPoly,
        lg: &LGSystem,
    ) -> Result<LaurentPoly, PrimformError> {
        if lg.vars.len() == 1 {
            let z = lg.fiber_var()?;
            let gen = if lg.family.is_some() {
                lg.jacobian_generator()?
            } else {
                lg.jacobian_generator_undeformed()?
            };
            let mut num = g1.mul(g2);
            if lg.kind == LgKind::Laurent {
                num = num.shift(z, -1);
            }
            let r = RatFunc::new(num, gen)?;
            r.critical_residue_sum(z, lg.kind == LgKind::Laurent)
        } else {
            // Multivariate: socle route through the residue functional.
            self.residue(&g1.mul(g2))
        }
    }

    pub fn k0(
        &self,
        g1: &LaurentPoly,
        g2: &LaurentPoly,
        lg: &LGSystem,
    ) -> Result<ExactScalar, PrimformError> {
        scalar_of(&self.k0_poly(g1, g2, lg)?)
    }

    /// Gram matrix of K0 on the basis; errors when degenerate.
    pub fn k0_gram(&self, lg: &LGSystem) -> Result<Vec<Vec<LaurentPoly>>, PrimformError> {
        let mut m = vec![vec![LaurentPoly::zero(); self.mu]; self.mu];
        for i in 0..self.mu {
            for j in i..self.mu {
                let v = self.k0_poly(&self.basis[i], &self.basis[j], lg)?;
                m[i][j] = v.clone();
                m[j][i] = v;
            }
        }
        let flat: Vec<LaurentPoly> = m.iter().flat_map(|r| r.iter().cloned()).collect();
        let det = det_poly(&flat, self.mu);
        if det.is_zero() {
            return Err(PrimformError::DegenerateGram(
                "K0 Gram determinant vanishes".into(),
            ));
        }
        Ok(m)
    }

    /// Multiplication-by-`g` matrix on the basis (columns are images).
    pub fn mult_matrix(&self, g: &LaurentPoly) -> Result<Vec<Vec<LaurentPoly>>, PrimformError> {
        let mut cols = Vec::with_capacity(self.mu);
        for b in &self.basis {
            cols.push(self.normal_form_vector(&g.mul(b))?);
        }
        // Transpose to row-major [row][col].
        let mut m = vec![vec![LaurentPoly::zero(); self.mu]; self.mu];
        for (j, col) in cols.iter().enumerate() {
            for (i, entry) in col.iter().enumerate() {
                m[i][j] = entry.clone();
            }
        }
        Ok(m)
    }

    /// Invert an ambient element in the quotient ring, returning a reduced
    /// representative. Errors when the element is a zero divisor.
    pub fn invert(&self, g: &LaurentPoly) -> Result<LaurentPoly, PrimformError> {
        let m = self.mult_matrix(g)?;
        // Solve M x = e_0 over the scalar fraction field; entries of M are
        // polynomials, so use fraction-valued elimination.
        let mut a: Vec<Vec<RatFunc>> = m
            .iter()
            .map(|row| row.iter().map(|p| RatFunc::from_poly(p.clone())).collect())
            .collect();
        let mut b: Vec<RatFunc> = (0..self.mu)
            .map(|i| {
                if i == 0 {
                    RatFunc::from_poly(LaurentPoly::one())
                } else {
                    RatFunc::from_poly(LaurentPoly::zero())
                }
            })
            .collect();
        gauss_solve(&mut a, &mut b)?;
        // Assemble sum x_i basis_i; each x_i must be polynomial for our rings
        // (denominators are units or cancel); keep rational check strict.
        let mut out = LaurentPoly::zero();
        for (i, x) in b.iter().enumerate() {
            let p = x
                .num()
                .exact_div(x.den(), &self.ambient_div_var()?)
                .or_else(|_| {
                    if x.den() == &LaurentPoly::one() {
                        Ok(x.num().clone())
                    } else {
                        Err(PrimformError::InexactDivision(format!(
                            "ring inverse has non-polynomial coefficient {}",
                            x
                        )))
                    }
                })?;
            out = out.add(&p.mul(&self.basis[i]));
        }
        Ok(out)
    }

    fn ambient_div_var(&self) -> Result<String, PrimformError> {
        self.vars
            .first()
            .cloned()
            .ok_or_else(|| PrimformError::Unsupported("no fiber variable".into()))
    }
}

fn scalar_of(p: &LaurentPoly) -> Result<ExactScalar, PrimformError> {
    crate::ratfunc::poly_to_scalar(p)
}

/// Determinant of a row-major square matrix of polynomials by Laplace
/// expansion (sizes here are at most 7).
pub fn det_poly(flat: &[LaurentPoly], n: usize) -> LaurentPoly {
    assert_eq!(flat.len(), n * n);
    if n == 0 {
        return LaurentPoly::one();
    }
    if n == 1 {
        return flat[0].clone();
    }
    let mut acc = LaurentPoly::zero();
    for j in 0..n {
        let c = &flat[j];
        if c.is_zero() {
            continue;
        }
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for r in 1..n {
            for s in 0..n {
                if s != j {
                    minor.push(flat[r * n + s].clone());
                }
            }
        }
        let sub = det_poly(&minor, n - 1);
        let signed = if j % 2 == 0 { c.mul(&sub) } else { c.mul(&sub).neg() };
        acc = acc.add(&signed);
    }
    acc
}

/// In-place fraction-field Gaussian elimination solving `a x = b`.
pub fn gauss_solve(a: &mut Vec<Vec<RatFunc>>, b: &mut Vec<RatFunc>) -> Result<(), PrimformError> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| PrimformError::DegenerateGram("singular linear system".into()))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = RatFunc::new(a[col][col].den().clone(), a[col][col].num().clone())?;
        for j in col..n {
            a[col][j] = a[col][j].mul(&inv)?;
        }
        b[col] = b[col].mul(&inv)?;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..n {
                    let t = a[col][j].mul(&f)?;
                    a[r][j] = a[r][j].sub(&t)?;
                }
                let t = b[col].mul(&f)?;
                b[r] = b[r].sub(&t)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> LaurentPoly {
        LaurentPoly::var("z")
    }

    #[test]
    fn a2_undeformed_ring() {
        // f = z^3 -> basis {1, z}, mu = 2
        let mut lg = LGSystem::a_n(2);
        lg.family = None;
        let ring = MilnorRing::build(&lg).unwrap();
        assert_eq!(ring.mu, 2);
        assert_eq!(ring.basis, vec![LaurentPoly::one(), z()]);
        // z^2 reduces to 0 in the undeformed ring
        assert!(ring.normal_form(&LaurentPoly::var_pow("z", 2)).unwrap().is_zero());
        // 1 is a basis element
        assert_eq!(ring.normal_form(&LaurentPoly::one()).unwrap(), LaurentPoly::one());
    }

    #[test]
    fn cp1_ring_rewrites_z_squared_to_q() {
        // family ring: z^2 -> q E1
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        assert_eq!(ring.mu, 2);
        let q_e1 = ExactScalar::param("q").mul(&ExactScalar::param("E1"));
        assert_eq!(
            ring.normal_form(&LaurentPoly::var_pow("z", 2)).unwrap(),
            LaurentPoly::constant(q_e1.clone())
        );
        // z^-1 -> z / (q E1)
        assert_eq!(
            ring.normal_form(&LaurentPoly::var_pow("z", -1)).unwrap(),
            z().scale(&q_e1.inv().unwrap())
        );
    }

    #[test]
    fn x3y3_ring() {
        let lg = LGSystem::x3y3();
        let ring = MilnorRing::build(&lg).unwrap();
        assert_eq!(ring.mu, 4);
        let names: Vec<String> = ring.basis.iter().map(|b| b.to_string()).collect();
        assert_eq!(ring.basis[0], LaurentPoly::one());
        assert_eq!(ring.basis[3], LaurentPoly::var("x").mul(&LaurentPoly::var("y")), "socle should be xy, got {:?}", names);
    }

    #[test]
    fn residue_oracle_a2() {
        // f = z^3: Res(z) = 1/3 via direct coefficient extraction of
        // z dz / (3 z^2), and Res(1) = 0, Res(hess) = mu.
        let mut lg = LGSystem::a_n(2);
        lg.family = None;
        let ring = MilnorRing::build(&lg).unwrap();
        assert_eq!(ring.residue_scalar(&z()).unwrap(), ExactScalar::ratio(1, 3));
        assert_eq!(ring.residue_scalar(&LaurentPoly::one()).unwrap(), ExactScalar::zero());
        let hess = LaurentPoly::var("z").scale(&ExactScalar::from_int(6));
        assert_eq!(ring.residue_scalar(&hess).unwrap(), ExactScalar::from_int(2));
    }

    #[test]
    fn residue_socle_route_matches_total_residue_route() {
        // For f = z^3, compare against -Res_inf(g/(3 z^2)).
        let mut lg = LGSystem::a_n(2);
        lg.family = None;
        let ring = MilnorRing::build(&lg).unwrap();
        for g in [LaurentPoly::one(), z(), LaurentPoly::var_pow("z", 2), LaurentPoly::var_pow("z", 3)] {
            let socle = ring.residue_scalar(&g).unwrap();
            let fz = LaurentPoly::var_pow("z", 2).scale(&ExactScalar::from_int(3));
            let direct = RatFunc::new(g.clone(), fz)
                .unwrap()
                .critical_residue_sum("z", false)
                .unwrap();
            assert_eq!(LaurentPoly::constant(socle), direct, "mismatch at {}", g);
        }
    }

    #[test]
    fn cp1_k0_values() {
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        let q_e1 = ExactScalar::param("q").mul(&ExactScalar::param("E1"));
        let qz_inv = LaurentPoly::var_pow("z", -1).scale(&q_e1);
        // (1, Q z^-1) -> 1
        assert_eq!(ring.k0(&LaurentPoly::one(), &qz_inv, &lg).unwrap(), ExactScalar::one());
        // (1, 1) -> 0
        assert_eq!(
            ring.k0(&LaurentPoly::one(), &LaurentPoly::one(), &lg).unwrap(),
            ExactScalar::zero()
        );
    }

    #[test]
    fn a2_k0_value() {
        let mut lg = LGSystem::a_n(2);
        lg.family = None;
        let ring = MilnorRing::build(&lg).unwrap();
        assert_eq!(ring.k0(&LaurentPoly::one(), &z(), &lg).unwrap(), ExactScalar::ratio(1, 3));
    }

    #[test]
    fn gram_nondegenerate_for_test_rings() {
        for lg in [LGSystem::a_n(1), LGSystem::a_n(2), LGSystem::a_n(3), LGSystem::cp1(), LGSystem::x3y3()] {
            let ring = MilnorRing::build(&lg).unwrap();
            ring.k0_gram(&lg).unwrap();
        }
    }

    #[test]
    fn non_isolated_is_detected() {
        // f = x^2 y^2 is not an isolated singularity; mu formula gives 1
        // but the basis enumeration disagrees, surfacing an error.
        let f = LaurentPoly::var_pow("x", 2).mul(&LaurentPoly::var_pow("y", 2));
        let lg = LGSystem {
            name: "bad".into(),
            kind: LgKind::Polynomial,
            vars: vec!["x".into(), "y".into()],
            weights: vec![
                BigRational::new(1.into(), 4.into()),
                BigRational::new(1.into(), 4.into()),
            ],
            f,
            family: None,
        };
        assert!(MilnorRing::build(&lg).is_err());
    }

    #[test]
    fn ring_inverse() {
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        // invert theta theta F = z + qE1 z^-1 (reduces to 2z)
        let q_e1 = ExactScalar::param("q").mul(&ExactScalar::param("E1"));
        let tt = z().add(&LaurentPoly::var_pow("z", -1).scale(&q_e1));
        let inv = ring.invert(&tt).unwrap();
        let prod = ring.normal_form(&inv.mul(&tt)).unwrap();
        assert_eq!(prod, LaurentPoly::one());
    }
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}
