//! Genus-0 gravitational descendants on the large phase space.
//!
//! Two pipelines are built side by side and compared:
//!
//! * The B side reconstructs the descendant tower from the Frobenius data
//!   (`eta`, the structure constants, the potential) through deformed flat
//!   functions `h_{l,d}` solved from the genus-0 recursion
//!   `d_i d_j h_{l,d} = sum_k C_ij^k d_k h_{l,d-1}` with the seed
//!   `h_{l,-1} = eta_{la} t^a`. Each `h` is normalized to vanish to first
//!   order at the origin; the subtracted series (the one-point and
//!   divisor-two-point data) are kept in a normalization record.
//! * The A side computes the Gromov-Witten correlators of the projective
//!   line from its small quantum ring (`omega o omega = q`, Poincare
//!   pairing) and the genus-0 axioms: string, dilaton, divisor, the
//!   dimension filter, and the topological recursion relation on numbers.
//!   It shares no code with the B side beyond the polynomial substrate.
//!
//! The affine mirror map `t~^i_d = t^i_d + sum t^j_e <sigma_{e-d-1}(O_j) O^i>`
//! (coefficients read from the normalization records; negative levels drop)
//! composes the B-side free energy so that it matches the A-side generating
//! function coefficient by coefficient above the quadratic ambiguity.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

use crate::error::PrimformError;
use crate::frobenius::FrobeniusData;
use crate::lg::LGSystem;
use crate::poly::LaurentPoly;
use crate::scalar::ExactScalar;

/// Truncation caps for the descendant towers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Largest number of insertions in a correlator.
    pub max_insertions: usize,
    /// Largest descendant level.
    pub max_level: u32,
    /// Largest curve degree (power of q).
    pub max_q: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_insertions: 5,
            max_level: 3,
            max_q: 3,
        }
    }
}

impl Caps {
    /// Reject queries outside the configured truncation.
    pub fn admit(&self, insertions: &[(u32, usize)], beta: u32) -> Result<(), PrimformError> {
        if insertions.len() > self.max_insertions {
            return Err(PrimformError::CapsExceeded(format!(
                "{} insertions > cap {}",
                insertions.len(),
                self.max_insertions
            )));
        }
        if let Some((d, _)) = insertions.iter().find(|(d, _)| *d > self.max_level) {
            return Err(PrimformError::CapsExceeded(format!(
                "descendant level {} > cap {}",
                d, self.max_level
            )));
        }
        if beta > self.max_q {
            return Err(PrimformError::CapsExceeded(format!(
                "curve degree {} > cap {}",
                beta, self.max_q
            )));
        }
        Ok(())
    }
}

/// A polynomial in q with rational coefficients, indexed by degree.
pub type QSeries = BTreeMap<u32, BigRational>;

fn qs_zero() -> QSeries {
    BTreeMap::new()
}

fn qs_add(a: &QSeries, b: &QSeries) -> QSeries {
    let mut out = a.clone();
    for (k, v) in b {
        let e = out.entry(*k).or_insert_with(BigRational::zero);
        *e += v;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

pub fn qs_coeff(a: &QSeries, k: u32) -> BigRational {
    a.get(&k).cloned().unwrap_or_else(BigRational::zero)
}

/// Convert an exact scalar that is a polynomial in `q` into a QSeries.
fn scalar_to_qseries(s: &ExactScalar) -> Result<QSeries, PrimformError> {
    let mut out = qs_zero();
    for (m, c) in s.terms() {
        let qexp = m.exponent("q");
        let rest: i64 = m
            .0
            .iter()
            .filter(|(k, _)| k.as_str() != "q")
            .map(|(_, v)| v.abs())
            .sum();
        if rest != 0 || qexp < 0 {
            return Err(PrimformError::Unsupported(format!(
                "scalar {} is not a polynomial in q",
                s
            )));
        }
        out.insert(qexp as u32, c.clone());
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

fn qseries_to_scalar(s: &QSeries) -> ExactScalar {
    let mut out = ExactScalar::zero();
    for (k, v) in s {
        let m = crate::scalar::ParamMono::var("q").pow(*k as i64);
        out = out.add(&ExactScalar::monomial(m, v.clone()));
    }
    out
}

/// Evaluate a mixed-basis function at `t = 0` (coordinates zero, each
/// exponential parameter at one), leaving a polynomial in `q`.
fn eval_origin(
    p: &LaurentPoly,
    coords: &[String],
    exp_params: &[(String, String)],
) -> Result<QSeries, PrimformError> {
    let mut v = p.clone();
    for c in coords {
        v = v.subst_scalar(c, &ExactScalar::zero())?;
    }
    let mut s = v.constant_term();
    for (param, _) in exp_params {
        s = s.eval_param_one(param);
    }
    scalar_to_qseries(&s)
}

/// A deformed flat function `h_{l,d}` with its normalization record.
#[derive(Clone, Debug)]
pub struct DeformedFlat {
    pub l: usize,
    pub d: u32,
    /// Normalized function: value and gradient vanish at the origin.
    pub h: LaurentPoly,
    /// One-point series of `sigma_d(O_l)` (the origin value of the
    /// unnormalized solution).
    pub record_const: QSeries,
    /// Two-point series against each coordinate field (the origin gradient
    /// of the unnormalized solution).
    pub record_lin: Vec<QSeries>,
}

/// The B-side tower of deformed flat functions plus its correlator table.
///
/// Two parallel towers are kept. The `honest` tower integrates each level
/// against the unnormalized level below; its origin values and gradients
/// are the one-point and two-point series that enter the mirror map. The
/// `cascade` tower integrates against the normalized level below; its
/// functions vanish to first order at the origin and generate the
/// correlators of the reconstructed free energy (the calibration in which
/// the descendants are the flat-section classes).
pub struct BSide {
    pub fd: FrobeniusData,
    honest: Vec<Vec<DeformedFlat>>,
    cascade: Vec<Vec<DeformedFlat>>,
    memo: std::cell::RefCell<BTreeMap<(Vec<(u32, usize)>, u32), BigRational>>,
    /// Multi-descendant generating functions keyed by the sorted slot
    /// multiset, built by gradient integration with zero constants.
    g_memo: std::cell::RefCell<BTreeMap<Vec<(u32, usize)>, LaurentPoly>>,
}

impl BSide {
    pub fn new(fd: FrobeniusData, max_level: u32) -> Result<Self, PrimformError> {
        let mut b = BSide {
            fd,
            honest: Vec::new(),
            cascade: Vec::new(),
            memo: Default::default(),
            g_memo: Default::default(),
        };
        b.extend_to(max_level)?;
        Ok(b)
    }

    /// The normalized deformed flat function of the free-energy calibration.
    pub fn h(&self, l: usize, d: u32) -> &DeformedFlat {
        &self.cascade[d as usize][l]
    }

    /// The honest-tower entry (records carry the stable one/two-points).
    pub fn h_honest(&self, l: usize, d: u32) -> &DeformedFlat {
        &self.honest[d as usize][l]
    }

    pub fn max_level(&self) -> u32 {
        self.cascade.len() as u32 - 1
    }

    /// Solve both towers up to the requested level.
    pub fn extend_to(&mut self, level: u32) -> Result<(), PrimformError> {
        let mu = self.fd.mu;
        let fam = self.fd.lg.family()?;
        let coords = fam.params.clone();
        let exp = fam.exp_params.clone();
        while self.cascade.len() <= level as usize {
            let d = self.cascade.len() as u32;
            let mut honest_row = Vec::with_capacity(mu);
            let mut cascade_row = Vec::with_capacity(mu);
            for l in 0..mu {
                let seed: Vec<LaurentPoly> = (0..mu)
                    .map(|a| LaurentPoly::constant(self.fd.eta[l][a].clone()))
                    .collect();
                // Honest tower: integrate the unnormalized level below.
                let honest_grad: Vec<LaurentPoly> = if d == 0 {
                    seed.clone()
                } else {
                    let prev = &self.honest[d as usize - 1][l];
                    let raw = unnormalized(prev, &coords);
                    coords.iter().map(|c| raw.derivative(c, &exp)).collect()
                };
                honest_row.push(self.solve_level(l, d, &honest_grad, &coords, &exp)?);
                // Cascade tower: integrate the normalized level below.
                let cascade_grad: Vec<LaurentPoly> = if d == 0 {
                    seed
                } else {
                    let prev = &self.cascade[d as usize - 1][l];
                    coords.iter().map(|c| prev.h.derivative(c, &exp)).collect()
                };
                cascade_row.push(self.solve_level(l, d, &cascade_grad, &coords, &exp)?);
            }
            self.honest.push(honest_row);
            self.cascade.push(cascade_row);
        }
        Ok(())
    }

    fn solve_level(
        &self,
        l: usize,
        d: u32,
        prev_grad: &[LaurentPoly],
        coords: &[String],
        exp: &[(String, String)],
    ) -> Result<DeformedFlat, PrimformError> {
        let mu = self.fd.mu;
        let mut targets = vec![vec![LaurentPoly::zero(); mu]; mu];
        for i in 0..mu {
            for j in i..mu {
                let mut g = LaurentPoly::zero();
                for k in 0..mu {
                    let mut cijk = LaurentPoly::zero();
                    for m in 0..mu {
                        cijk = cijk.add(&self.fd.c_tensor[i][j][m].scale(&self.fd.eta_inv[m][k]));
                    }
                    g = g.add(&cijk.mul(&prev_grad[k]));
                }
                targets[i][j] = g.clone();
                targets[j][i] = g;
            }
        }
        let h_raw = solve_hessian_system(&targets, coords, exp)?;
        let record_const = eval_origin(&h_raw, coords, exp)?;
        let mut record_lin = Vec::with_capacity(mu);
        let mut h = h_raw.sub(&LaurentPoly::constant(qseries_to_scalar(&record_const)));
        for c in coords {
            let g = eval_origin(&h_raw.derivative(c, exp), coords, exp)?;
            h = h.sub(&LaurentPoly::var(c).scale(&qseries_to_scalar(&g)));
            record_lin.push(g);
        }
        Ok(DeformedFlat {
            l,
            d,
            h,
            record_const,
            record_lin,
        })
    }

    /// One-point series `<sigma_d(O_l)>` from the honest-tower record.
    pub fn one_point(&self, l: usize, d: u32) -> &QSeries {
        &self.h_honest(l, d).record_const
    }

    /// Two-point series `<sigma_d(O_l) O_b>`: the divisor slot comes from
    /// the honest record, the identity slot lowers by the string equation.
    pub fn two_point(&self, l: usize, d: u32, b: usize) -> Result<QSeries, PrimformError> {
        if b == 0 {
            if d == 0 {
                return Ok(qs_zero());
            }
            return Ok(self.one_point(l, d - 1).clone());
        }
        Ok(self.h_honest(l, d).record_lin[b].clone())
    }

    /// Correlator of the B-side tower at `t = 0` (a coefficient of the
    /// reconstructed free energy). Insertions are (level, index) pairs.
    pub fn correlator(
        &self,
        insertions: &[(u32, usize)],
        beta: u32,
    ) -> Result<BigRational, PrimformError> {
        let mut key: Vec<(u32, usize)> = insertions.to_vec();
        key.sort_unstable();
        if let Some(v) = self.memo.borrow().get(&(key.clone(), beta)) {
            return Ok(v.clone());
        }
        let v = self.correlator_inner(&key, beta)?;
        self.memo.borrow_mut().insert((key, beta), v.clone());
        Ok(v)
    }

    fn correlator_inner(
        &self,
        ins: &[(u32, usize)],
        beta: u32,
    ) -> Result<BigRational, PrimformError> {
        let fam = self.fd.lg.family()?;
        let coords = fam.params.clone();
        let exp = fam.exp_params.clone();
        let n = ins.len();
        let descendants: Vec<usize> = (0..n).filter(|&i| ins[i].0 > 0).collect();
        match (n, descendants.len()) {
            (0, _) => Ok(BigRational::zero()),
            (1, _) => {
                let (d, a) = ins[0];
                Ok(qs_coeff(self.one_point(a, d), beta))
            }
            _ => {
                // Split into descendant slots and primary derivative slots;
                // the value is a derivative of the generating function of
                // the descendant multiset at the origin.
                let slots: Vec<(u32, usize)> =
                    descendants.iter().map(|&i| ins[i]).collect();
                let mut g = if slots.is_empty() {
                    self.fd.potential.clone()
                } else {
                    self.g_function(&slots)?
                };
                for (i, (_, b)) in ins.iter().enumerate() {
                    if descendants.contains(&i) {
                        continue;
                    }
                    g = g.derivative(&coords[*b], &exp);
                }
                Ok(qs_coeff(&eval_origin(&g, &coords, &exp)?, beta))
            }
        }
    }

    /// The generating function of a multiset of descendant insertions
    /// (all levels >= 1) on the small phase space: `<< prod sigma >>(t)`.
    ///
    /// For one slot this is the unnormalized deformed flat function. For
    /// several, the gradient is assembled from the topological recursion
    /// relation at the function level (split on the first slot against the
    /// derivative direction and the second slot, distributing the remaining
    /// slots) and integrated; the constant is pinned by the divisor
    /// equation.
    pub fn g_function(&self, slots: &[(u32, usize)]) -> Result<LaurentPoly, PrimformError> {
        let mut key: Vec<(u32, usize)> = slots.to_vec();
        key.sort_unstable();
        assert!(key.iter().all(|(d, _)| *d >= 1));
        if key.len() == 1 {
            let fam = self.fd.lg.family()?;
            return Ok(unnormalized(self.h_honest(key[0].1, key[0].0), &fam.params));
        }
        if let Some(g) = self.g_memo.borrow().get(&key) {
            return Ok(g.clone());
        }
        let fam = self.fd.lg.family()?;
        let coords = fam.params.clone();
        let exp = fam.exp_params.clone();
        let mu = self.fd.mu;
        let (d, a) = key[0];
        let second = key[1];
        let spectators: Vec<(u32, usize)> = key[2..].to_vec();
        let mut grads: Vec<LaurentPoly> = Vec::with_capacity(mu);
        for i in 0..mu {
            let mut g_i = LaurentPoly::zero();
            let k = spectators.len();
            for mask in 0..(1u32 << k) {
                let mut s1: Vec<(u32, usize)> = Vec::new();
                let mut s2: Vec<(u32, usize)> = Vec::new();
                for (bit, sp) in spectators.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        s1.push(*sp);
                    } else {
                        s2.push(*sp);
                    }
                }
                for m in 0..mu {
                    for nu in 0..mu {
                        let c = self.fd.eta_inv[m][nu].as_rational().ok_or_else(|| {
                            PrimformError::Unsupported("non-rational metric entry".into())
                        })?;
                        if c.is_zero() {
                            continue;
                        }
                        // left: << sigma_{d-1}(O_a) S1 O_mu >>
                        let left = self.insertion_function(d - 1, a, &s1, m)?;
                        // right: << O_nu O_i (second) S2 >>
                        let mut right_slots = vec![second];
                        right_slots.extend_from_slice(&s2);
                        let right = self
                            .g_function(&right_slots)?
                            .derivative(&coords[nu], &exp)
                            .derivative(&coords[i], &exp);
                        g_i = g_i.add(&left.mul(&right).scale_rat(&c));
                    }
                }
            }
            grads.push(g_i);
        }
        let g0 = solve_gradient_system(&grads, &coords, &exp)?;
        // Pin the constant with the divisor equation:
        //   <O_1 S>_b = b <S>_b + sum_s <(S - s) + lowered(s)>_b.
        let d1g = eval_origin(&g0.derivative(&coords[1], &exp), &coords, &exp)?;
        let val0 = eval_origin(&g0, &coords, &exp)?;
        let mut lowered_total = qs_zero();
        for (pos, &(ds, as_)) in key.iter().enumerate() {
            let Some(cupped) = cup(as_, 1) else { continue };
            let mut rest: Vec<(u32, usize)> = key
                .iter()
                .enumerate()
                .filter(|(p, _)| *p != pos)
                .map(|(_, s)| *s)
                .collect();
            rest.push((ds - 1, cupped));
            let mut series = qs_zero();
            let max_b = 16u32;
            for beta in 0..=max_b {
                let v = self.correlator(&rest, beta)?;
                if !v.is_zero() {
                    series.insert(beta, v);
                }
            }
            lowered_total = qs_add(&lowered_total, &series);
        }
        let mut constant = qs_zero();
        let all_betas: std::collections::BTreeSet<u32> = d1g
            .keys()
            .chain(val0.keys())
            .chain(lowered_total.keys())
            .copied()
            .collect();
        for beta in all_betas {
            if beta == 0 {
                continue;
            }
            let c = (qs_coeff(&d1g, beta) - qs_coeff(&lowered_total, beta))
                / BigRational::from_integer(BigInt::from(beta))
                - qs_coeff(&val0, beta);
            if !c.is_zero() {
                constant.insert(beta, c);
            }
        }
        let g = g0.add(&LaurentPoly::constant(qseries_to_scalar(&constant)));
        self.g_memo.borrow_mut().insert(key, g.clone());
        Ok(g)
    }

    /// `<< sigma_d(O_a) S O_mu >>` as a function; `d = 0` turns the slot
    /// into a primary derivative.
    fn insertion_function(
        &self,
        d: u32,
        a: usize,
        extra: &[(u32, usize)],
        mu_idx: usize,
    ) -> Result<LaurentPoly, PrimformError> {
        let fam = self.fd.lg.family()?;
        let coords = fam.params.clone();
        let exp = fam.exp_params.clone();
        if d >= 1 {
            let mut slots = vec![(d, a)];
            slots.extend_from_slice(extra);
            Ok(self.g_function(&slots)?.derivative(&coords[mu_idx], &exp))
        } else if extra.is_empty() {
            Ok(self
                .fd
                .potential
                .derivative(&coords[a], &exp)
                .derivative(&coords[mu_idx], &exp))
        } else {
            Ok(self
                .g_function(extra)?
                .derivative(&coords[a], &exp)
                .derivative(&coords[mu_idx], &exp))
        }
    }
}

/// Reassemble the unnormalized solution from a stored entry.
fn unnormalized(df: &DeformedFlat, coords: &[String]) -> LaurentPoly {
    let mut h = df
        .h
        .add(&LaurentPoly::constant(qseries_to_scalar(&df.record_const)));
    for (c, g) in coords.iter().zip(&df.record_lin) {
        h = h.add(&LaurentPoly::var(c).scale(&qseries_to_scalar(g)));
    }
    h
}

/// Solve `d_i d_j h = targets[i][j]` exactly by matching candidate
/// monomials; undetermined directions default to zero.
fn solve_hessian_system(
    targets: &[Vec<LaurentPoly>],
    coords: &[String],
    exp_params: &[(String, String)],
) -> Result<LaurentPoly, PrimformError> {
    type Key = (Vec<(String, i64)>, Vec<(String, i64)>);
    let mu = coords.len();
    let mut candidates: std::collections::BTreeSet<Key> = Default::default();
    for i in 0..mu {
        for j in i..mu {
            for (mono, c) in targets[i][j].terms() {
                for (pm, _) in c.terms() {
                    let params: Vec<(String, i64)> =
                        pm.0.iter().map(|(k, v)| (k.clone(), *v)).collect();
                    let has_exp = exp_params
                        .iter()
                        .any(|(p, _)| params.iter().any(|(n, _)| n == p));
                    for drop_i in [false, true] {
                        for drop_j in [false, true] {
                            let droppable = |idx: usize| {
                                has_exp && exp_params.iter().any(|(_, v)| v == &coords[idx])
                            };
                            if (drop_i && !droppable(i)) || (drop_j && !droppable(j)) {
                                continue;
                            }
                            let mut m2: BTreeMap<String, i64> = mono.clone();
                            if !drop_i {
                                *m2.entry(coords[i].clone()).or_insert(0) += 1;
                            }
                            if !drop_j {
                                *m2.entry(coords[j].clone()).or_insert(0) += 1;
                            }
                            candidates.insert((m2.into_iter().collect(), params.clone()));
                        }
                    }
                }
            }
        }
    }
    // Close the candidate set downward in each exponential variable: a
    // target with E1^k t1^e may be produced by any power t1^{e'} <= e.
    let mut closed: std::collections::BTreeSet<Key> = Default::default();
    for (mono, params) in candidates {
        let exp_here: Vec<&String> = exp_params
            .iter()
            .filter(|(p, _)| params.iter().any(|(n, _)| n == p))
            .map(|(_, v)| v)
            .collect();
        let mut stack = vec![mono.clone()];
        while let Some(m) = stack.pop() {
            if !closed.insert((m.clone(), params.clone())) {
                continue;
            }
            for v in &exp_here {
                if let Some(pos) = m.iter().position(|(n, e)| &n == v && *e > 0) {
                    let mut m2 = m.clone();
                    if m2[pos].1 == 1 {
                        m2.remove(pos);
                    } else {
                        m2[pos].1 -= 1;
                    }
                    stack.push(m2);
                }
            }
        }
    }
    // Visible candidates only: degree >= 2 or carrying an exponential.
    let visible: Vec<Key> = closed
        .into_iter()
        .filter(|(mono, params)| {
            let deg: i64 = mono.iter().map(|(_, e)| e).sum();
            let has_exp = exp_params
                .iter()
                .any(|(p, _)| params.iter().any(|(n, _)| n == p));
            has_exp || deg >= 2
        })
        .collect();
    let basis: Vec<LaurentPoly> = visible
        .iter()
        .map(|(mono, params)| {
            let mut m = crate::scalar::ParamMono::one();
            for (n, e) in params {
                m = m.mul(&crate::scalar::ParamMono::var(n).pow(*e));
            }
            let mut p = LaurentPoly::constant(ExactScalar::monomial(m, BigRational::one()));
            for (v, e) in mono {
                p = p.mul(&LaurentPoly::var_pow(v, *e));
            }
            p
        })
        .collect();
    let nunk = basis.len();
    let mut rows: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    for i in 0..mu {
        for j in i..mu {
            let derivs: Vec<LaurentPoly> = basis
                .iter()
                .map(|p| {
                    p.derivative(&coords[i], exp_params)
                        .derivative(&coords[j], exp_params)
                })
                .collect();
            let mut keys: std::collections::BTreeSet<Key> = Default::default();
            let collect = |p: &LaurentPoly, keys: &mut std::collections::BTreeSet<Key>| {
                for (mono, c) in p.terms() {
                    for (pm, _) in c.terms() {
                        keys.insert((
                            mono.clone().into_iter().collect(),
                            pm.0.iter().map(|(k, v)| (k.clone(), *v)).collect(),
                        ));
                    }
                }
            };
            collect(&targets[i][j], &mut keys);
            for d in &derivs {
                collect(d, &mut keys);
            }
            for key in keys {
                let coeff_of = |p: &LaurentPoly| -> BigRational {
                    for (mono, c) in p.terms() {
                        let mk: Vec<(String, i64)> = mono.into_iter().collect();
                        if mk == key.0 {
                            for (pm, r) in c.terms() {
                                let pk: Vec<(String, i64)> =
                                    pm.0.iter().map(|(k, v)| (k.clone(), *v)).collect();
                                if pk == key.1 {
                                    return r.clone();
                                }
                            }
                        }
                    }
                    BigRational::zero()
                };
                let row: Vec<BigRational> = derivs.iter().map(coeff_of).collect();
                let rhs = coeff_of(&targets[i][j]);
                if row.iter().all(|x| x.is_zero()) && rhs.is_zero() {
                    continue;
                }
                rows.push((row, rhs));
            }
        }
    }
    let xs = solve_rows(&rows, nunk).map_err(PrimformError::InconsistentPde)?;
    let mut h = LaurentPoly::zero();
    for (x, p) in xs.iter().zip(&basis) {
        h = h.add(&p.scale_rat(x));
    }
    for i in 0..mu {
        for j in 0..mu {
            let d = h
                .derivative(&coords[i], exp_params)
                .derivative(&coords[j], exp_params);
            if d != targets[i][j] {
                return Err(PrimformError::InconsistentPde(format!(
                    "residual at ({}, {}): {} vs {}",
                    i, j, d, targets[i][j]
                )));
            }
        }
    }
    Ok(h)
}

/// Solve `d_i h = grads[i]` exactly by matching candidate monomials;
/// undetermined directions (constants) default to zero.
fn solve_gradient_system(
    grads: &[LaurentPoly],
    coords: &[String],
    exp_params: &[(String, String)],
) -> Result<LaurentPoly, PrimformError> {
    type Key = (Vec<(String, i64)>, Vec<(String, i64)>);
    let mu = coords.len();
    let mut candidates: std::collections::BTreeSet<Key> = Default::default();
    for i in 0..mu {
        for (mono, c) in grads[i].terms() {
            for (pm, _) in c.terms() {
                let params: Vec<(String, i64)> =
                    pm.0.iter().map(|(k, v)| (k.clone(), *v)).collect();
                let has_exp = exp_params
                    .iter()
                    .any(|(p, _)| params.iter().any(|(n, _)| n == p));
                for drop_i in [false, true] {
                    let droppable =
                        |idx: usize| has_exp && exp_params.iter().any(|(_, v)| v == &coords[idx]);
                    if drop_i && !droppable(i) {
                        continue;
                    }
                    let mut m2: BTreeMap<String, i64> = mono.clone();
                    if !drop_i {
                        *m2.entry(coords[i].clone()).or_insert(0) += 1;
                    }
                    candidates.insert((m2.into_iter().collect(), params.clone()));
                }
            }
        }
    }
    // Downward closure in exponential variables.
    let mut closed: std::collections::BTreeSet<Key> = Default::default();
    for (mono, params) in candidates {
        let exp_here: Vec<&String> = exp_params
            .iter()
            .filter(|(p, _)| params.iter().any(|(n, _)| n == p))
            .map(|(_, v)| v)
            .collect();
        let mut stack = vec![mono.clone()];
        while let Some(m) = stack.pop() {
            if !closed.insert((m.clone(), params.clone())) {
                continue;
            }
            for v in &exp_here {
                if let Some(pos) = m.iter().position(|(n, e)| &n == v && *e > 0) {
                    let mut m2 = m.clone();
                    if m2[pos].1 == 1 {
                        m2.remove(pos);
                    } else {
                        m2[pos].1 -= 1;
                    }
                    stack.push(m2);
                }
            }
        }
    }
    // Gradient-visible candidates: degree >= 1 or exponential-carrying.
    let visible: Vec<Key> = closed
        .into_iter()
        .filter(|(mono, params)| {
            let deg: i64 = mono.iter().map(|(_, e)| e).sum();
            let has_exp = exp_params
                .iter()
                .any(|(p, _)| params.iter().any(|(n, _)| n == p));
            has_exp || deg >= 1
        })
        .collect();
    let basis: Vec<LaurentPoly> = visible
        .iter()
        .map(|(mono, params)| {
            let mut m = crate::scalar::ParamMono::one();
            for (n, e) in params {
                m = m.mul(&crate::scalar::ParamMono::var(n).pow(*e));
            }
            let mut p = LaurentPoly::constant(ExactScalar::monomial(m, BigRational::one()));
            for (v, e) in mono {
                p = p.mul(&LaurentPoly::var_pow(v, *e));
            }
            p
        })
        .collect();
    let nunk = basis.len();
    let mut rows: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    for i in 0..mu {
        let derivs: Vec<LaurentPoly> = basis
            .iter()
            .map(|p| p.derivative(&coords[i], exp_params))
            .collect();
        let mut keys: std::collections::BTreeSet<Key> = Default::default();
        let collect = |p: &LaurentPoly, keys: &mut std::collections::BTreeSet<Key>| {
            for (mono, c) in p.terms() {
                for (pm, _) in c.terms() {
                    keys.insert((
                        mono.clone().into_iter().collect(),
                        pm.0.iter().map(|(k, v)| (k.clone(), *v)).collect(),
                    ));
                }
            }
        };
        collect(&grads[i], &mut keys);
        for d in &derivs {
            collect(d, &mut keys);
        }
        for key in keys {
            let coeff_of = |p: &LaurentPoly| -> BigRational {
                for (mono, c) in p.terms() {
                    let mk: Vec<(String, i64)> = mono.into_iter().collect();
                    if mk == key.0 {
                        for (pm, r) in c.terms() {
                            let pk: Vec<(String, i64)> =
                                pm.0.iter().map(|(k, v)| (k.clone(), *v)).collect();
                            if pk == key.1 {
                                return r.clone();
                            }
                        }
                    }
                }
                BigRational::zero()
            };
            let row: Vec<BigRational> = derivs.iter().map(coeff_of).collect();
            let rhs = coeff_of(&grads[i]);
            if row.iter().all(|x| x.is_zero()) && rhs.is_zero() {
                continue;
            }
            rows.push((row, rhs));
        }
    }
    let xs = solve_rows(&rows, nunk).map_err(PrimformError::InconsistentPde)?;
    let mut h = LaurentPoly::zero();
    for (x, p) in xs.iter().zip(&basis) {
        h = h.add(&p.scale_rat(x));
    }
    for i in 0..mu {
        let d = h.derivative(&coords[i], exp_params);
        if d != grads[i] {
            return Err(PrimformError::InconsistentPde(format!(
                "gradient residual at {}: {} vs {}",
                i, d, grads[i]
            )));
        }
    }
    Ok(h)
}

fn solve_rows(
    rows: &[(Vec<BigRational>, BigRational)],
    n: usize,
) -> Result<Vec<BigRational>, String> {
    let mut mat: Vec<Vec<BigRational>> = rows.iter().map(|(r, _)| r.clone()).collect();
    let mut rhs: Vec<BigRational> = rows.iter().map(|(_, b)| b.clone()).collect();
    let mut solution = vec![BigRational::zero(); n];
    let mut used = vec![false; mat.len()];
    let mut pivot_for_col = vec![None; n];
    for col in 0..n {
        let Some(r) = (0..mat.len()).find(|&r| !used[r] && !mat[r][col].is_zero()) else {
            continue;
        };
        used[r] = true;
        pivot_for_col[col] = Some(r);
        let p = mat[r][col].clone();
        for j in 0..n {
            mat[r][j] /= p.clone();
        }
        rhs[r] /= p;
        for r2 in 0..mat.len() {
            if r2 != r && !mat[r2][col].is_zero() {
                let f = mat[r2][col].clone();
                for j in 0..n {
                    let t = mat[r][j].clone() * f.clone();
                    mat[r2][j] -= t;
                }
                let t = rhs[r].clone() * f;
                rhs[r2] -= t;
            }
        }
    }
    for col in 0..n {
        if let Some(r) = pivot_for_col[col] {
            solution[col] = rhs[r].clone();
        }
    }
    for (r, u) in used.iter().enumerate() {
        if !*u && !rhs[r].is_zero() {
            return Err(format!("inconsistent residual {}", rhs[r]));
        }
    }
    Ok(solution)
}

// ---------------------------------------------------------------------------
// A side: Gromov-Witten correlators of the projective line from its quantum
// ring and the genus-0 axioms, on plain numbers.
// ---------------------------------------------------------------------------

/// Complex degrees of the classes O_0 (identity) and O_1 (point).
const A_DEG: [u32; 2] = [0, 1];

/// Cup products on the projective line; None encodes zero.
fn cup(a: usize, b: usize) -> Option<usize> {
    match (a, b) {
        (0, x) | (x, 0) => Some(x),
        (1, 1) => None,
        _ => unreachable!(),
    }
}

#[derive(Default)]
pub struct ASide {
    memo: std::cell::RefCell<BTreeMap<(Vec<(u32, usize)>, u32), BigRational>>,
}

impl ASide {
    pub fn new() -> Self {
        Self::default()
    }

    /// The small quantum product read off the quotient ring
    /// `C[z, z^-1] / (z dF/dz)` with `f = z + q z^-1`: `z^2` reduces to `q`,
    /// so the point class squares to q times the identity.
    fn ring_seed() -> (u32, BigRational) {
        let q = ExactScalar::param("q");
        let theta_f = LaurentPoly::var("z")
            .sub(&LaurentPoly::var_pow("z", -1).scale(&q));
        // z^2 mod (z - q z^-1): multiply theta F by z to clear the pole and
        // reduce: z^2 = q.
        let relation = theta_f.mul(&LaurentPoly::var("z"));
        // relation = z^2 - q; the reduction of z*z is the negated constant
        // coefficient.
        let c0 = relation
            .coeffs_in("z")
            .get(&0)
            .cloned()
            .unwrap_or_else(LaurentPoly::zero)
            .neg();
        let s = c0.constant_term();
        // s = q^1 with coefficient 1
        let qpow = s
            .terms()
            .next()
            .map(|(m, _)| m.exponent("q"))
            .unwrap_or(0) as u32;
        let coeff = s.terms().next().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero);
        (qpow, coeff)
    }

    pub fn correlator(&self, insertions: &[(u32, usize)], beta: u32) -> BigRational {
        let mut key: Vec<(u32, usize)> = insertions.to_vec();
        key.sort_unstable();
        if let Some(v) = self.memo.borrow().get(&(key.clone(), beta)) {
            return v.clone();
        }
        let v = self.correlator_inner(&key, beta);
        self.memo.borrow_mut().insert((key, beta), v.clone());
        v
    }

    fn correlator_inner(&self, ins: &[(u32, usize)], beta: u32) -> BigRational {
        let n = ins.len();
        // Dimension: sum(d_i + deg_i) = (dim X - 3) + 2 beta + n = n + 2 beta - 2.
        let lhs: i64 = ins.iter().map(|(d, a)| *d as i64 + A_DEG[*a] as i64).sum();
        if lhs != n as i64 + 2 * beta as i64 - 2 {
            return BigRational::zero();
        }
        match n {
            0 => BigRational::zero(),
            1 => self.one_point(ins[0].0, ins[0].1, beta),
            2 => self.two_point(ins[0].0, ins[0].1, ins[1].0, ins[1].1, beta),
            _ => {
                if let Some(slot) = (0..n).max_by_key(|&i| ins[i].0).filter(|&i| ins[i].0 > 0) {
                    let others: Vec<usize> = (0..n).filter(|&i| i != slot).collect();
                    let x = others[0];
                    let y = others[1];
                    let spectators: Vec<usize> = others[2..].to_vec();
                    return self.trr(ins, slot, x, y, &spectators, beta);
                }
                // all primary
                if beta == 0 {
                    if n == 3 {
                        let degs: i64 = ins.iter().map(|(_, a)| A_DEG[*a] as i64).sum();
                        if degs == 1 {
                            return BigRational::one();
                        }
                    }
                    return BigRational::zero();
                }
                if ins.iter().any(|(_, a)| *a == 0) {
                    // string removes the identity; nothing to lower
                    return BigRational::zero();
                }
                if n > 3 {
                    let rest: Vec<(u32, usize)> = ins[..n - 1].to_vec();
                    return BigRational::from_integer(BigInt::from(beta))
                        * self.correlator(&rest, beta);
                }
                let (qpow, coeff) = Self::ring_seed();
                if beta == qpow {
                    coeff
                } else {
                    BigRational::zero()
                }
            }
        }
    }

    fn one_point(&self, d: u32, a: usize, beta: u32) -> BigRational {
        if beta == 0 {
            return BigRational::zero();
        }
        // divisor inversion
        let two = self.two_point(d, a, 0, 1, beta);
        let lowered = if d >= 1 {
            match cup(a, 1) {
                Some(c) => self.one_point(d - 1, c, beta),
                None => BigRational::zero(),
            }
        } else {
            BigRational::zero()
        };
        (two - lowered) / BigRational::from_integer(BigInt::from(beta))
    }

    fn two_point(&self, d1: u32, a1: usize, d2: u32, a2: usize, beta: u32) -> BigRational {
        let (d, a, e, b) = if d1 >= d2 {
            (d1, a1, d2, a2)
        } else {
            (d2, a2, d1, a1)
        };
        if e > 0 {
            // string-lifted three point splits the level pair
            let three = self.correlator(&[(0, 0), (d + 1, a), (e, b)], beta);
            return three - self.two_point(d + 1, a, e - 1, b, beta);
        }
        if d == 0 {
            if beta == 0 {
                return BigRational::zero();
            }
            if a == 1 && b == 1 {
                // divisor inversion through the primary three-point
                let three = self.correlator(&[(0, 1), (0, 1), (0, 1)], beta);
                return three / BigRational::from_integer(BigInt::from(beta));
            }
            return BigRational::zero();
        }
        if b == 0 {
            // string: <sigma_d(O_a) O_0> = <sigma_{d-1}(O_a)>
            return self.one_point(d - 1, a, beta);
        }
        // b == 1: divisor inversion through the three-point
        if beta == 0 {
            return BigRational::zero();
        }
        let three = self.correlator(&[(d, a), (0, 1), (0, 1)], beta);
        let lowered = if d >= 1 {
            match cup(a, 1) {
                Some(c) => self.two_point(d - 1, c, 0, 1, beta),
                None => BigRational::zero(),
            }
        } else {
            BigRational::zero()
        };
        (three - lowered) / BigRational::from_integer(BigInt::from(beta))
    }

    fn trr(
        &self,
        ins: &[(u32, usize)],
        slot: usize,
        x: usize,
        y: usize,
        spectators: &[usize],
        beta: u32,
    ) -> BigRational {
        let (d, a) = ins[slot];
        let mut acc = BigRational::zero();
        let k = spectators.len();
        for mask in 0..(1u32 << k) {
            let mut s1: Vec<(u32, usize)> = Vec::new();
            let mut s2: Vec<(u32, usize)> = Vec::new();
            for (bit, &sp) in spectators.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    s1.push(ins[sp]);
                } else {
                    s2.push(ins[sp]);
                }
            }
            for b1 in 0..=beta {
                let b2 = beta - b1;
                // antidiagonal Poincare pairing on {O_0, O_1}
                for (m, nu) in [(0usize, 1usize), (1, 0)] {
                    let mut left: Vec<(u32, usize)> = vec![(d - 1, a)];
                    left.extend_from_slice(&s1);
                    left.push((0, m));
                    let lv = self.correlator(&left, b1);
                    if lv.is_zero() {
                        continue;
                    }
                    let mut right: Vec<(u32, usize)> = vec![(0, nu), ins[x], ins[y]];
                    right.extend_from_slice(&s2);
                    let rv = self.correlator(&right, b2);
                    acc += lv * rv;
                }
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Mirror map and free-energy comparison.
// ---------------------------------------------------------------------------

fn slot_var(a: usize, d: u32) -> String {
    format!("T{}_{}", a, d)
}

/// The affine mirror map on large-phase-space coordinates: for each slot
/// (i, d) the expression `t^i_d + sum_{j, e > d} P t^j_e` as a polynomial in
/// the slot variables with q-polynomial coefficients. Negative-level
/// two-point coefficients vanish by convention, so the map is the identity
/// on the small phase space.
pub fn mirror_map(
    b: &BSide,
    caps: &Caps,
) -> Result<Vec<((usize, u32), LaurentPoly)>, PrimformError> {
    let mu = b.fd.mu;
    let mut out = Vec::new();
    for d in 0..=caps.max_level {
        for i in 0..mu {
            let mut expr = LaurentPoly::var(&slot_var(i, d));
            for e in (d + 1)..=caps.max_level {
                let m = e - d - 1;
                for j in 0..mu {
                    // <sigma_m(O_j) O^i>: raise the index with the metric.
                    let mut p = qs_zero();
                    for bidx in 0..mu {
                        let w = b.fd.eta_inv[i][bidx].as_rational().ok_or_else(|| {
                            PrimformError::Unsupported("non-rational metric".into())
                        })?;
                        if w.is_zero() {
                            continue;
                        }
                        let tp = b.two_point(j, m, bidx)?;
                        let scaled: QSeries =
                            tp.iter().map(|(k, v)| (*k, v * w.clone())).collect();
                        p = qs_add(&p, &scaled);
                    }
                    p.retain(|k, v| *k <= caps.max_q && !v.is_zero());
                    if p.is_empty() {
                        continue;
                    }
                    expr = expr
                        .add(&LaurentPoly::var(&slot_var(j, e)).scale(&qseries_to_scalar(&p)));
                }
            }
            out.push(((i, d), expr));
        }
    }
    Ok(out)
}

/// Invert the affine mirror map exactly (corrections reference strictly
/// higher levels, so substitution proceeds top-down).
pub fn invert_mirror_map(
    map: &[((usize, u32), LaurentPoly)],
) -> Result<Vec<((usize, u32), LaurentPoly)>, PrimformError> {
    let mut inv: BTreeMap<(usize, u32), LaurentPoly> = BTreeMap::new();
    let mut order: Vec<&((usize, u32), LaurentPoly)> = map.iter().collect();
    order.sort_by(|a, b| b.0 .1.cmp(&a.0 .1));
    for ((i, d), expr) in order {
        let corr = expr.sub(&LaurentPoly::var(&slot_var(*i, *d)));
        let mut corr_sub = corr.clone();
        for ((j, e), ie) in &inv {
            corr_sub = corr_sub.subst(&slot_var(*j, *e), &LaurentPoly::var(&format!("_I{}_{}", j, e)))?;
            let _ = ie;
        }
        for ((j, e), ie) in &inv {
            corr_sub = corr_sub.subst(&format!("_I{}_{}", j, e), ie)?;
        }
        inv.insert(
            (*i, *d),
            LaurentPoly::var(&slot_var(*i, *d)).sub(&corr_sub),
        );
    }
    Ok(map
        .iter()
        .map(|((i, d), _)| ((*i, *d), inv[&(*i, *d)].clone()))
        .collect())
}

/// Substitute every slot variable of `p` by its expression in `map`.
pub fn compose_slots(
    p: &LaurentPoly,
    map: &[((usize, u32), LaurentPoly)],
) -> Result<LaurentPoly, PrimformError> {
    let mut out = p.clone();
    for ((i, d), _) in map {
        out = out.subst(&slot_var(*i, *d), &LaurentPoly::var(&format!("_C{}_{}", i, d)))?;
    }
    for ((i, d), expr) in map {
        out = out.subst(&format!("_C{}_{}", i, d), expr)?;
    }
    Ok(out)
}

/// Apply the mirror map to a point given as exact q-polynomial slot values.
pub fn mirror_map_apply(
    map: &[((usize, u32), LaurentPoly)],
    point: &BTreeMap<(usize, u32), ExactScalar>,
) -> Result<BTreeMap<(usize, u32), ExactScalar>, PrimformError> {
    let mut out = BTreeMap::new();
    for ((i, d), expr) in map {
        let mut v = expr.clone();
        for ((j, e), val) in point {
            v = v.subst_scalar(&slot_var(*j, *e), val)?;
        }
        for var in v.vars().to_vec() {
            if var.starts_with('T') {
                v = v.subst_scalar(&var, &ExactScalar::zero())?;
            }
        }
        out.insert((*i, *d), v.constant_term());
    }
    Ok(out)
}

/// Assemble a generating function from a correlator source: the sum over
/// insertion multisets (3 <= n <= cap) of the correlator series times the
/// slot monomial over the multiset factorials.
pub fn assemble_free_energy(
    caps: &Caps,
    mu: usize,
    mut value: impl FnMut(&[(u32, usize)], u32) -> Result<BigRational, PrimformError>,
) -> Result<LaurentPoly, PrimformError> {
    let mut slots: Vec<(u32, usize)> = Vec::new();
    for d in 0..=caps.max_level {
        for a in 0..mu {
            slots.push((d, a));
        }
    }
    let mut acc = LaurentPoly::zero();
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    while let Some((current, from)) = stack.pop() {
        if current.len() >= 3 {
            let ins: Vec<(u32, usize)> = current.iter().map(|&i| slots[i]).collect();
            let mut series = qs_zero();
            for beta in 0..=caps.max_q {
                let v = value(&ins, beta)?;
                if !v.is_zero() {
                    series.insert(beta, v);
                }
            }
            if !series.is_empty() {
                let mut mult: BTreeMap<usize, u64> = BTreeMap::new();
                for &i in &current {
                    *mult.entry(i).or_insert(0) += 1;
                }
                let mut denom = BigRational::one();
                for (_, m) in mult {
                    for k in 2..=m {
                        denom *= BigRational::from_integer(BigInt::from(k));
                    }
                }
                let mut mono = LaurentPoly::constant(
                    ExactScalar::from_rational(denom.recip()).mul(&qseries_to_scalar(&series)),
                );
                for &i in &current {
                    let (d, a) = slots[i];
                    mono = mono.mul(&LaurentPoly::var(&slot_var(a, d)));
                }
                acc = acc.add(&mono);
            }
        }
        if current.len() < caps.max_insertions {
            for i in from..slots.len() {
                let mut next = current.clone();
                next.push(i);
                stack.push((next, i));
            }
        }
    }
    Ok(acc)
}

/// Result of the free-energy comparison.
#[derive(Clone, Debug)]
pub struct MirrorComparison {
    pub caps: Caps,
    /// Largest absolute coefficient of the difference (0 on success).
    pub max_discrepancy: BigRational,
    /// Number of compared nonzero difference monomials.
    pub monomials_compared: usize,
    pub phi_st: LaurentPoly,
    pub phi_grav_pulled_back: LaurentPoly,
}

impl MirrorComparison {
    /// Expand `Phi_st(t) - Phi_grav(t~(t))` up to the caps, ignoring total
    /// degree <= 2, and report the largest absolute coefficient.
    pub fn compare(lg: &LGSystem, caps: &Caps) -> Result<Self, PrimformError> {
        let fd = FrobeniusData::build(lg)?;
        let b = BSide::new(fd, caps.max_level + 1)?;
        let a = ASide::new();
        Self::compare_with(&b, &a, caps, false)
    }

    /// As `compare`, optionally corrupting the B-side data by `+q` on the
    /// triple-point sector (a sensitivity control).
    pub fn compare_with(
        b: &BSide,
        a: &ASide,
        caps: &Caps,
        corrupt: bool,
    ) -> Result<Self, PrimformError> {
        let mu = b.fd.mu;
        let phi_st = assemble_free_energy(caps, mu, |ins, beta| Ok(a.correlator(ins, beta)))?;
        // The LG-calibrated free energy: the reconstructed tower composed
        // with the inverse mirror map.
        let reconstructed = assemble_free_energy(caps, mu, |ins, beta| b.correlator(ins, beta))?;
        let map = mirror_map(b, caps)?;
        let inv = invert_mirror_map(&map)?;
        let mut phi_grav = drop_high_q(&compose_slots(&reconstructed, &inv)?, caps.max_q);
        if corrupt {
            let bump = LaurentPoly::var_pow(&slot_var(1, 0), 3)
                .scale(&ExactScalar::param("q").mul(&ExactScalar::ratio(1, 6)));
            phi_grav = phi_grav.add(&bump);
        }
        let mut pulled = compose_slots(&phi_grav, &map)?;
        let slot_names: Vec<String> = pulled
            .vars()
            .iter()
            .filter(|v| v.starts_with('T'))
            .cloned()
            .collect();
        let max_n = caps.max_insertions as i64;
        pulled = pulled.filter_total_degree(&slot_names, |deg| deg <= max_n);
        pulled = drop_high_q(&pulled, caps.max_q);
        let st_names: Vec<String> = phi_st
            .vars()
            .iter()
            .filter(|v| v.starts_with('T'))
            .cloned()
            .collect();
        let phi_st_t = drop_high_q(
            &phi_st.filter_total_degree(&st_names, |deg| deg <= max_n),
            caps.max_q,
        );

        let diff = phi_st_t.sub(&pulled);
        let names: Vec<String> = diff
            .vars()
            .iter()
            .filter(|v| v.starts_with('T'))
            .cloned()
            .collect();
        let diff = diff.filter_total_degree(&names, |deg| deg >= 3);
        let mut max_abs = BigRational::zero();
        let mut count = 0usize;
        for (_, c) in diff.terms() {
            for (_, r) in c.terms() {
                let a = if r < &BigRational::zero() {
                    -r.clone()
                } else {
                    r.clone()
                };
                if a > max_abs {
                    max_abs = a;
                }
                count += 1;
            }
        }
        Ok(MirrorComparison {
            caps: *caps,
            max_discrepancy: max_abs,
            monomials_compared: count,
            phi_st: phi_st_t,
            phi_grav_pulled_back: pulled,
        })
    }
}

fn drop_high_q(p: &LaurentPoly, max_q: u32) -> LaurentPoly {
    p.map_coeffs(|c| {
        let mut out = ExactScalar::zero();
        for (m, r) in c.terms() {
            if m.exponent("q") <= max_q as i64 {
                out = out.add(&ExactScalar::monomial(m.clone(), r.clone()));
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn b_side(max_level: u32) -> BSide {
        let fd = FrobeniusData::build(&LGSystem::cp1()).unwrap();
        BSide::new(fd, max_level).unwrap()
    }

    #[test]
    fn deformed_flat_seed_and_level_zero() {
        let b = b_side(1);
        // h_{1,0} = (t0)^2/2 + q E1 - q - q t1 after normalization
        let h10 = &b.h(1, 0).h;
        let q = ExactScalar::param("q");
        let q_e1 = q.mul(&ExactScalar::param("E1"));
        let expected = LaurentPoly::var_pow("t0", 2)
            .scale(&ExactScalar::ratio(1, 2))
            .add(&LaurentPoly::constant(q_e1))
            .sub(&LaurentPoly::constant(q.clone()))
            .sub(&LaurentPoly::var("t1").scale(&q));
        assert_eq!(h10, &expected);
        // records: <sigma_0(O_1)> = q and <sigma_0(O_1) O_1> = q
        assert_eq!(qs_coeff(b.one_point(1, 0), 1), rat(1, 1));
        assert_eq!(qs_coeff(&b.two_point(1, 0, 1).unwrap(), 1), rat(1, 1));
        // h_{0,0} = t0 t1
        assert_eq!(
            &b.h(0, 0).h,
            &LaurentPoly::var("t0").mul(&LaurentPoly::var("t1"))
        );
    }

    #[test]
    fn lowering_property() {
        // d/dt0 h_{l,d} = h_{l,d-1}
        let b = b_side(3);
        let fam = b.fd.lg.family().unwrap();
        for l in 0..2 {
            for d in 1..=3u32 {
                let dh = b.h(l, d).h.derivative("t0", &fam.exp_params);
                assert_eq!(dh, b.h(l, d - 1).h, "lowering fails at ({}, {})", l, d);
            }
        }
    }

    #[test]
    fn trr_pde_holds_identically() {
        let b = b_side(2);
        let fam = b.fd.lg.family().unwrap();
        let coords = &fam.params;
        let exp = &fam.exp_params;
        for l in 0..2 {
            for d in 1..=2u32 {
                for i in 0..2 {
                    for j in 0..2 {
                        let lhs = b
                            .h(l, d)
                            .h
                            .derivative(&coords[i], exp)
                            .derivative(&coords[j], exp);
                        let mut rhs = LaurentPoly::zero();
                        for k in 0..2 {
                            let mut cijk = LaurentPoly::zero();
                            for m in 0..2 {
                                cijk =
                                    cijk.add(&b.fd.c_tensor[i][j][m].scale(&b.fd.eta_inv[m][k]));
                            }
                            rhs =
                                rhs.add(&cijk.mul(&b.h(l, d - 1).h.derivative(&coords[k], exp)));
                        }
                        assert_eq!(lhs, rhs, "TRR fails at l={} d={} ({}, {})", l, d, i, j);
                    }
                }
            }
        }
    }

    #[test]
    fn b_one_point_tower() {
        // <sigma_{2d-2}(O_1)>_{0,d} = 1/(d!)^2 for d = 1..4
        let b = b_side(7);
        for d in 1..=4u32 {
            let series = b.one_point(1, 2 * d - 2);
            let fact: i64 = (1..=d as i64).product();
            assert_eq!(
                qs_coeff(series, d),
                rat(1, fact * fact),
                "one-point tower fails at d = {}",
                d
            );
        }
    }

    #[test]
    fn a_side_small_values() {
        let a = ASide::new();
        // <O1 O1 O1>_{0,1} = 1 from the ring seed
        assert_eq!(a.correlator(&[(0, 1), (0, 1), (0, 1)], 1), rat(1, 1));
        // <O1 O1 O1>_{0,0} = 0 (classical cup)
        assert_eq!(a.correlator(&[(0, 1), (0, 1), (0, 1)], 0), rat(0, 1));
        // <O0 O0 O1>_{0,0} = 1 (the metric)
        assert_eq!(a.correlator(&[(0, 0), (0, 0), (0, 1)], 0), rat(1, 1));
        // <O0 O1 O1>_{0,0} = 0 (degree 2 > 1)
        assert_eq!(a.correlator(&[(0, 0), (0, 1), (0, 1)], 0), rat(0, 1));
        // <O1^4>_1 = 1 by the divisor equation
        assert_eq!(a.correlator(&[(0, 1); 4], 1), rat(1, 1));
    }

    #[test]
    fn a_side_one_point_tower() {
        let a = ASide::new();
        for d in 1..=4u32 {
            let fact: i64 = (1..=d as i64).product();
            assert_eq!(
                a.correlator(&[(2 * d - 2, 1)], d),
                rat(1, fact * fact),
                "A-side tower fails at d = {}",
                d
            );
        }
    }

    #[test]
    fn string_equation_on_a_side() {
        let a = ASide::new();
        for beta in 0..=2u32 {
            for d1 in 0..=2u32 {
                for d2 in 0..=2u32 {
                    let with_id = a.correlator(&[(0, 0), (d1, 1), (d2, 1), (0, 1)], beta);
                    let mut lowered = BigRational::zero();
                    if d1 >= 1 {
                        lowered += a.correlator(&[(d1 - 1, 1), (d2, 1), (0, 1)], beta);
                    }
                    if d2 >= 1 {
                        lowered += a.correlator(&[(d1, 1), (d2 - 1, 1), (0, 1)], beta);
                    }
                    assert_eq!(
                        with_id, lowered,
                        "string fails at ({}, {}, beta {})",
                        d1, d2, beta
                    );
                }
            }
        }
    }

    #[test]
    fn dilaton_equation_on_a_side() {
        let a = ASide::new();
        for beta in 0..=2u32 {
            let x = [(0u32, 1usize), (0, 1), (1, 1)];
            let with_dilaton: Vec<(u32, usize)> = std::iter::once((1u32, 0usize))
                .chain(x.iter().copied())
                .collect();
            let lhs = a.correlator(&with_dilaton, beta);
            let rhs = BigRational::from_integer((x.len() as i64 - 2).into())
                * a.correlator(&x, beta);
            assert_eq!(lhs, rhs, "dilaton fails at beta {}", beta);
        }
    }

    #[test]
    fn divisor_equation_on_a_side() {
        let a = ASide::new();
        for beta in 1..=2u32 {
            let x = [(1u32, 1usize), (0, 1), (0, 1)];
            let with_div: Vec<(u32, usize)> = std::iter::once((0u32, 1usize))
                .chain(x.iter().copied())
                .collect();
            let lhs = a.correlator(&with_div, beta);
            // corrections lower sigma_d(O_a) to sigma_{d-1}(O_a u O_1);
            // O_1 u O_1 = 0, so only the beta-scaling term survives.
            let rhs =
                BigRational::from_integer(BigInt::from(beta)) * a.correlator(&x, beta);
            assert_eq!(lhs, rhs, "divisor fails at beta {}", beta);
        }
    }

    #[test]
    fn mirror_map_on_small_phase_space_is_identity() {
        let b = b_side(4);
        let caps = Caps::default();
        let map = mirror_map(&b, &caps).unwrap();
        let mut point = BTreeMap::new();
        point.insert((0usize, 0u32), ExactScalar::ratio(1, 2));
        point.insert((1usize, 0u32), ExactScalar::from_int(3));
        let out = mirror_map_apply(&map, &point).unwrap();
        assert_eq!(out[&(0, 0)], ExactScalar::ratio(1, 2));
        assert_eq!(out[&(1, 0)], ExactScalar::from_int(3));
        for ((i, d), v) in &out {
            if *d > 0 {
                assert!(v.is_zero(), "slot ({}, {}) nonzero", i, d);
            }
        }
    }

    #[test]
    fn mirror_map_two_point_coefficient() {
        // t with only t^1_1 = 1: t~^0_0 = q
        let b = b_side(4);
        let caps = Caps::default();
        let map = mirror_map(&b, &caps).unwrap();
        let mut point = BTreeMap::new();
        point.insert((1usize, 1u32), ExactScalar::from_int(1));
        let out = mirror_map_apply(&map, &point).unwrap();
        assert_eq!(out[&(0, 0)], ExactScalar::param("q"));
    }

    #[test]
    fn mirror_map_is_affine() {
        let b = b_side(4);
        let caps = Caps::default();
        let map = mirror_map(&b, &caps).unwrap();
        let mut p1 = BTreeMap::new();
        p1.insert((1usize, 1u32), ExactScalar::from_int(2));
        p1.insert((0usize, 2u32), ExactScalar::from_int(5));
        let mut p2 = BTreeMap::new();
        p2.insert((1usize, 1u32), ExactScalar::from_int(-1));
        p2.insert((1usize, 3u32), ExactScalar::ratio(1, 3));
        let sum: BTreeMap<(usize, u32), ExactScalar> = {
            let mut s = p1.clone();
            for (k, v) in &p2 {
                let e = s.entry(*k).or_insert_with(ExactScalar::zero);
                *e = e.add(v);
            }
            s
        };
        let zero = BTreeMap::new();
        let f = |p: &BTreeMap<(usize, u32), ExactScalar>| mirror_map_apply(&map, p).unwrap();
        let lhs = f(&sum);
        let r1 = f(&p1);
        let r2 = f(&p2);
        let r0 = f(&zero);
        for (k, v) in &lhs {
            let expect = r1[k].add(&r2[k]).sub(&r0[k]);
            assert_eq!(v, &expect, "affineness fails at {:?}", k);
        }
    }

    #[test]
    fn caps_admit_rejects_out_of_range_queries() {
        let caps = Caps {
            max_insertions: 3,
            max_level: 2,
            max_q: 2,
        };
        assert!(caps.admit(&[(0, 1), (2, 0)], 2).is_ok());
        assert!(caps.admit(&[(0, 1); 4], 1).is_err());
        assert!(caps.admit(&[(3, 1)], 1).is_err());
        assert!(caps.admit(&[(0, 1)], 3).is_err());
    }

    #[test]
    fn mirror_comparison_small_caps() {
        let caps = Caps {
            max_insertions: 3,
            max_level: 1,
            max_q: 1,
        };
        let cmp = MirrorComparison::compare(&LGSystem::cp1(), &caps).unwrap();
        assert_eq!(
            cmp.max_discrepancy,
            BigRational::zero(),
            "phi_st = {}, pulled = {}",
            cmp.phi_st,
            cmp.phi_grav_pulled_back
        );
    }

    #[test]
    fn corrupted_comparison_is_detected() {
        let caps = Caps {
            max_insertions: 3,
            max_level: 0,
            max_q: 1,
        };
        let fd = FrobeniusData::build(&LGSystem::cp1()).unwrap();
        let b = BSide::new(fd, 1).unwrap();
        let a = ASide::new();
        let cmp = MirrorComparison::compare_with(&b, &a, &caps, true).unwrap();
        assert!(cmp.max_discrepancy > BigRational::zero());
    }
}
