//! Localized Gauss-Manin calculus on rational representatives and the
//! mechanical verification of the five primitive-form conditions.
//!
//! A class is `num / J^p` times the volume token, where `J` is `theta F`
//! (Laurent kind, volume `dz/z`) or `F_z` (polynomial kind, volume `dz`).
//! The covariant derivative acts by
//!
//! `nabla_i [phi w] = [(d_i phi) w] - [D((d_iF phi) / J) w]`,
//!
//! `D` the logarithmic derivative for Laurent kind and `d/dz` otherwise;
//! `t^0`-multiplication is multiplication by `F^0 = t^0 - F`. A class is
//! zero exactly when its reduced numerator is `c(t) * J` with `c` free of
//! the fiber variable; that line is killed by every `nabla` and is
//! K0-orthogonal to everything, so the quotient is consistent with the
//! pairings. The inverse of `nabla_0` takes the fiber antiderivative with
//! zero constant term in the expansion at infinity, which reproduces the
//! `d_iF`-pattern for the derivatives of the primitive form.

use num_rational::BigRational;

use crate::error::PrimformError;
use crate::frobenius::{residual_product, t0_product};
use crate::lg::{LGSystem, LgKind};
use crate::milnor::{det_poly, MilnorRing};
use crate::poly::LaurentPoly;
use crate::ratfunc::{ExpandAt, RatFunc};
use crate::scalar::ExactScalar;
use crate::spectrum::{euler_components, Spectrum};

/// A cohomology-class representative `num / J^pole` times the volume token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrieskornClass {
    pub num: LaurentPoly,
    pub pole: u32,
}

impl BrieskornClass {
    pub fn regular(num: LaurentPoly) -> Self {
        BrieskornClass { num, pole: 0 }
    }
}

/// Calculus context for one LG system.
pub struct GaussManin<'a> {
    pub lg: &'a LGSystem,
    pub ring: MilnorRing,
    /// `theta F` or `F_z`.
    pub jac: LaurentPoly,
    /// `D(jac)`: the fiber Hessian.
    pub jac_d: LaurentPoly,
    /// Ring inverse of `jac_d`, computed on first use (pole peeling only).
    jac_d_inv: std::cell::OnceCell<LaurentPoly>,
    z: String,
    kind: LgKind,
}

impl<'a> GaussManin<'a> {
    pub fn new(lg: &'a LGSystem) -> Result<Self, PrimformError> {
        let ring = MilnorRing::build(lg)?;
        let z = lg.fiber_var()?.to_string();
        let jac = lg.jacobian_generator()?;
        let jac_d = match lg.kind {
            LgKind::Laurent => jac.log_derivative(&z),
            LgKind::Polynomial => jac.derivative(&z, &[]),
        };
        Ok(GaussManin {
            lg,
            ring,
            jac,
            jac_d,
            jac_d_inv: std::cell::OnceCell::new(),
            z,
            kind: lg.kind,
        })
    }

    fn jac_d_inv(&self) -> Result<&LaurentPoly, PrimformError> {
        if let Some(v) = self.jac_d_inv.get() {
            return Ok(v);
        }
        let inv = self.ring.invert(&self.jac_d)?;
        let _ = self.jac_d_inv.set(inv);
        Ok(self.jac_d_inv.get().unwrap())
    }

    pub fn fiber_var(&self) -> &str {
        &self.z
    }

    fn d_op(&self, p: &LaurentPoly) -> LaurentPoly {
        match self.kind {
            LgKind::Laurent => p.log_derivative(&self.z),
            LgKind::Polynomial => p.derivative(&self.z, &[]),
        }
    }

    /// Divide out `J` from the numerator while possible.
    pub fn reduce(&self, c: &BrieskornClass) -> BrieskornClass {
        let mut num = c.num.clone();
        let mut pole = c.pole;
        while pole > 0 && !num.is_zero() {
            match num.exact_div(&self.jac, &self.z) {
                Ok(q) => {
                    num = q;
                    pole -= 1;
                }
                Err(_) => break,
            }
        }
        if num.is_zero() {
            pole = 0;
        }
        BrieskornClass { num, pole }
    }

    /// Canonical representative: reduce the pole, then remove the zero-line
    /// component `c(t) * J` from regular numerators.
    pub fn canonical(&self, c: &BrieskornClass) -> Result<BrieskornClass, PrimformError> {
        let red = self.reduce(c);
        if red.pole > 0 || red.num.is_zero() {
            return Ok(red);
        }
        let (q, _r) = red.num.div_rem_in(&self.jac, &self.z)?;
        // Fiber-free part of the quotient spans the zero class.
        let q0 = q
            .coeffs_in(&self.z)
            .get(&0)
            .cloned()
            .unwrap_or_else(LaurentPoly::zero);
        if q0.is_zero() {
            return Ok(red);
        }
        Ok(BrieskornClass {
            num: red.num.sub(&q0.mul(&self.jac)),
            pole: 0,
        })
    }

    pub fn is_zero_class(&self, c: &BrieskornClass) -> Result<bool, PrimformError> {
        Ok(self.canonical(c)?.num.is_zero())
    }

    pub fn classes_equal(
        &self,
        a: &BrieskornClass,
        b: &BrieskornClass,
    ) -> Result<bool, PrimformError> {
        self.is_zero_class(&self.sub(a, b))
    }

    pub fn add(&self, a: &BrieskornClass, b: &BrieskornClass) -> BrieskornClass {
        let p = a.pole.max(b.pole);
        let na = a.num.mul(&self.jac.pow(p - a.pole));
        let nb = b.num.mul(&self.jac.pow(p - b.pole));
        self.reduce(&BrieskornClass {
            num: na.add(&nb),
            pole: p,
        })
    }

    pub fn sub(&self, a: &BrieskornClass, b: &BrieskornClass) -> BrieskornClass {
        self.add(a, &self.scale(b, &ExactScalar::from_int(-1)))
    }

    pub fn scale(&self, a: &BrieskornClass, s: &ExactScalar) -> BrieskornClass {
        BrieskornClass {
            num: a.num.scale(s),
            pole: a.pole,
        }
    }

    /// Multiply by a polynomial in fiber variables and parameters.
    pub fn mul_poly(&self, a: &BrieskornClass, p: &LaurentPoly) -> BrieskornClass {
        self.reduce(&BrieskornClass {
            num: a.num.mul(p),
            pole: a.pole,
        })
    }

    /// Multiply by a coefficient function of the flat coordinates; `t0`
    /// restricts to `F^0` on the fibers.
    pub fn scale_by_function(
        &self,
        a: &BrieskornClass,
        h: &LaurentPoly,
    ) -> Result<BrieskornClass, PrimformError> {
        let f0 = self.lg.f_zero()?;
        let h_restricted = h.subst("t0", &f0)?;
        Ok(self.mul_poly(a, &h_restricted))
    }

    /// `t^0`-multiplication: the class picks up `F^0(z, t')`.
    pub fn t0_mul(&self, a: &BrieskornClass) -> Result<BrieskornClass, PrimformError> {
        let f0 = self.lg.f_zero()?;
        Ok(self.mul_poly(a, &f0))
    }

    /// The Gauss-Manin derivative along the `i`-th flat direction.
    pub fn nabla(&self, i: usize, c: &BrieskornClass) -> Result<BrieskornClass, PrimformError> {
        let fam = self.lg.family()?;
        let ti = &fam.params[i];
        let exp = &fam.exp_params;
        let dirs = self.lg.directions()?;
        let di_f = &dirs[i];
        let p = c.pole;
        // term1 = d_i(num / J^p) = (d_i(num) J - p num d_i(J)) / J^{p+1}
        let di_num = c.num.derivative(ti, exp);
        let di_jac = self.jac.derivative(ti, exp);
        let term1_num = di_num
            .mul(&self.jac)
            .sub(&c.num.mul(&di_jac).scale(&ExactScalar::from_int(p as i64)));
        // inner = d_iF num / J^{p+1}; term2 = D(inner)
        let inner_num = di_f.mul(&c.num);
        let d_inner = self.d_op(&inner_num);
        let term2_num = d_inner.mul(&self.jac).sub(
            &inner_num
                .mul(&self.jac_d)
                .scale(&ExactScalar::from_int((p + 1) as i64)),
        );
        // result = term1 / J^{p+1} - term2 / J^{p+2}
        let num = term1_num.mul(&self.jac).sub(&term2_num);
        Ok(self.reduce(&BrieskornClass { num, pole: p + 2 }))
    }

    /// Derivative along a field with function coefficients.
    pub fn nabla_field(
        &self,
        components: &[LaurentPoly],
        c: &BrieskornClass,
    ) -> Result<BrieskornClass, PrimformError> {
        let mut acc = BrieskornClass::regular(LaurentPoly::zero());
        for (i, h) in components.iter().enumerate() {
            if h.is_zero() {
                continue;
            }
            let d = self.nabla(i, c)?;
            let scaled = self.scale_by_function(&d, h)?;
            acc = self.add(&acc, &scaled);
        }
        Ok(acc)
    }

    /// Fiber antiderivative of `num / J^p` with zero constant term in the
    /// expansion at infinity; errors with the obstructing residue when no
    /// rational antiderivative exists.
    fn antiderivative(&self, c: &BrieskornClass) -> Result<BrieskornClass, PrimformError> {
        let red = self.reduce(c);
        let mut parts: Vec<BrieskornClass> = Vec::new();
        let mut num = red.num.clone();
        let mut pole = red.pole;
        while pole >= 2 {
            // Peel one pole order: A = -num inv(DJ) / (pole - 1) mod J.
            let a_raw = self
                .ring
                .normal_form(&num.mul(self.jac_d_inv()?))?
                .scale(&ExactScalar::ratio(-1, (pole as i64) - 1));
            // D(A / J^{pole-1}) = (D(A) J - (pole-1) A D(J)) / J^pole
            let d_a = self.d_op(&a_raw);
            let matched = d_a.mul(&self.jac).sub(
                &a_raw
                    .mul(&self.jac_d)
                    .scale(&ExactScalar::from_int((pole as i64) - 1)),
            );
            let remainder = num.sub(&matched);
            let next = remainder.exact_div(&self.jac, &self.z).map_err(|e| {
                PrimformError::LogObstruction(format!(
                    "pole reduction failed at order {}: {}",
                    pole, e
                ))
            })?;
            parts.push(BrieskornClass {
                num: a_raw,
                pole: pole - 1,
            });
            num = next;
            pole -= 1;
        }
        if pole == 1 {
            let (q, r) = num.div_rem_in(&self.jac, &self.z)?;
            if !r.is_zero() {
                return Err(PrimformError::LogObstruction(format!(
                    "irreducible proper part ({}) / ({})",
                    r, self.jac
                )));
            }
            num = q;
        }
        // Termwise antiderivative of the polynomial part.
        let poly_part = match self.kind {
            LgKind::Laurent => num.log_antiderivative(&self.z)?,
            LgKind::Polynomial => num.antiderivative(&self.z)?,
        };
        parts.push(BrieskornClass::regular(poly_part));
        // Assemble and normalize the constant at infinity.
        let mut total = BrieskornClass::regular(LaurentPoly::zero());
        for p in &parts {
            total = self.add(&total, p);
        }
        let c_inf = self.infinity_constant(&total)?;
        let normalized = BrieskornClass {
            num: total
                .num
                .sub(&LaurentPoly::constant(c_inf).mul(&self.jac.pow(total.pole))),
            pole: total.pole,
        };
        Ok(self.reduce(&normalized))
    }

    /// Coefficient of `z^0` in the expansion at infinity.
    fn infinity_constant(&self, c: &BrieskornClass) -> Result<ExactScalar, PrimformError> {
        let r = RatFunc::new(c.num.clone(), self.jac.pow(c.pole))?;
        let s = r.laurent_expand(&self.z, ExpandAt::Infinity, 0)?;
        crate::ratfunc::poly_to_scalar(&s.coeff(0))
    }

    /// `nabla_0^{-1}`: the class `[psi w]` with `psi = -J * antiderivative`.
    pub fn nabla0_inverse(&self, c: &BrieskornClass) -> Result<BrieskornClass, PrimformError> {
        let h = self.antiderivative(c)?;
        let psi = self.mul_poly(&h, &self.jac);
        Ok(self.scale(&psi, &ExactScalar::from_int(-1)))
    }

    /// K0 pairing of two regular classes.
    pub fn k0_classes(
        &self,
        a: &BrieskornClass,
        b: &BrieskornClass,
    ) -> Result<ExactScalar, PrimformError> {
        let ra = self.reduce(a);
        let rb = self.reduce(b);
        if ra.pole != 0 || rb.pole != 0 {
            return Err(PrimformError::Unsupported(
                "K0 expects regular representatives".into(),
            ));
        }
        let mut num = ra.num.mul(&rb.num);
        if self.kind == LgKind::Laurent {
            num = num.shift(&self.z, -1);
        }
        let r = RatFunc::new(num, self.jac.clone())?;
        let v = r.critical_residue_sum(&self.z, self.kind == LgKind::Laurent)?;
        crate::ratfunc::poly_to_scalar(&v)
    }
}

/// Total residue of a rational integrand: minus the boundary residues at
/// zero and infinity.
pub fn total_residue(r: &RatFunc, var: &str) -> Result<ExactScalar, PrimformError> {
    r.total_residue(var)
}

/// The K1 pairing of `nabla_i zeta^{(-1)}` and `nabla_j zeta^{(-1)}`:
/// `(-1/2)` times the total residue of `psi_i psi_j / J^2` against the
/// volume. The diagonal is zero by skew-symmetry.
pub fn k1_pairing(
    i: usize,
    j: usize,
    gm: &GaussManin,
    zeta: &BrieskornClass,
) -> Result<ExactScalar, PrimformError> {
    if i == j {
        return Ok(ExactScalar::zero());
    }
    let psi_i = nabla_zeta_minus_one(gm, zeta, i)?;
    let psi_j = nabla_zeta_minus_one(gm, zeta, j)?;
    let mut num = psi_i.num.mul(&psi_j.num);
    if gm.kind == LgKind::Laurent {
        num = num.shift(&gm.z, -1);
    }
    let r = RatFunc::new(num, gm.jac.pow(2))?;
    let v = r.critical_residue_sum(&gm.z, gm.kind == LgKind::Laurent)?;
    let s = crate::ratfunc::poly_to_scalar(&v)?;
    Ok(s.scale(&BigRational::new((-1).into(), 2.into())))
}

/// `nabla_i zeta^{(-1)} = nabla_0^{-1} nabla_i zeta` (by flatness), a
/// regular class following the `d_iF`-pattern.
pub fn nabla_zeta_minus_one(
    gm: &GaussManin,
    zeta: &BrieskornClass,
    i: usize,
) -> Result<BrieskornClass, PrimformError> {
    let d = gm.nabla(i, zeta)?;
    gm.nabla0_inverse(&d)
}

/// One verified condition with an optional failure witness.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

/// The full five-condition verification report.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub conditions: Vec<ConditionReport>,
    /// Minimal exponent from the homogeneity condition.
    pub r: Option<BigRational>,
    /// Exponent matrix induced by the t0-compatibility condition.
    pub n_induced: Option<Vec<Vec<BigRational>>>,
    /// Exponent matrix from the Euler-field degrees.
    pub n_spectrum: Option<Vec<Vec<BigRational>>>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }
}

/// Verify the five primitive-form conditions for the class `zeta`.
pub fn verify_primitive_form(
    lg: &LGSystem,
    zeta: &BrieskornClass,
) -> Result<VerificationReport, PrimformError> {
    let gm = GaussManin::new(lg)?;
    let mu = gm.ring.mu;
    let mut conditions = Vec::new();
    let mut notes = Vec::new();

    // Condition 1: invertibility of the residue image on the critical set.
    let c1 = {
        let red = gm.reduce(zeta);
        if red.pole != 0 {
            ConditionReport {
                name: "invertibility".into(),
                passed: false,
                witness: Some("candidate has poles on the critical set".into()),
            }
        } else {
            let nf = gm.ring.normal_form(&red.num)?;
            let m = gm.ring.mult_matrix(&nf)?;
            let flat: Vec<LaurentPoly> = m.iter().flat_map(|r| r.iter().cloned()).collect();
            let det = det_poly(&flat, mu);
            ConditionReport {
                name: "invertibility".into(),
                passed: !det.is_zero(),
                witness: if det.is_zero() {
                    Some("multiplication determinant vanishes".into())
                } else {
                    None
                },
            }
        }
    };
    conditions.push(c1);

    // Condition 2: first integrability.
    let mut c2_pass = true;
    let mut c2_witness = None;
    'outer: for i in 0..mu {
        for j in (i + 1)..mu {
            let v = k1_pairing(i, j, &gm, zeta)?;
            if !v.is_zero() {
                c2_pass = false;
                c2_witness = Some(format!("K1({}, {}) = {}", i, j, v));
                break 'outer;
            }
        }
    }
    conditions.push(ConditionReport {
        name: "first_integrability".into(),
        passed: c2_pass,
        witness: c2_witness,
    });

    // Condition 3: homogeneity nabla_E zeta = (r - 1) zeta.
    let euler = euler_components(lg, &gm.ring)?;
    let nabla_e = gm.nabla_field(&euler, zeta)?;
    let (c3, r_value) = match proportionality(&gm, &nabla_e, zeta)? {
        Some(lambda) => (
            ConditionReport {
                name: "homogeneity".into(),
                passed: true,
                witness: None,
            },
            Some(&lambda + BigRational::from_integer(1.into())),
        ),
        None => {
            let canon = gm.reduce(&nabla_e);
            (
                ConditionReport {
                    name: "homogeneity".into(),
                    passed: false,
                    witness: Some(format!(
                        "nabla_E zeta = [({}) / J^{}] is not proportional to zeta",
                        canon.num, canon.pole
                    )),
                },
                None,
            )
        }
    };
    conditions.push(c3);

    // Level (-1) and (-2) classes.
    let mut psi: Vec<Option<BrieskornClass>> = Vec::new();
    let mut cap_psi: Vec<Option<BrieskornClass>> = Vec::new();
    for i in 0..mu {
        match nabla_zeta_minus_one(&gm, zeta, i) {
            Ok(p) => {
                let pp = gm.nabla0_inverse(&p).ok();
                psi.push(Some(p));
                cap_psi.push(pp);
            }
            Err(_) => {
                psi.push(None);
                cap_psi.push(None);
            }
        }
    }
    // zeta^{(-1)} itself feeds the j = 0 column of condition 5.
    let zeta_minus_one = gm.nabla0_inverse(zeta).ok();
    if zeta_minus_one.is_none() {
        notes.push(
            "zeta^(-1) has no rational representative (log obstruction); the induced \
             exponent matrix is solved over the remaining columns"
                .to_string(),
        );
    }

    // Condition 4: nabla_i nabla_j zeta^{(-2)} - nabla_{i o j} zeta^{(-1)} = 0.
    let mut c4_pass = true;
    let mut c4_witness = None;
    'c4: for i in 0..mu {
        for j in 0..mu {
            // For j = 0 the object is nabla_i nabla_0 zeta^{(-2)}
            // = nabla_i zeta^{(-1)}, with no level -2 representative needed.
            let lhs = if j == 0 {
                match &psi[i] {
                    Some(p) => p.clone(),
                    None => {
                        c4_pass = false;
                        c4_witness = Some(format!("nabla_{} zeta^(-1) unavailable", i));
                        break 'c4;
                    }
                }
            } else {
                let Some(cap) = &cap_psi[j] else {
                    c4_pass = false;
                    c4_witness = Some(format!("nabla_{} zeta^(-2) unavailable", j));
                    break 'c4;
                };
                gm.nabla(i, cap)?
            };
            let prod = residual_product(i, j, lg, &gm.ring)?;
            let mut rhs = BrieskornClass::regular(LaurentPoly::zero());
            for (k, ck) in prod.iter().enumerate() {
                if ck.is_zero() {
                    continue;
                }
                let Some(pk) = &psi[k] else {
                    c4_pass = false;
                    c4_witness = Some(format!("nabla_{} zeta^(-1) unavailable", k));
                    break 'c4;
                };
                let term = gm.scale_by_function(pk, ck)?;
                rhs = gm.add(&rhs, &term);
            }
            let resid = gm.sub(&lhs, &rhs);
            if !gm.is_zero_class(&resid)? {
                c4_pass = false;
                let canon = gm.canonical(&resid)?;
                c4_witness = Some(format!(
                    "residual at ({}, {}): [({}) / J^{}]",
                    i, j, canon.num, canon.pole
                ));
                break 'c4;
            }
        }
    }
    conditions.push(ConditionReport {
        name: "higher_k_orthogonality".into(),
        passed: c4_pass,
        witness: c4_witness,
    });

    // Condition 5: t0 nabla_i zeta^{(-1)} = nabla_{t0 o d_i} zeta^{(-1)}
    //              + nabla_{N d_i} zeta^{(-2)}; solve for constant N.
    let mut c5_pass = true;
    let mut c5_witness = None;
    let mut n_induced: Vec<Vec<BigRational>> = vec![vec![BigRational::default(); mu]; mu];
    'c5: for i in 0..mu {
        let Some(pi) = &psi[i] else {
            c5_pass = false;
            c5_witness = Some(format!("nabla_{} zeta^(-1) unavailable", i));
            break;
        };
        let lhs = gm.t0_mul(pi)?;
        let t0c = t0_product(i, lg, &gm.ring)?;
        let mut rhs1 = BrieskornClass::regular(LaurentPoly::zero());
        for (k, ck) in t0c.iter().enumerate() {
            if ck.is_zero() {
                continue;
            }
            let Some(pk) = &psi[k] else {
                c5_pass = false;
                c5_witness = Some(format!("nabla_{} zeta^(-1) unavailable", k));
                break 'c5;
            };
            let term = gm.scale_by_function(pk, ck)?;
            rhs1 = gm.add(&rhs1, &term);
        }
        let target = gm.sub(&lhs, &rhs1);
        // Column j of the N-term is nabla_j zeta^{(-2)}; for j = 0 that is
        // zeta^{(-1)} itself.
        let mut columns: Vec<Option<BrieskornClass>> = Vec::with_capacity(mu);
        columns.push(zeta_minus_one.clone());
        for item in cap_psi.iter().take(mu).skip(1) {
            columns.push(item.clone());
        }
        match solve_constant_combination(&gm, &target, &columns)? {
            Some(coeffs) => {
                n_induced[i] = coeffs;
            }
            None => {
                c5_pass = false;
                let canon = gm.canonical(&target)?;
                c5_witness = Some(format!(
                    "row {}: [({}) / J^{}] is not a constant combination of the level -2 \
                     classes",
                    i, canon.num, canon.pole
                ));
                break;
            }
        }
    }
    conditions.push(ConditionReport {
        name: "t0_compatibility".into(),
        passed: c5_pass,
        witness: c5_witness,
    });

    // Spectrum-convention exponent matrix for comparison.
    let spectrum_n = Spectrum::compute(lg, &gm.ring, r_value.clone())
        .ok()
        .map(|sp| {
            (0..mu)
                .map(|i| {
                    (0..mu)
                        .map(|j| {
                            if i == j {
                                sp.exponents[i].clone()
                            } else {
                                BigRational::default()
                            }
                        })
                        .collect()
                })
                .collect::<Vec<Vec<BigRational>>>()
        });
    let n_induced_opt = if c5_pass { Some(n_induced) } else { None };
    if let (Some(a), Some(b)) = (&n_induced_opt, &spectrum_n) {
        if a != b {
            notes.push(
                "the exponent matrix induced by the t0-compatibility condition differs \
                 from the Euler-degree convention (diag(0, 1) vs diag(0, -1) for the \
                 torus mirror); both are reported"
                    .to_string(),
            );
        }
    }

    Ok(VerificationReport {
        conditions,
        r: r_value,
        n_induced: n_induced_opt,
        n_spectrum: spectrum_n,
        notes,
    })
}

/// If `a = lambda * b` modulo the zero line for a rational constant, return
/// the constant.
fn proportionality(
    gm: &GaussManin,
    a: &BrieskornClass,
    b: &BrieskornClass,
) -> Result<Option<BigRational>, PrimformError> {
    match solve_constant_combination(gm, a, &[Some(b.clone())])? {
        Some(v) => Ok(Some(v[0].clone())),
        None => Ok(None),
    }
}

/// Solve `target = sum_j coeffs_j columns_j` with rational constants,
/// modulo the zero line; unavailable columns force zero coefficients.
fn solve_constant_combination(
    gm: &GaussManin,
    target: &BrieskornClass,
    columns: &[Option<BrieskornClass>],
) -> Result<Option<Vec<BigRational>>, PrimformError> {
    use num_traits::Zero;
    let t = gm.canonical(target)?;
    let cols: Vec<Option<BrieskornClass>> = columns
        .iter()
        .map(|c| match c {
            Some(c) => gm.canonical(c).map(Some),
            None => Ok(None),
        })
        .collect::<Result<_, _>>()?;
    let max_pole = cols
        .iter()
        .flatten()
        .map(|c| c.pole)
        .chain(std::iter::once(t.pole))
        .max()
        .unwrap_or(0);
    let lift = |c: &BrieskornClass| -> LaurentPoly { c.num.mul(&gm.jac.pow(max_pole - c.pole)) };
    let t_num = lift(&t);
    let col_nums: Vec<Option<LaurentPoly>> = cols.iter().map(|c| c.as_ref().map(&lift)).collect();

    type Key = (Vec<(String, i64)>, Vec<(String, i64)>);
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
    collect(&t_num, &mut keys);
    for c in col_nums.iter().flatten() {
        collect(c, &mut keys);
    }
    let coeff_of = |p: &LaurentPoly, key: &Key| -> BigRational {
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
    let n = col_nums.len();
    let mut mat: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    for key in &keys {
        mat.push(
            col_nums
                .iter()
                .map(|c| {
                    c.as_ref()
                        .map(|p| coeff_of(p, key))
                        .unwrap_or_else(BigRational::zero)
                })
                .collect(),
        );
        rhs.push(coeff_of(&t_num, key));
    }
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
    for (c, s) in col_nums.iter().zip(&solution) {
        if c.is_none() && !s.is_zero() {
            return Ok(None);
        }
    }
    // Verify the combination exactly (the keyed system ignores the zero
    // line, so confirm through the class quotient).
    let mut check = BrieskornClass {
        num: t_num.neg(),
        pole: max_pole,
    };
    for (c, s) in cols.iter().zip(&solution) {
        if let Some(c) = c {
            let scaled = gm.scale(c, &ExactScalar::from_rational(s.clone()));
            check = gm.add(&check, &scaled);
        }
    }
    if gm.is_zero_class(&check)? {
        Ok(Some(solution))
    } else {
        Ok(None)
    }
}

/// Deterministic pseudo-random Laurent polynomials for property tests.
pub fn pseudo_random_poly(seed: u64, z: &str, laurent: bool) -> LaurentPoly {
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let mut p = LaurentPoly::zero();
    let lo = if laurent { -3i64 } else { 0 };
    for e in lo..=3 {
        let c = (next() % 7) as i64 - 3;
        if c != 0 {
            let mut s = ExactScalar::from_int(c);
            if next() % 2 == 0 {
                s = s.mul(&ExactScalar::param("q"));
            }
            p = p.add(&LaurentPoly::var_pow(z, e).scale(&s));
        }
    }
    p
}
