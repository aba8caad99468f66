//! The Frobenius structure of an LG system: residual products, the flat
//! metric, flat coordinates, the potential, Euler field, discriminant, and
//! WDVV residuals.
//!
//! The residual product multiplies direction fields on the critical algebra:
//! `(d_i o d_j)` is the normal form of `(dF/dt_i)(dF/dt_j)` expressed back on
//! the direction basis. The metric pairs direction images under K0. Flat
//! coordinates are solved order by order from eta-constancy with the
//! normalization `t^i = a_i + higher corrections`; the potential is then
//! integrated from the structure constants with all coefficients of total
//! degree at most two set to zero.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

use crate::error::PrimformError;
use crate::lg::{Family, LGSystem, LgKind};
use crate::milnor::{det_poly, gauss_solve, MilnorRing};
use crate::poly::LaurentPoly;
use crate::ratfunc::RatFunc;
use crate::scalar::ExactScalar;
use crate::spectrum::{euler_components, Spectrum};

/// Solve `M x = v` where the columns of `M` are the ring coefficients of the
/// direction fields; converts an element of the critical algebra (given by
/// ring-basis coefficients) into direction-basis coefficients.
fn to_direction_basis(
    ring: &MilnorRing,
    lg: &LGSystem,
    v: &[LaurentPoly],
) -> Result<Vec<LaurentPoly>, PrimformError> {
    let dirs = lg.directions()?;
    let mut cols = Vec::with_capacity(dirs.len());
    for d in &dirs {
        cols.push(ring.normal_form_vector(d)?);
    }
    let n = v.len();
    let mut a: Vec<Vec<RatFunc>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| RatFunc::from_poly(cols[j][i].clone()))
                .collect()
        })
        .collect();
    let mut b: Vec<RatFunc> = v.iter().map(|p| RatFunc::from_poly(p.clone())).collect();
    gauss_solve(&mut a, &mut b)?;
    b.into_iter()
        .map(|r| {
            if r.den() == &LaurentPoly::one() {
                Ok(r.num().clone())
            } else {
                Err(PrimformError::Unsupported(format!(
                    "direction-basis coefficient is not polynomial: {}",
                    r
                )))
            }
        })
        .collect()
}

/// Residual product `d_i o d_j` as a coefficient vector on the direction
/// basis.
pub fn residual_product(
    i: usize,
    j: usize,
    lg: &LGSystem,
    ring: &MilnorRing,
) -> Result<Vec<LaurentPoly>, PrimformError> {
    let dirs = lg.directions()?;
    let prod = dirs[i].mul(&dirs[j]);
    let v = ring.normal_form_vector(&prod)?;
    to_direction_basis(ring, lg, &v)
}

/// `t^0 o d_j`: the normal form of `F^0 * dF/dt_j` on the direction basis.
/// `F^0 = t^0 - F` carries no `t^0` since `dF/dt^0 = 1`.
pub fn t0_product(
    j: usize,
    lg: &LGSystem,
    ring: &MilnorRing,
) -> Result<Vec<LaurentPoly>, PrimformError> {
    let dirs = lg.directions()?;
    let f0 = lg.f_zero()?;
    let v = ring.normal_form_vector(&f0.mul(&dirs[j]))?;
    to_direction_basis(ring, lg, &v)
}

/// The metric `eta_ij = K0(dF/dt_i * g, dF/dt_j * g)` for a primitive-form
/// numerator `g` (the class `g * volume`), as polynomials in the parameters.
pub fn metric_eta(
    lg: &LGSystem,
    ring: &MilnorRing,
    g: &LaurentPoly,
) -> Result<Vec<Vec<LaurentPoly>>, PrimformError> {
    let dirs = lg.directions()?;
    let n = dirs.len();
    let mut eta = vec![vec![LaurentPoly::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = ring.k0_poly(&dirs[i].mul(g), &dirs[j].mul(g), lg)?;
            eta[i][j] = v.clone();
            eta[j][i] = v;
        }
    }
    Ok(eta)
}

fn eta_constant_part(eta: &[Vec<LaurentPoly>]) -> Result<Vec<Vec<ExactScalar>>, PrimformError> {
    eta.iter()
        .map(|row| row.iter().map(|p| p.constant_term()).map(Ok).collect())
        .collect()
}

fn eta_is_constant(eta: &[Vec<LaurentPoly>]) -> bool {
    eta.iter()
        .flatten()
        .all(|p| p.is_zero() || (p.num_terms() == 1 && p.terms().next().unwrap().0.is_empty()))
}

/// The weighted degrees of the flat coordinates (used to grade corrections).
fn coordinate_degrees(lg: &LGSystem, ring: &MilnorRing) -> Result<Vec<BigRational>, PrimformError> {
    let sp = Spectrum::compute(lg, ring, None)?;
    Ok(sp.degrees)
}

/// The flat coordinate change: returns expressions `a_i(t)` (old parameters
/// in terms of new flat coordinates), one per parameter, with
/// `a_i = t_i + corrections`. Identity when eta is already constant.
pub fn flat_coordinates(
    lg: &LGSystem,
    ring: &MilnorRing,
    g: &LaurentPoly,
) -> Result<Vec<LaurentPoly>, PrimformError> {
    let fam = lg.family()?;
    let identity: Vec<LaurentPoly> = fam.params.iter().map(|p| LaurentPoly::var(p)).collect();
    let eta = metric_eta(lg, ring, g)?;
    if eta_is_constant(&eta) {
        return Ok(identity);
    }
    let degrees = coordinate_degrees(lg, ring)?;
    // Candidate correction monomials per coordinate: same weighted degree,
    // at least two factors, built from t^1..t^{mu-1}.
    let mu = fam.params.len();
    let mut candidates: Vec<Vec<BTreeMap<usize, u32>>> = vec![Vec::new(); mu];
    for i in 0..mu {
        let cands = monomials_of_weight(&degrees, &degrees[i], mu);
        for m in cands {
            let total: u32 = m.values().sum();
            if total >= 2 {
                candidates[i].push(m);
            }
        }
    }
    let max_stage: u32 = candidates
        .iter()
        .flatten()
        .map(|m| m.values().sum())
        .max()
        .unwrap_or(1);
    let mut change = identity;
    for stage in 2..=max_stage {
        let mut unknown_names = Vec::new();
        let mut trial = change.clone();
        for i in 0..mu {
            for (ci, m) in candidates[i].iter().enumerate() {
                let total: u32 = m.values().sum();
                if total != stage {
                    continue;
                }
                let uname = format!("_u{}_{}", i, ci);
                let mut mono = LaurentPoly::var(&uname);
                for (j, e) in m {
                    mono = mono.mul(&LaurentPoly::var_pow(&fam.params[*j], *e as i64));
                }
                trial[i] = trial[i].add(&mono);
                unknown_names.push(uname);
            }
        }
        if unknown_names.is_empty() {
            continue;
        }
        let lg_trial = substitute_family(lg, &trial)?;
        let ring_trial = MilnorRing::build(&lg_trial)?;
        let eta_trial = metric_eta(&lg_trial, &ring_trial, g)?;
        // Collect affine equations in the unknowns from coefficients of
        // parameter monomials of total degree stage-1.
        let mut rows: Vec<(BTreeMap<String, BigRational>, BigRational)> = Vec::new();
        for row in &eta_trial {
            for entry in row {
                collect_affine_equations(entry, &fam.params, &unknown_names, (stage - 1) as i64, &mut rows);
            }
        }
        let solution = solve_affine(&rows, &unknown_names).map_err(|detail| {
            PrimformError::FlatSolver {
                order: stage as usize,
                detail,
            }
        })?;
        // Substitute solved unknowns into the change.
        for i in 0..mu {
            let mut c = trial[i].clone();
            for (u, val) in &solution {
                c = c.subst(u, &LaurentPoly::constant(ExactScalar::from_rational(val.clone())))?;
            }
            change[i] = c;
        }
    }
    // Final verification.
    let lg_flat = substitute_family(lg, &change)?;
    let ring_flat = MilnorRing::build(&lg_flat)?;
    let eta_flat = metric_eta(&lg_flat, &ring_flat, g)?;
    if !eta_is_constant(&eta_flat) {
        return Err(PrimformError::FlatSolver {
            order: max_stage as usize,
            detail: "eta not constant after all correction stages".into(),
        });
    }
    Ok(change)
}

/// All monomials in coordinates `1..mu-1` whose weighted degree equals
/// `target` (exponents bounded by the degree ratio).
fn monomials_of_weight(
    degrees: &[BigRational],
    target: &BigRational,
    mu: usize,
) -> Vec<BTreeMap<usize, u32>> {
    let mut out = Vec::new();
    let mut current: BTreeMap<usize, u32> = BTreeMap::new();
    fn rec(
        degrees: &[BigRational],
        target: &BigRational,
        from: usize,
        mu: usize,
        current: &mut BTreeMap<usize, u32>,
        out: &mut Vec<BTreeMap<usize, u32>>,
    ) {
        if target.is_zero() {
            out.push(current.clone());
            return;
        }
        if target.is_negative() || from >= mu {
            return;
        }
        for j in from..mu {
            if degrees[j].is_zero() || degrees[j].is_negative() {
                continue;
            }
            if &degrees[j] <= target {
                *current.entry(j).or_insert(0) += 1;
                let rest = target - &degrees[j];
                rec(degrees, &rest, j, mu, current, out);
                let e = current.get_mut(&j).unwrap();
                *e -= 1;
                if *e == 0 {
                    current.remove(&j);
                }
            }
        }
    }
    rec(degrees, target, 1, mu, &mut current, &mut out);
    out
}

/// Substitute a coordinate change `a_i = change_i(t)` into the family.
pub fn substitute_family(
    lg: &LGSystem,
    change: &[LaurentPoly],
) -> Result<LGSystem, PrimformError> {
    let fam = lg.family()?;
    // Rename old params to temporaries, then substitute expressions in the
    // (re-used) names.
    let mut f = fam.f_family.clone();
    let tmp_names: Vec<String> = (0..fam.params.len()).map(|i| format!("_old{}", i)).collect();
    for (p, tmp) in fam.params.iter().zip(&tmp_names) {
        f = f.subst(p, &LaurentPoly::var(tmp))?;
    }
    for (tmp, expr) in tmp_names.iter().zip(change) {
        f = f.subst(tmp, expr)?;
    }
    let mut out = lg.clone();
    out.family = Some(Family {
        params: fam.params.clone(),
        f_family: f,
        exp_params: fam.exp_params.clone(),
        basis_monomials: fam.basis_monomials.clone(),
    });
    Ok(out)
}

/// Collect affine equations (in `_u*` unknowns) from the coefficient of each
/// parameter monomial of the given total degree.
fn collect_affine_equations(
    entry: &LaurentPoly,
    params: &[String],
    unknowns: &[String],
    degree: i64,
    rows: &mut Vec<(BTreeMap<String, BigRational>, BigRational)>,
) {
    // Group terms by parameter monomial; each group yields:
    //   constant + sum coeff_u * u = 0.
    let mut groups: BTreeMap<Vec<(String, i64)>, (BTreeMap<String, BigRational>, BigRational)> =
        BTreeMap::new();
    for (mono, c) in entry.terms() {
        let t_part: Vec<(String, i64)> = mono
            .iter()
            .filter(|(v, _)| params.contains(v))
            .map(|(v, e)| (v.clone(), *e))
            .collect();
        let u_part: Vec<(String, i64)> = mono
            .iter()
            .filter(|(v, _)| unknowns.contains(v))
            .map(|(v, e)| (v.clone(), *e))
            .collect();
        let t_degree: i64 = t_part.iter().map(|(_, e)| e).sum();
        if t_degree != degree {
            continue;
        }
        let Some(c) = c.as_rational() else { continue };
        let slot = groups
            .entry(t_part)
            .or_insert_with(|| (BTreeMap::new(), BigRational::zero()));
        match u_part.len() {
            0 => slot.1 += c,
            1 if u_part[0].1 == 1 => {
                let e = slot.0.entry(u_part[0].0.clone()).or_insert_with(BigRational::zero);
                *e += c;
            }
            _ => {
                // Higher-order unknown terms cannot reach this degree at the
                // current stage; ignore them (they are handled later stages).
            }
        }
    }
    for (_, (coeffs, constant)) in groups {
        if coeffs.is_empty() && constant.is_zero() {
            continue;
        }
        rows.push((coeffs, constant));
    }
}

fn solve_affine(
    rows: &[(BTreeMap<String, BigRational>, BigRational)],
    unknowns: &[String],
) -> Result<Vec<(String, BigRational)>, String> {
    let n = unknowns.len();
    let mut mat: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    for (coeffs, c) in rows {
        let mut row = vec![BigRational::zero(); n];
        for (u, v) in coeffs {
            let idx = unknowns.iter().position(|w| w == u).unwrap();
            row[idx] = v.clone();
        }
        mat.push(row);
        rhs.push(-c.clone());
    }
    // Gaussian elimination; free unknowns default to zero.
    let mut solution = vec![BigRational::zero(); n];
    let mut pivot_rows: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; mat.len()];
    for col in 0..n {
        let Some(r) = (0..mat.len()).find(|&r| !used[r] && !mat[r][col].is_zero()) else {
            continue;
        };
        used[r] = true;
        pivot_rows[col] = Some(r);
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
        if let Some(r) = pivot_rows[col] {
            solution[col] = rhs[r].clone();
        }
    }
    // Consistency: all rows must be satisfied.
    for (r, u) in used.iter().enumerate() {
        if !*u && !rhs[r].is_zero() {
            return Err(format!("inconsistent equation with residual {}", rhs[r]));
        }
    }
    Ok(unknowns.iter().cloned().zip(solution).collect())
}

/// The assembled Frobenius data of an LG system in flat coordinates.
#[derive(Clone, Debug)]
pub struct FrobeniusData {
    /// Flat coordinate names (t0 first).
    pub coords: Vec<String>,
    /// Old parameters in terms of flat coordinates.
    pub coordinate_change: Vec<LaurentPoly>,
    /// The flat system (family rewritten in flat coordinates).
    pub lg: LGSystem,
    pub ring: MilnorRing,
    /// Constant metric.
    pub eta: Vec<Vec<ExactScalar>>,
    /// Inverse metric.
    pub eta_inv: Vec<Vec<ExactScalar>>,
    /// Structure constants C_{ijk}(t), totally symmetric.
    pub c_tensor: Vec<Vec<Vec<LaurentPoly>>>,
    /// The potential, with degree <= 2 coefficients zeroed.
    pub potential: LaurentPoly,
    /// Euler field components on d/dt^i.
    pub euler: Vec<LaurentPoly>,
    /// Exponent matrix diag(alpha_i) from the spectrum conventions.
    pub n_matrix: Vec<Vec<BigRational>>,
    /// Discriminant in flat coordinates.
    pub discriminant: LaurentPoly,
    pub spectrum: Spectrum,
    pub mu: usize,
    /// Convention notes accumulated during the build.
    pub notes: Vec<String>,
}

impl FrobeniusData {
    pub fn build(lg_raw: &LGSystem) -> Result<Self, PrimformError> {
        Self::build_with_numerator(lg_raw, &LaurentPoly::one())
    }

    /// Build with a primitive-form numerator `g` (class `g * volume`).
    pub fn build_with_numerator(
        lg_raw: &LGSystem,
        g: &LaurentPoly,
    ) -> Result<Self, PrimformError> {
        let ring_raw = MilnorRing::build(lg_raw)?;
        let change = flat_coordinates(lg_raw, &ring_raw, g)?;
        let lg = substitute_family(lg_raw, &change)?;
        let ring = MilnorRing::build(&lg)?;
        let fam = lg.family()?;
        let coords = fam.params.clone();
        let mu = ring.mu;

        let eta_poly = metric_eta(&lg, &ring, g)?;
        if !eta_is_constant(&eta_poly) {
            return Err(PrimformError::FlatSolver {
                order: 0,
                detail: "metric not constant in flat coordinates".into(),
            });
        }
        let eta = eta_constant_part(&eta_poly)?;
        let eta_inv = invert_scalar_matrix(&eta)?;

        // Structure constants C_ijk = eta(d_i o d_j, d_k).
        let mut c_tensor = vec![vec![vec![LaurentPoly::zero(); mu]; mu]; mu];
        for i in 0..mu {
            for j in i..mu {
                let prod = residual_product(i, j, &lg, &ring)?;
                for k in 0..mu {
                    let mut c = LaurentPoly::zero();
                    for (e, pe) in prod.iter().enumerate() {
                        c = c.add(&pe.scale(&eta[e][k]));
                    }
                    c_tensor[i][j][k] = c.clone();
                    c_tensor[j][i][k] = c;
                }
            }
        }
        // Total symmetry check.
        for i in 0..mu {
            for j in 0..mu {
                for k in 0..mu {
                    if c_tensor[i][j][k] != c_tensor[i][k][j] || c_tensor[i][j][k] != c_tensor[k][j][i] {
                        return Err(PrimformError::Integrability(format!(
                            "C tensor not symmetric at ({}, {}, {})",
                            i, j, k
                        )));
                    }
                }
            }
        }

        let exp_params = fam.exp_params.clone();
        let potential = integrate_potential(&c_tensor, &coords, &exp_params)?;

        let euler = euler_components(&lg, &ring)?;
        let spectrum = Spectrum::compute(&lg, &ring, None)?;
        let n_matrix = (0..mu)
            .map(|i| {
                (0..mu)
                    .map(|j| {
                        if i == j {
                            spectrum.exponents[i].clone()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();

        // Discriminant: determinant of multiplication by F on the critical
        // algebra.
        let mult_f = ring.mult_matrix(&fam.f_family)?;
        let flat: Vec<LaurentPoly> = mult_f.iter().flat_map(|r| r.iter().cloned()).collect();
        let discriminant = det_poly(&flat, mu);

        let mut notes = Vec::new();
        if lg.kind == LgKind::Laurent {
            notes.push(
                "potential integrates to (1/2)(t0)^2 t1 + q e^{t1}; a printed source value \
                 (t0)^2 t1 + q e^{t1} differs by a factor 2 on the mixed term (metric \
                 normalization convention)"
                    .to_string(),
            );
            notes.push(
                "exponent matrix reported from Euler-field degrees (diag(0, -1)); the \
                 Gauss-Manin route induces diag(0, 1), see the verifier report"
                    .to_string(),
            );
        }

        Ok(FrobeniusData {
            coords,
            coordinate_change: change,
            lg,
            ring,
            eta,
            eta_inv,
            c_tensor,
            potential,
            euler,
            n_matrix,
            discriminant,
            spectrum,
            mu,
            notes,
        })
    }

    /// Apply the Euler field as a differential operator.
    pub fn euler_apply(&self, p: &LaurentPoly) -> Result<LaurentPoly, PrimformError> {
        let fam = self.lg.family()?;
        let mut out = LaurentPoly::zero();
        for (i, comp) in self.euler.iter().enumerate() {
            let d = p.derivative(&fam.params[i], &fam.exp_params);
            out = out.add(&comp.mul(&d));
        }
        Ok(out)
    }

    /// Third partial of the potential.
    pub fn c_from_potential(&self, i: usize, j: usize, k: usize) -> Result<LaurentPoly, PrimformError> {
        let fam = self.lg.family()?;
        let e = &fam.exp_params;
        Ok(self
            .potential
            .derivative(&fam.params[i], e)
            .derivative(&fam.params[j], e)
            .derivative(&fam.params[k], e))
    }

    /// WDVV residual polynomials for all index quadruples, computed from the
    /// reconstructed potential: sum_ef (C_abe eta^ef C_fcd - C_ace eta^ef C_fbd).
    pub fn wdvv_residuals(&self) -> Result<Vec<((usize, usize, usize, usize), LaurentPoly)>, PrimformError> {
        wdvv_residuals_of(&self.potential, self)
    }
}

/// WDVV residuals of an arbitrary candidate potential against this system's
/// metric (used both for the certified potential and corrupted controls).
pub fn wdvv_residuals_of(
    potential: &LaurentPoly,
    fd: &FrobeniusData,
) -> Result<Vec<((usize, usize, usize, usize), LaurentPoly)>, PrimformError> {
    let fam = fd.lg.family()?;
    let e = &fam.exp_params;
    let mu = fd.mu;
    let mut third = vec![vec![vec![LaurentPoly::zero(); mu]; mu]; mu];
    for i in 0..mu {
        for j in 0..mu {
            for k in 0..mu {
                third[i][j][k] = potential
                    .derivative(&fam.params[i], e)
                    .derivative(&fam.params[j], e)
                    .derivative(&fam.params[k], e);
            }
        }
    }
    let mut out = Vec::new();
    for a in 0..mu {
        for b in 0..mu {
            for c in 0..mu {
                for d in 0..mu {
                    let mut resid = LaurentPoly::zero();
                    for ee in 0..mu {
                        for f in 0..mu {
                            let t1 = third[a][b][ee].mul(&third[f][c][d]).scale(&fd.eta_inv[ee][f]);
                            let t2 = third[a][c][ee].mul(&third[f][b][d]).scale(&fd.eta_inv[ee][f]);
                            resid = resid.add(&t1).sub(&t2);
                        }
                    }
                    out.push(((a, b, c, d), resid));
                }
            }
        }
    }
    Ok(out)
}

pub fn invert_scalar_matrix(m: &[Vec<ExactScalar>]) -> Result<Vec<Vec<ExactScalar>>, PrimformError> {
    let n = m.len();
    let mut a: Vec<Vec<RatFunc>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| RatFunc::from_poly(LaurentPoly::constant(s.clone())))
                .collect()
        })
        .collect();
    let mut inv: Vec<Vec<ExactScalar>> = vec![vec![ExactScalar::zero(); n]; n];
    for col in 0..n {
        let mut a2 = a.clone();
        let mut b: Vec<RatFunc> = (0..n)
            .map(|i| {
                RatFunc::from_poly(if i == col {
                    LaurentPoly::one()
                } else {
                    LaurentPoly::zero()
                })
            })
            .collect();
        gauss_solve(&mut a2, &mut b)?;
        for i in 0..n {
            let num = b[i].num();
            if b[i].den() != &LaurentPoly::one() && !num.is_zero() {
                return Err(PrimformError::DegenerateGram(
                    "matrix inverse has non-scalar entries".into(),
                ));
            }
            inv[i][col] = num.constant_term();
        }
    }
    let _ = &mut a;
    Ok(inv)
}

/// Integrate `C_ijk = d_i d_j d_k Phi` exactly, zeroing every coefficient of
/// total degree at most two (exponential-parameter terms are kept whole).
pub fn integrate_potential(
    c_tensor: &[Vec<Vec<LaurentPoly>>],
    coords: &[String],
    exp_params: &[(String, String)],
) -> Result<LaurentPoly, PrimformError> {
    let mu = coords.len();
    // Candidate monomials: from each C_ijk term m, the products
    // m * prod_{l in S} t_l over subsets S of {i,j,k} whose complement
    // consists of exponential-variable indices when m carries that parameter.
    let mut candidates: BTreeSet<(Vec<(String, i64)>, Vec<(String, i64)>)> = BTreeSet::new();
    for i in 0..mu {
        for j in i..mu {
            for k in j..mu {
                for (mono, c) in c_tensor[i][j][k].terms() {
                    for (pm, _) in c.terms() {
                        let param_part: Vec<(String, i64)> =
                            pm.0.iter().map(|(n, e)| (n.clone(), *e)).collect();
                        for subset in subsets(&[i, j, k]) {
                            let dropped: Vec<usize> = [i, j, k]
                                .iter()
                                .copied()
                                .filter(|x| !subset.contains(x))
                                .collect();
                            let drop_ok = dropped.iter().all(|&d| {
                                exp_params.iter().any(|(p, v)| {
                                    v == &coords[d] && param_part.iter().any(|(n, _)| n == p)
                                })
                            });
                            if !drop_ok {
                                continue;
                            }
                            let mut m2: BTreeMap<String, i64> = mono.clone();
                            for &l in &subset {
                                *m2.entry(coords[l].clone()).or_insert(0) += 1;
                            }
                            let key: Vec<(String, i64)> = m2.into_iter().collect();
                            candidates.insert((key, param_part.clone()));
                        }
                    }
                }
            }
        }
    }
    // Close downward in exponential variables: E1^k t1^e sources any t1^{e'}
    // with e' <= e.
    let mut closed: BTreeSet<(Vec<(String, i64)>, Vec<(String, i64)>)> = BTreeSet::new();
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
    // Drop invisible candidates: exponential-free monomials of degree <= 2.
    let visible: Vec<(Vec<(String, i64)>, Vec<(String, i64)>)> = closed
        .into_iter()
        .filter(|(mono, params)| {
            let deg: i64 = mono.iter().map(|(_, e)| e).sum();
            let has_exp = exp_params.iter().any(|(p, _)| params.iter().any(|(n, _)| n == p));
            has_exp || deg >= 3
        })
        .collect();
    // Linear system: coefficients x_M with sum x_M d^3(M) = C.
    let basis_polys: Vec<LaurentPoly> = visible
        .iter()
        .map(|(mono, params)| {
            let mut p = LaurentPoly::constant(scalar_from_signature(params));
            for (v, e) in mono {
                p = p.mul(&LaurentPoly::var_pow(v, *e));
            }
            p
        })
        .collect();
    let nunk = basis_polys.len();
    // Rows: for each (i<=j<=k) and each monomial key appearing anywhere.
    let mut rows: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    for i in 0..mu {
        for j in i..mu {
            for k in j..mu {
                let mut derivs: Vec<LaurentPoly> = Vec::with_capacity(nunk);
                for p in &basis_polys {
                    derivs.push(
                        p.derivative(&coords[i], exp_params)
                            .derivative(&coords[j], exp_params)
                            .derivative(&coords[k], exp_params),
                    );
                }
                let target = &c_tensor[i][j][k];
                let mut keys: BTreeSet<(Vec<(String, i64)>, Vec<(String, i64)>)> = BTreeSet::new();
                let collect_keys = |p: &LaurentPoly, keys: &mut BTreeSet<(Vec<(String, i64)>, Vec<(String, i64)>)>| {
                    for (mono, c) in p.terms() {
                        keys.insert((mono.into_iter().collect(), param_signature(c)));
                    }
                };
                collect_keys(target, &mut keys);
                for d in &derivs {
                    collect_keys(d, &mut keys);
                }
                for key in keys {
                    let coeff_of = |p: &LaurentPoly| -> BigRational {
                        for (mono, c) in p.terms() {
                            let k2: Vec<(String, i64)> = mono.into_iter().collect();
                            if k2 == key.0 && param_signature(c) == key.1 {
                                return rational_magnitude(c);
                            }
                        }
                        BigRational::zero()
                    };
                    let row: Vec<BigRational> = derivs.iter().map(coeff_of).collect();
                    let rhs = coeff_of(target);
                    if row.iter().all(|x| x.is_zero()) && rhs.is_zero() {
                        continue;
                    }
                    rows.push((row, rhs));
                }
            }
        }
    }
    let xs = solve_linear_rows(&rows, nunk)
        .map_err(PrimformError::Integrability)?;
    let mut potential = LaurentPoly::zero();
    for (x, p) in xs.iter().zip(&basis_polys) {
        potential = potential.add(&p.scale_rat(x));
    }
    // Hard verification: third derivatives reproduce C exactly.
    for i in 0..mu {
        for j in 0..mu {
            for k in 0..mu {
                let d = potential
                    .derivative(&coords[i], exp_params)
                    .derivative(&coords[j], exp_params)
                    .derivative(&coords[k], exp_params);
                if d != c_tensor[i][j][k] {
                    return Err(PrimformError::Integrability(format!(
                        "d3 Phi mismatch at ({}, {}, {}): {} vs {}",
                        i, j, k, d, c_tensor[i][j][k]
                    )));
                }
            }
        }
    }
    Ok(potential)
}

fn param_signature(c: &ExactScalar) -> Vec<(String, i64)> {
    // All terms of in-scope coefficients share one parameter monomial.
    c.terms()
        .next()
        .map(|(m, _)| m.0.iter().map(|(k, v)| (k.clone(), *v)).collect())
        .unwrap_or_default()
}

fn scalar_from_signature(sig: &[(String, i64)]) -> ExactScalar {
    let mut m = crate::scalar::ParamMono::one();
    for (n, e) in sig {
        m = m.mul(&crate::scalar::ParamMono::var(n).pow(*e));
    }
    ExactScalar::monomial(m, BigRational::one())
}

fn rational_magnitude(c: &ExactScalar) -> BigRational {
    c.terms()
        .next()
        .map(|(_, r)| r.clone())
        .unwrap_or_else(BigRational::zero)
}

fn solve_linear_rows(
    rows: &[(Vec<BigRational>, BigRational)],
    n: usize,
) -> Result<Vec<BigRational>, String> {
    let mut mat: Vec<Vec<BigRational>> = rows.iter().map(|(r, _)| r.clone()).collect();
    let mut rhs: Vec<BigRational> = rows.iter().map(|(_, b)| b.clone()).collect();
    let mut solution = vec![BigRational::zero(); n];
    let mut used = vec![false; mat.len()];
    let mut pivot_for_col: Vec<Option<usize>> = vec![None; n];
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
            return Err(format!("inconsistent integrability system, residual {}", rhs[r]));
        }
    }
    Ok(solution)
}

fn subsets(items: &[usize; 3]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0..8u8 {
        let mut s = Vec::new();
        for (b, &x) in items.iter().enumerate() {
            if mask & (1 << b) != 0 {
                s.push(x);
            }
        }
        out.push(s);
    }
    out
}

/// `mu * Delta - E(Delta)` as a polynomial; zero certifies the homogeneity
/// of the discriminant.
pub fn discriminant_homogeneity_residual(fd: &FrobeniusData) -> Result<LaurentPoly, PrimformError> {
    let e_delta = fd.euler_apply(&fd.discriminant)?;
    let mu = LaurentPoly::constant(ExactScalar::from_int(fd.mu as i64));
    Ok(mu.mul(&fd.discriminant).sub(&e_delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_e1() -> ExactScalar {
        ExactScalar::param("q").mul(&ExactScalar::param("E1"))
    }

    #[test]
    fn cp1_residual_product_matches_source_values() {
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        // d1 o d1 = q E1 d0
        let p11 = residual_product(1, 1, &lg, &ring).unwrap();
        assert_eq!(p11[0], LaurentPoly::constant(q_e1()));
        assert!(p11[1].is_zero());
        // d0 o d1 = d1
        let p01 = residual_product(0, 1, &lg, &ring).unwrap();
        assert!(p01[0].is_zero());
        assert_eq!(p01[1], LaurentPoly::one());
    }

    #[test]
    fn a2_residual_product() {
        // d1 o d1 = -(t1/3) d0 via z^2 = -t1/3
        let lg = LGSystem::a_n(2);
        let ring = MilnorRing::build(&lg).unwrap();
        let p11 = residual_product(1, 1, &lg, &ring).unwrap();
        assert_eq!(p11[0], LaurentPoly::var("t1").scale(&ExactScalar::ratio(-1, 3)));
        assert!(p11[1].is_zero());
    }

    #[test]
    fn cp1_t0_product_matches_source_values() {
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        // t0 o d1 = -2 q E1 d0
        let p1 = t0_product(1, &lg, &ring).unwrap();
        assert_eq!(p1[0], LaurentPoly::constant(q_e1().mul(&ExactScalar::from_int(-2))));
        assert!(p1[1].is_zero());
        // t0 o d0 = t0 d0 - E = -2 d1 (no t0 component: F^0 is t0-free)
        let p0 = t0_product(0, &lg, &ring).unwrap();
        assert!(p0[0].is_zero());
        assert_eq!(p0[1], LaurentPoly::from_int(-2));
    }

    #[test]
    fn cp1_eta_antidiagonal() {
        let lg = LGSystem::cp1();
        let ring = MilnorRing::build(&lg).unwrap();
        let eta = metric_eta(&lg, &ring, &LaurentPoly::one()).unwrap();
        assert!(eta[0][0].is_zero());
        assert_eq!(eta[0][1], LaurentPoly::one());
        assert_eq!(eta[1][0], LaurentPoly::one());
        assert!(eta[1][1].is_zero());
    }

    #[test]
    fn a2_eta_constant() {
        let lg = LGSystem::a_n(2);
        let ring = MilnorRing::build(&lg).unwrap();
        let eta = metric_eta(&lg, &ring, &LaurentPoly::one()).unwrap();
        assert!(eta[0][0].is_zero());
        assert_eq!(eta[0][1], LaurentPoly::constant(ExactScalar::ratio(1, 3)));
        assert!(eta[1][1].is_zero());
        assert!(eta_is_constant(&eta));
    }

    #[test]
    fn flat_change_identity_for_cp1_and_a2() {
        for lg in [LGSystem::cp1(), LGSystem::a_n(2)] {
            let ring = MilnorRing::build(&lg).unwrap();
            let change = flat_coordinates(&lg, &ring, &LaurentPoly::one()).unwrap();
            let fam = lg.family().unwrap();
            for (c, p) in change.iter().zip(&fam.params) {
                assert_eq!(c, &LaurentPoly::var(p), "{} change not identity", lg.name);
            }
        }
    }

    #[test]
    fn a3_flat_change_oracle() {
        // t0 = a0 - a2^2/8 means a0 = t0 + (t2)^2 / 8, others identity.
        let lg = LGSystem::a_n(3);
        let ring = MilnorRing::build(&lg).unwrap();
        let change = flat_coordinates(&lg, &ring, &LaurentPoly::one()).unwrap();
        let expected0 = LaurentPoly::var("t0").add(
            &LaurentPoly::var_pow("t2", 2).scale(&ExactScalar::ratio(1, 8)),
        );
        assert_eq!(change[0], expected0);
        assert_eq!(change[1], LaurentPoly::var("t1"));
        assert_eq!(change[2], LaurentPoly::var("t2"));
    }

    #[test]
    fn cp1_potential() {
        // Phi = (1/2)(t0)^2 t1 + q E1
        let fd = FrobeniusData::build(&LGSystem::cp1()).unwrap();
        let expected = LaurentPoly::var_pow("t0", 2)
            .mul(&LaurentPoly::var("t1"))
            .scale(&ExactScalar::ratio(1, 2))
            .add(&LaurentPoly::constant(q_e1()));
        assert_eq!(fd.potential, expected);
    }

    #[test]
    fn a2_potential() {
        // Phi = (1/6)(t0)^2 t1 - (t1)^4 / 216
        let fd = FrobeniusData::build(&LGSystem::a_n(2)).unwrap();
        let expected = LaurentPoly::var_pow("t0", 2)
            .mul(&LaurentPoly::var("t1"))
            .scale(&ExactScalar::ratio(1, 6))
            .add(&LaurentPoly::var_pow("t1", 4).scale(&ExactScalar::ratio(-1, 216)));
        assert_eq!(fd.potential, expected);
    }

    #[test]
    fn cp1_euler_and_discriminant() {
        let fd = FrobeniusData::build(&LGSystem::cp1()).unwrap();
        assert_eq!(fd.euler[0], LaurentPoly::var("t0"));
        assert_eq!(fd.euler[1], LaurentPoly::from_int(2));
        // Delta = (t0)^2 - 4 q E1
        let expected = LaurentPoly::var_pow("t0", 2)
            .sub(&LaurentPoly::constant(q_e1().mul(&ExactScalar::from_int(4))));
        assert_eq!(fd.discriminant, expected);
        assert!(discriminant_homogeneity_residual(&fd).unwrap().is_zero());
    }

    #[test]
    fn a2_discriminant() {
        // Delta = (t0)^2 + 4 (t1)^3 / 27
        let fd = FrobeniusData::build(&LGSystem::a_n(2)).unwrap();
        let expected = LaurentPoly::var_pow("t0", 2)
            .add(&LaurentPoly::var_pow("t1", 3).scale(&ExactScalar::ratio(4, 27)));
        assert_eq!(fd.discriminant, expected);
        assert!(discriminant_homogeneity_residual(&fd).unwrap().is_zero());
    }

    #[test]
    fn a1_discriminant_trivial() {
        let fd = FrobeniusData::build(&LGSystem::a_n(1)).unwrap();
        assert_eq!(fd.discriminant, LaurentPoly::var("t0"));
        assert!(discriminant_homogeneity_residual(&fd).unwrap().is_zero());
    }

    #[test]
    fn wdvv_zero_for_cp1_and_a3() {
        for lg in [LGSystem::cp1(), LGSystem::a_n(3)] {
            let fd = FrobeniusData::build(&lg).unwrap();
            for ((a, b, c, d), r) in fd.wdvv_residuals().unwrap() {
                assert!(r.is_zero(), "{} WDVV residual at ({},{},{},{}): {}", lg.name, a, b, c, d, r);
            }
        }
    }

    #[test]
    fn wdvv_detector_fires_on_corruption() {
        let fd = FrobeniusData::build(&LGSystem::a_n(3)).unwrap();
        let corrupted = fd.potential.add(
            &LaurentPoly::var_pow("t1", 3).mul(&LaurentPoly::var_pow("t2", 3)),
        );
        let resids = wdvv_residuals_of(&corrupted, &fd).unwrap();
        assert!(resids.iter().any(|(_, r)| !r.is_zero()));
    }

    #[test]
    fn cp1_euler_quasi_homogeneity_of_potential() {
        // E(Phi) - 2 Phi has total degree <= 2 in (t0, t1).
        let fd = FrobeniusData::build(&LGSystem::cp1()).unwrap();
        let e_phi = fd.euler_apply(&fd.potential).unwrap();
        let resid = e_phi.sub(&fd.potential.scale(&ExactScalar::from_int(2)));
        let vars = vec!["t0".to_string(), "t1".to_string()];
        let high = resid.filter_total_degree(&vars, |d| d >= 3);
        assert!(high.is_zero(), "residual {}", resid);
    }

    #[test]
    fn flat_solver_idempotent_on_flat_system() {
        // Running the solver on the already-flattened A3 system returns the
        // identity change.
        let fd = FrobeniusData::build(&LGSystem::a_n(3)).unwrap();
        let ring = MilnorRing::build(&fd.lg).unwrap();
        let change = flat_coordinates(&fd.lg, &ring, &LaurentPoly::one()).unwrap();
        let fam = fd.lg.family().unwrap();
        for (c, p) in change.iter().zip(&fam.params) {
            assert_eq!(c, &LaurentPoly::var(p));
        }
    }

    #[test]
    fn frobenius_axioms_on_basis() {
        for lg in [LGSystem::cp1(), LGSystem::a_n(2), LGSystem::a_n(3)] {
            let fd = FrobeniusData::build(&lg).unwrap();
            let mu = fd.mu;
            // eta(a o b, c) = eta(a, b o c) and C_{0jk} = eta_{jk}.
            for j in 0..mu {
                for k in 0..mu {
                    assert_eq!(
                        fd.c_tensor[0][j][k],
                        LaurentPoly::constant(fd.eta[j][k].clone()),
                        "identity axiom fails for {}",
                        lg.name
                    );
                }
            }
            for a in 0..mu {
                for b in 0..mu {
                    for c in 0..mu {
                        // associativity via structure constants:
                        // sum_e C_ab^e C_ec^d = sum_e C_bc^e C_ae^d for all d
                        // is covered by wdvv test; here check commutativity.
                        assert_eq!(fd.c_tensor[a][b][c], fd.c_tensor[b][a][c]);
                    }
                }
            }
        }
    }
}
