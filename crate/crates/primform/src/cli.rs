//! Command-line pipelines: parse a system, run the requested computation,
//! print human-readable tables, and optionally write the JSON report.
//!
//! Exit codes: 0 on success, 1 on a mathematical verification failure
//! (the report carries witnesses), 2 on usage or spec-file errors.

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::Zero;
use std::path::PathBuf;

use crate::brieskorn::{verify_primitive_form, BrieskornClass};
use crate::descend::{qs_coeff, ASide, BSide, Caps, MirrorComparison};
use crate::error::PrimformError;
use crate::frobenius::FrobeniusData;
use crate::lg::LGSystem;
use crate::milnor::MilnorRing;
use crate::poly::LaurentPoly;
use crate::report::{
    frobenius_report, ring_report, verification_json, AxiomLedger, CapsJson, ComparisonReport,
    CorrelatorReport, CorrelatorRow, Report, TowerRow,
};
use crate::specfile::LGSpecFile;
use crate::spectrum::{poincare_polynomial, Spectrum};

#[derive(Parser, Debug)]
#[command(
    name = "primform",
    about = "Exact primitive-form machinery for one-variable Landau-Ginzburg models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Milnor ring, residue pairing, spectrum, and Poincare polynomial.
    Ring(SystemArgs),
    /// Flat coordinates, metric, potential, Euler field, discriminant, WDVV.
    Frobenius(SystemArgs),
    /// Verify the five primitive-form conditions.
    Verify(SystemArgs),
    /// Descendant correlator tables from both pipelines plus the axiom ledger.
    Descendants(SystemArgs),
    /// Expand the two genus-0 free energies and compare through the mirror map.
    MirrorCompare(SystemArgs),
}

#[derive(Args, Debug)]
pub struct SystemArgs {
    /// Builtin system name (cp1, a1..a6, x3y3).
    pub name: Option<String>,
    /// JSON spec file describing the system.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Cap on insertions per correlator.
    #[arg(long, default_value_t = 5)]
    pub max_insertions: usize,
    /// Cap on descendant levels.
    #[arg(long, default_value_t = 3)]
    pub max_level: u32,
    /// Cap on the curve degree (power of q).
    #[arg(long, default_value_t = 3)]
    pub max_degree: u32,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

struct LoadedSystem {
    lg: LGSystem,
    zeta: Option<BrieskornClass>,
    label: String,
}

fn load_system(args: &SystemArgs) -> Result<LoadedSystem, PrimformError> {
    match (&args.name, &args.spec) {
        (Some(name), None) => {
            let lg = LGSystem::builtin(name).ok_or_else(|| {
                PrimformError::SpecFile(format!(
                    "unknown builtin '{}'; expected cp1, a1..a9, or x3y3",
                    name
                ))
            })?;
            Ok(LoadedSystem {
                lg,
                zeta: None,
                label: name.clone(),
            })
        }
        (None, Some(path)) => {
            let spec = LGSpecFile::load(path)?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "spec".into());
            let lg = spec.build(&label)?;
            let zeta = spec.zeta_class(&lg)?;
            Ok(LoadedSystem { lg, zeta, label })
        }
        (Some(_), Some(_)) => Err(PrimformError::SpecFile(
            "give either a builtin name or --spec, not both".into(),
        )),
        (None, None) => Err(PrimformError::SpecFile(
            "a builtin name or --spec <file> is required".into(),
        )),
    }
}

fn caps_of(args: &SystemArgs) -> Caps {
    Caps {
        max_insertions: args.max_insertions,
        max_level: args.max_level,
        max_q: args.max_degree,
    }
}

fn emit(report: &Report, json: &Option<PathBuf>) -> Result<(), PrimformError> {
    if let Some(path) = json {
        std::fs::write(path, report.to_json())
            .map_err(|e| PrimformError::SpecFile(format!("{}: {}", path.display(), e)))?;
    }
    Ok(())
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap prints its own help/version through Display.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, PrimformError> {
    match cli.command {
        Command::Ring(args) => cmd_ring(&args),
        Command::Frobenius(args) => cmd_frobenius(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Descendants(args) => cmd_descendants(&args),
        Command::MirrorCompare(args) => cmd_mirror(&args),
    }
}

fn cmd_ring(args: &SystemArgs) -> Result<i32, PrimformError> {
    let sys = load_system(args)?;
    let ring = MilnorRing::build(&sys.lg)?;
    let gram = ring.k0_gram(&sys.lg)?;
    let sp = Spectrum::compute(&sys.lg, &ring, None)?;
    let chi = poincare_polynomial(&sp);
    let mut report = Report::new(&sys.label);
    report.ring = Some(ring_report(sys.lg.kind, &ring, &gram, &sp, &chi));
    let r = report.ring.as_ref().unwrap();
    println!("system: {}", sys.label);
    println!("kind: {}", r.kind);
    println!("mu: {}", r.mu);
    println!("basis: {}", r.basis.join(", "));
    println!("socle: {}", r.socle);
    println!("K0 Gram matrix:");
    for row in &r.gram {
        println!("  [{}]", row.join(", "));
    }
    println!("exponents: {}", r.spectrum.exponents.join(", "));
    println!("degrees:   {}", r.spectrum.degrees.join(", "));
    println!(
        "c_hat: {} (closed form {}), exponent duality: {}",
        r.spectrum.c_hat, r.spectrum.c_hat_formula, r.spectrum.exponent_duality
    );
    let chi_str: Vec<String> = r
        .poincare
        .powers
        .iter()
        .map(|(p, m)| format!("{} x (y ybar)^{}", m, p))
        .collect();
    println!("poincare: {} (duality: {})", chi_str.join(" + "), r.poincare.duality);
    emit(&report, &args.json)?;
    Ok(0)
}

fn cmd_frobenius(args: &SystemArgs) -> Result<i32, PrimformError> {
    let sys = load_system(args)?;
    let fd = FrobeniusData::build(&sys.lg)?;
    let fr = frobenius_report(&fd)?;
    let ok = fr.euler_discriminant_identity && fr.wdvv_zero;
    let mut report = Report::new(&sys.label);
    report.frobenius = Some(fr);
    let r = report.frobenius.as_ref().unwrap();
    println!("system: {}", sys.label);
    println!("flat coordinates: {}", r.coords.join(", "));
    println!("coordinate change (old = expr in flat):");
    for (c, e) in r.coords.iter().zip(&r.coordinate_change) {
        println!("  a[{}] = {}", c, e);
    }
    println!("eta:");
    for row in &r.eta {
        println!("  [{}]", row.join(", "));
    }
    println!("structure constants (i <= j <= k, nonzero):");
    for e in &r.c_tensor {
        println!("  C[{}{}{}] = {}", e.i, e.j, e.k, e.value);
    }
    println!("potential: {}", r.potential);
    println!("euler field: ({})", r.euler.join(", "));
    println!("discriminant: {}", r.discriminant);
    println!("E(Delta) = mu Delta: {}", r.euler_discriminant_identity);
    println!("WDVV residuals vanish: {}", r.wdvv_zero);
    for n in &r.notes {
        println!("note: {}", n);
    }
    emit(&report, &args.json)?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_verify(args: &SystemArgs) -> Result<i32, PrimformError> {
    let sys = load_system(args)?;
    let zeta = sys
        .zeta
        .clone()
        .unwrap_or_else(|| BrieskornClass::regular(LaurentPoly::one()));
    let v = verify_primitive_form(&sys.lg, &zeta)?;
    let vj = verification_json(&v);
    let all = vj.all_passed;
    let mut report = Report::new(&sys.label);
    report.verification = Some(vj);
    let r = report.verification.as_ref().unwrap();
    println!("system: {}", sys.label);
    let passed = r.conditions.iter().filter(|c| c.passed).count();
    println!("conditions: {}/{}", passed, r.conditions.len());
    for c in &r.conditions {
        match &c.witness {
            Some(w) => println!("  {}: {} ({})", c.name, status(c.passed), w),
            None => println!("  {}: {}", c.name, status(c.passed)),
        }
    }
    if let Some(rr) = &r.r {
        println!("minimal exponent r = {}", rr);
    }
    let fmt_matrix = |m: &Vec<Vec<String>>| {
        m.iter()
            .map(|row| format!("[{}]", row.join(", ")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    if let Some(n) = &r.n_induced {
        println!("exponent matrix (induced): {}", fmt_matrix(n));
    }
    if let Some(n) = &r.n_spectrum {
        println!("exponent matrix (Euler degrees): {}", fmt_matrix(n));
    }
    for n in &r.notes {
        println!("note: {}", n);
    }
    emit(&report, &args.json)?;
    Ok(if all { 0 } else { 1 })
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn descendant_data(
    lg: &LGSystem,
    caps: &Caps,
) -> Result<(CorrelatorReport, bool), PrimformError> {
    let fd = FrobeniusData::build(lg)?;
    let b = BSide::new(fd, caps.max_level.max(6) + 1)?;
    let a = ASide::new();
    let mu = b.fd.mu;
    // Rows: all multisets with up to three insertions.
    let mut slots = Vec::new();
    for d in 0..=caps.max_level {
        for idx in 0..mu {
            slots.push((d, idx));
        }
    }
    let mut b_rows = Vec::new();
    let mut a_rows = Vec::new();
    let mut agree = true;
    let mut compared = 0usize;
    for i in 0..slots.len() {
        for j in i..slots.len() {
            for k in j..slots.len() {
                let ins = vec![slots[i], slots[j], slots[k]];
                for beta in 0..=caps.max_q {
                    let bv = b.correlator(&ins, beta)?;
                    let av = a.correlator(&ins, beta);
                    compared += 1;
                    if bv != av {
                        agree = false;
                    }
                    if !bv.is_zero() {
                        b_rows.push(CorrelatorRow {
                            insertions: ins.clone(),
                            beta,
                            value: bv.to_string(),
                        });
                    }
                    if !av.is_zero() {
                        a_rows.push(CorrelatorRow {
                            insertions: ins.clone(),
                            beta,
                            value: av.to_string(),
                        });
                    }
                }
            }
        }
    }
    // One-point tower.
    let mut tower = Vec::new();
    let mut tower_ok = true;
    for d in 1..=4u32 {
        let level = 2 * d - 2;
        let bv = qs_coeff(b.one_point(1, level), d);
        let av = a.correlator(&[(level, 1)], d);
        if bv != av {
            tower_ok = false;
        }
        tower.push(TowerRow {
            level,
            beta: d,
            b_value: bv.to_string(),
            a_value: av.to_string(),
        });
    }
    // Axiom sweeps on the A-side table.
    let mut string_ok = true;
    let mut string_checked = 0usize;
    let mut dilaton_ok = true;
    let mut dilaton_checked = 0usize;
    let mut divisor_ok = true;
    let mut divisor_checked = 0usize;
    for i in 0..slots.len() {
        for j in i..slots.len() {
            for k in j..slots.len() {
                let x = [slots[i], slots[j], slots[k]];
                for beta in 0..=caps.max_q {
                    // string
                    let with_id: Vec<(u32, usize)> =
                        std::iter::once((0, 0)).chain(x.iter().copied()).collect();
                    let lhs = a.correlator(&with_id, beta);
                    let mut rhs = BigRational::zero();
                    for (pos, (d, idx)) in x.iter().enumerate() {
                        if *d >= 1 {
                            let mut low = x.to_vec();
                            low[pos] = (*d - 1, *idx);
                            rhs += a.correlator(&low, beta);
                        }
                    }
                    string_checked += 1;
                    if lhs != rhs {
                        string_ok = false;
                    }
                    // dilaton
                    let with_dil: Vec<(u32, usize)> =
                        std::iter::once((1, 0)).chain(x.iter().copied()).collect();
                    let lhs = a.correlator(&with_dil, beta);
                    let rhs = BigRational::from_integer((x.len() as i64 - 2).into())
                        * a.correlator(&x, beta);
                    dilaton_checked += 1;
                    if lhs != rhs {
                        dilaton_ok = false;
                    }
                    // divisor (beta >= 1)
                    if beta >= 1 {
                        let with_div: Vec<(u32, usize)> =
                            std::iter::once((0, 1)).chain(x.iter().copied()).collect();
                        let lhs = a.correlator(&with_div, beta);
                        let mut rhs = BigRational::from_integer(i64::from(beta).into())
                            * a.correlator(&x, beta);
                        for (pos, (d, idx)) in x.iter().enumerate() {
                            if *d >= 1 && *idx == 0 {
                                // O_0 cup O_1 = O_1
                                let mut low = x.to_vec();
                                low[pos] = (*d - 1, 1);
                                rhs += a.correlator(&low, beta);
                            }
                            // O_1 cup O_1 = 0: no term
                        }
                        divisor_checked += 1;
                        if lhs != rhs {
                            divisor_ok = false;
                        }
                    }
                }
            }
        }
    }
    let ok = agree && tower_ok && string_ok && dilaton_ok && divisor_ok;
    Ok((
        CorrelatorReport {
            caps: CapsJson {
                max_insertions: caps.max_insertions,
                max_level: caps.max_level,
                max_q: caps.max_q,
            },
            b_side: b_rows,
            a_side: a_rows,
            one_point_tower: tower,
            axioms: AxiomLedger {
                string_checked,
                string_ok,
                dilaton_checked,
                dilaton_ok,
                divisor_checked,
                divisor_ok,
                pipelines_agree: agree && tower_ok,
                values_compared: compared,
            },
        },
        ok,
    ))
}

fn cmd_descendants(args: &SystemArgs) -> Result<i32, PrimformError> {
    let sys = load_system(args)?;
    let caps = caps_of(args);
    let (cr, ok) = descendant_data(&sys.lg, &caps)?;
    let mut report = Report::new(&sys.label);
    report.correlators = Some(cr);
    let r = report.correlators.as_ref().unwrap();
    println!("system: {}", sys.label);
    println!(
        "caps: insertions <= {}, level <= {}, q <= {}",
        r.caps.max_insertions, r.caps.max_level, r.caps.max_q
    );
    println!("nonzero correlators up to three insertions (B side):");
    for row in &r.b_side {
        let ins: Vec<String> = row
            .insertions
            .iter()
            .map(|(d, a)| format!("s{}(O{})", d, a))
            .collect();
        println!("  <{}>_{} = {}", ins.join(" "), row.beta, row.value);
    }
    println!("one-point tower <s_(2d-2)(O1)>_d:");
    for t in &r.one_point_tower {
        println!(
            "  d = {}: B {} / A {}",
            t.beta, t.b_value, t.a_value
        );
    }
    println!(
        "axioms: string {}/{} ok={}, dilaton {}/{} ok={}, divisor {}/{} ok={}",
        r.axioms.string_checked,
        r.axioms.string_checked,
        r.axioms.string_ok,
        r.axioms.dilaton_checked,
        r.axioms.dilaton_checked,
        r.axioms.dilaton_ok,
        r.axioms.divisor_checked,
        r.axioms.divisor_checked,
        r.axioms.divisor_ok
    );
    println!(
        "pipelines agree on {} values: {}",
        r.axioms.values_compared, r.axioms.pipelines_agree
    );
    emit(&report, &args.json)?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_mirror(args: &SystemArgs) -> Result<i32, PrimformError> {
    let sys = load_system(args)?;
    let caps = caps_of(args);
    let cmp = MirrorComparison::compare(&sys.lg, &caps)?;
    let matched = cmp.max_discrepancy.is_zero();
    let mut report = Report::new(&sys.label);
    report.comparison = Some(ComparisonReport {
        caps: CapsJson {
            max_insertions: caps.max_insertions,
            max_level: caps.max_level,
            max_q: caps.max_q,
        },
        max_discrepancy: cmp.max_discrepancy.to_string(),
        residual_monomials: cmp.monomials_compared,
        matched,
    });
    let r = report.comparison.as_ref().unwrap();
    println!("system: {}", sys.label);
    println!(
        "caps: insertions <= {}, level <= {}, q <= {}",
        r.caps.max_insertions, r.caps.max_level, r.caps.max_q
    );
    println!("max coefficient discrepancy: {}", r.max_discrepancy);
    println!("residual monomials: {}", r.residual_monomials);
    println!("free energies match: {}", r.matched);
    emit(&report, &args.json)?;
    Ok(if matched { 0 } else { 1 })
}
