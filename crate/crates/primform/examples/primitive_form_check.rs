//! Verify the five primitive-form conditions, including a failing candidate.
//!
//! ```bash
//! cargo run --release -p primform --example primitive_form_check
//! ```

use primform::brieskorn::{verify_primitive_form, BrieskornClass};
use primform::lg::LGSystem;
use primform::poly::LaurentPoly;

fn show(label: &str, report: &primform::brieskorn::VerificationReport) {
    println!("{}:", label);
    for c in &report.conditions {
        match &c.witness {
            Some(w) => println!("  {:24} {} ({})", c.name, ok(c.passed), w),
            None => println!("  {:24} {}", c.name, ok(c.passed)),
        }
    }
    if let Some(r) = &report.r {
        println!("  minimal exponent r = {}", r);
    }
    if let Some(n) = &report.n_induced {
        let rows: Vec<String> = n
            .iter()
            .map(|row| {
                format!(
                    "[{}]",
                    row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
                )
            })
            .collect();
        println!("  induced exponent matrix: {}", rows.join(" "));
    }
    for note in &report.notes {
        println!("  note: {}", note);
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn main() {
    // dz/z on the torus mirror: all five conditions, r = 0.
    let cp1 = LGSystem::cp1();
    let zeta = BrieskornClass::regular(LaurentPoly::one());
    show("cp1 with zeta = dz/z", &verify_primitive_form(&cp1, &zeta).unwrap());

    // dz on the A2 miniversal family: r = 1/3.
    let a2 = LGSystem::a_n(2);
    show(
        "\na2 with zeta = dz",
        &verify_primitive_form(&a2, &zeta).unwrap(),
    );

    // (1 + z) dz/z is not homogeneous: the report carries a witness.
    let bad = BrieskornClass::regular(LaurentPoly::one().add(&LaurentPoly::var("z")));
    show(
        "\ncp1 with zeta = (1 + z) dz/z",
        &verify_primitive_form(&cp1, &bad).unwrap(),
    );
}
