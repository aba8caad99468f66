//! Exponents, degrees, and Poincare-polynomial duality.
//!
//! ```bash
//! cargo run --release -p primform --example spectrum_duality
//! ```

use primform::lg::LGSystem;
use primform::milnor::MilnorRing;
use primform::spectrum::{poincare_polynomial, Spectrum};

fn main() {
    for n in 1..=6 {
        let lg = LGSystem::a_n(n);
        let ring = MilnorRing::build(&lg).unwrap();
        let sp = Spectrum::compute(&lg, &ring, None).unwrap();
        let chi = poincare_polynomial(&sp);
        println!(
            "A{}: exponents {{{}}}, duality {}, chi duality {}",
            n,
            sp.exponents
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(", "),
            sp.exponent_duality,
            chi.duality
        );
    }

    // The Laurent mirror reads its degrees off the Euler field; the two
    // c-hat conventions disagree there and both are reported.
    let lg = LGSystem::cp1();
    let ring = MilnorRing::build(&lg).unwrap();
    let sp = Spectrum::compute(&lg, &ring, None).unwrap();
    let chi = poincare_polynomial(&sp);
    println!(
        "cp1: degrees {{{}}}, q = {{{}}}, c_hat = {} vs closed form {}, chi duality {}",
        sp.degrees
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(", "),
        sp.qs
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(", "),
        sp.c_hat,
        sp.c_hat_formula,
        chi.duality
    );
}
