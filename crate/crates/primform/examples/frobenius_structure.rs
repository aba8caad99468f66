//! Flat coordinates, the potential, the Euler field, and the discriminant.
//!
//! ```bash
//! cargo run --release -p primform --example frobenius_structure
//! ```

use primform::frobenius::{discriminant_homogeneity_residual, FrobeniusData};
use primform::lg::LGSystem;

fn main() {
    // A3 needs a genuine flat-coordinate correction: a0 = t0 + (t2)^2 / 8.
    let fd = FrobeniusData::build(&LGSystem::a_n(3)).unwrap();
    println!("A3 miniversal family");
    println!("  coordinate change:");
    for (c, e) in fd.coords.iter().zip(&fd.coordinate_change) {
        println!("    a[{}] = {}", c, e);
    }
    println!("  eta rows:");
    for row in &fd.eta {
        println!(
            "    [{}]",
            row.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
        );
    }
    println!("  potential: {}", fd.potential);
    println!("  discriminant: {}", fd.discriminant);
    println!(
        "  E(Delta) - mu Delta = {}",
        discriminant_homogeneity_residual(&fd).unwrap()
    );
    let wdvv_zero = fd.wdvv_residuals().unwrap().iter().all(|(_, r)| r.is_zero());
    println!("  WDVV residuals vanish: {}", wdvv_zero);

    // The torus mirror: everything is already flat.
    let fd = FrobeniusData::build(&LGSystem::cp1()).unwrap();
    println!("\ncp1 mirror family");
    println!("  potential: {}", fd.potential);
    println!(
        "  euler field: ({})",
        fd.euler
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!("  discriminant: {}", fd.discriminant);
    for note in &fd.notes {
        println!("  note: {}", note);
    }
}
