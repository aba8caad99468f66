//! Build Milnor rings and evaluate residue pairings.
//!
//! ```bash
//! cargo run --release -p primform --example milnor_ring
//! ```

use primform::lg::LGSystem;
use primform::milnor::MilnorRing;
use primform::poly::LaurentPoly;
use primform::scalar::ExactScalar;

fn main() {
    // The cusp z^3: basis {1, z}, residue normalized so Res(hess) = mu.
    let mut a2 = LGSystem::a_n(2);
    a2.family = None;
    let ring = MilnorRing::build(&a2).unwrap();
    println!("f = z^3");
    println!("  mu = {}", ring.mu);
    println!(
        "  basis = {}",
        ring.basis
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    let z = LaurentPoly::var("z");
    println!("  Res(z)  = {}", ring.residue_scalar(&z).unwrap());
    println!(
        "  Res(1)  = {}",
        ring.residue_scalar(&LaurentPoly::one()).unwrap()
    );
    let hess = z.scale(&ExactScalar::from_int(6));
    println!("  Res(6z) = {} (the Milnor number)", ring.residue_scalar(&hess).unwrap());

    // The torus mirror: the family ring rewrites z^2 -> q e^{t1}.
    let cp1 = LGSystem::cp1();
    let ring = MilnorRing::build(&cp1).unwrap();
    println!("\nf = z + q z^-1 (deformed family)");
    println!("  mu = {}", ring.mu);
    println!(
        "  z^2 reduces to {}",
        ring.normal_form(&LaurentPoly::var_pow("z", 2)).unwrap()
    );
    let gram = ring.k0_gram(&cp1).unwrap();
    println!("  K0 Gram matrix on the basis:");
    for row in &gram {
        println!(
            "    [{}]",
            row.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
        );
    }

    // A two-variable ring: the tensor square of the cusp.
    let x3y3 = LGSystem::x3y3();
    let ring = MilnorRing::build(&x3y3).unwrap();
    println!("\nf = x^3 + y^3");
    println!("  mu = {}", ring.mu);
    println!("  socle = {}", ring.basis[ring.socle_index]);
}
