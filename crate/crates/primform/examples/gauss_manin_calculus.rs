//! The localized Gauss-Manin calculus on rational representatives.
//!
//! ```bash
//! cargo run --release -p primform --example gauss_manin_calculus
//! ```

use primform::brieskorn::{nabla_zeta_minus_one, BrieskornClass, GaussManin};
use primform::lg::LGSystem;
use primform::poly::LaurentPoly;
use primform::spectrum::euler_components;

fn render(c: &BrieskornClass) -> String {
    if c.pole == 0 {
        format!("[({}) dz/z]", c.num)
    } else {
        format!("[({}) / (theta F)^{} dz/z]", c.num, c.pole)
    }
}

fn main() {
    let lg = LGSystem::cp1();
    let gm = GaussManin::new(&lg).unwrap();
    let zeta = BrieskornClass::regular(LaurentPoly::one());

    let d1 = gm.nabla(1, &zeta).unwrap();
    println!("nabla_1 [dz/z]              = {}", render(&d1));

    let d0 = gm.nabla(0, &zeta).unwrap();
    let td0 = gm.t0_mul(&d0).unwrap();
    println!("t0 . nabla_0 [dz/z]         = {}", render(&td0));

    let euler = euler_components(&lg, &gm.ring).unwrap();
    let de = gm.nabla_field(&euler, &zeta).unwrap();
    println!("nabla_E [dz/z]              = {}", render(&gm.canonical(&de).unwrap()));

    // The inverse of nabla_0 realizes the dF-pattern: nabla_1 zeta^{(-1)}
    // has the numerator q e^{t1} z^{-1} = dF/dt1.
    let psi1 = nabla_zeta_minus_one(&gm, &zeta, 1).unwrap();
    println!("nabla_1 zeta^(-1)           = {}", render(&psi1));

    // Round trip: nabla_0 after its inverse is the identity.
    let back = gm.nabla(0, &gm.nabla0_inverse(&d1).unwrap()).unwrap();
    println!(
        "round trip nabla_0 . inverse: {}",
        if gm.classes_equal(&back, &d1).unwrap() {
            "exact"
        } else {
            "FAILED"
        }
    );

    // [dz/z] itself has no rational primitive: the log obstruction.
    match gm.nabla0_inverse(&zeta) {
        Err(e) => println!("inverse of [dz/z]           : {}", e),
        Ok(_) => println!("inverse of [dz/z]           : unexpectedly exists"),
    }
}
