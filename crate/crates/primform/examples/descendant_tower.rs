//! Deformed flat functions and the genus-0 descendant towers.
//!
//! ```bash
//! cargo run --release -p primform --example descendant_tower
//! ```

use primform::descend::{qs_coeff, ASide, BSide};
use primform::frobenius::FrobeniusData;
use primform::lg::LGSystem;

fn main() {
    let fd = FrobeniusData::build(&LGSystem::cp1()).unwrap();
    let b = BSide::new(fd, 7).unwrap();
    let a = ASide::new();

    println!("deformed flat functions (normalized):");
    for (l, d) in [(0usize, 0u32), (1, 0), (1, 1)] {
        println!("  h[{}],{} = {}", l, d, b.h(l, d).h);
    }

    println!("\none-point tower <sigma_(2d-2)(O_1)>_d:");
    for d in 1..=4u32 {
        let level = 2 * d - 2;
        println!(
            "  d = {}: reconstruction {}  /  quantum-ring recursion {}",
            d,
            qs_coeff(b.one_point(1, level), d),
            a.correlator(&[(level, 1)], d)
        );
    }

    println!("\nsample correlators (both pipelines):");
    let samples: [(&str, Vec<(u32, usize)>, u32); 4] = [
        ("<O1 O1 O1>_1", vec![(0, 1), (0, 1), (0, 1)], 1),
        ("<s1(O1) O1 O0>_1", vec![(1, 1), (0, 1), (0, 0)], 1),
        ("<s2(O1) O1 O1>_2", vec![(2, 1), (0, 1), (0, 1)], 2),
        ("<s1(O1) s1(O1) O0 O0>_2", vec![(1, 1), (1, 1), (0, 0), (0, 0)], 2),
    ];
    for (label, ins, beta) in samples {
        println!(
            "  {} = {} / {}",
            label,
            b.correlator(&ins, beta).unwrap(),
            a.correlator(&ins, beta)
        );
    }
}
