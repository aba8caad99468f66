//! The desk-scale mirror comparison: expand both genus-0 free energies and
//! match them through the coordinate change on the large phase space.
//!
//! ```bash
//! cargo run --release -p primform --example mirror_theorem
//! ```

use primform::descend::{mirror_map, BSide, Caps, MirrorComparison};
use primform::frobenius::FrobeniusData;
use primform::lg::LGSystem;

fn main() {
    let caps = Caps {
        max_insertions: 4,
        max_level: 2,
        max_q: 2,
    };
    let lg = LGSystem::cp1();

    // The affine coordinate change on the large phase space.
    let fd = FrobeniusData::build(&lg).unwrap();
    let b = BSide::new(fd, caps.max_level + 1).unwrap();
    println!("mirror map (level-raising corrections only):");
    for ((i, d), expr) in mirror_map(&b, &caps).unwrap() {
        println!("  t~[{}]_{} = {}", i, d, expr);
    }

    let start = std::time::Instant::now();
    let cmp = MirrorComparison::compare(&lg, &caps).unwrap();
    println!(
        "\ncaps: insertions <= {}, level <= {}, q <= {}",
        caps.max_insertions, caps.max_level, caps.max_q
    );
    println!("max coefficient discrepancy: {}", cmp.max_discrepancy);
    println!("residual monomials: {}", cmp.monomials_compared);
    println!("elapsed: {:?}", start.elapsed());
}
