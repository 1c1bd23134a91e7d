//! Tangentially intersecting motion branches of the 7R linkage.
//!
//! Both branches share the tangent line but differ in second-order jets.
//! Run with `cargo run --example non_transversal`.

use tancone::bundled;
use tancone::classify::{classify, subset_test};
use tancone::cone::analyze;

fn main() {
    let analysis = analyze(&bundled::seven_r(), 4).expect("analysis runs");
    let stage = analysis.stage(4).expect("four stages");
    println!("stage 4 condition: {} = 0", stage.conditions[0]);
    for (i, b) in stage.branches.iter().enumerate() {
        let x1 = b.project(1).unwrap();
        let x2 = b.project(2).unwrap();
        println!("branch {}: x1[1] = {}, x2[2] = {}, x2[4] = {}", i + 1, x1[0], x2[1], x2[3]);
    }
    let (a, b) = (&stage.branches[0], &stage.branches[1]);
    for j in 1..=2 {
        println!("order {j}: 1 in 2: {}, 2 in 1: {}", subset_test(a, b, j), subset_test(b, a, j));
    }
    let c = classify(&analysis);
    println!("{} (contact orders {:?})", c.kind, c.contact_orders);
}
