//! Stage-by-stage cone computation for the two-loop six-bar.
//!
//! Run with `cargo run --example tangent_cone`.

use tancone::bundled;
use tancone::classify::classify;
use tancone::cone::{analyze, tangent_cone};

fn main() {
    let linkage = bundled::six_bar();
    let cone = tangent_cone(&linkage, 6).expect("analysis runs");
    println!("kappa = {} ({})", cone.kappa, cone.status);
    for (i, b) in cone.stage.branches.iter().enumerate() {
        let x1: Vec<String> = b.jets[0].iter().map(ToString::to_string).collect();
        println!("  branch {} (dim {}): x1 = ({})", i + 1, b.dim(), x1.join(", "));
    }

    let analysis = analyze(&linkage, 4).expect("analysis runs");
    for stage in &analysis.stages {
        let conds: Vec<String> = stage.conditions.iter().map(ToString::to_string).collect();
        println!("stage {}: {} branch(es); conditions [{}]", stage.order, stage.branches.len(), conds.join("; "));
    }
    let c = classify(&analysis);
    println!("classification: {} with contact orders {:?}", c.kind, c.contact_orders);
}
