//! The symbolic loop constraints of orders one to four.
//!
//! Run with `cargo run --example higher_order_constraints`.

use tancone::bundled;
use tancone::hoc::systems_up_to;

fn main() {
    let linkage = bundled::seven_r();
    let systems = systems_up_to(&linkage, 4).expect("exact screws at q0");
    let first = systems[0].leading_matrix();
    for sys in &systems {
        let terms: usize = sys.components().map(|p| p.num_terms()).sum();
        let same = sys.leading_matrix() == first;
        println!("order {}: {terms} terms, leading matrix equals first-order matrix: {same}", sys.order);
    }
    println!("second-order angular x-component:");
    println!("  {}", systems[1].cycles[0][0]);
    let loops = systems[0].loops();
    println!("rank {} of {} coordinates; nullspace basis:", loops.rank(), loops.n);
    for v in &loops.nullspace {
        let parts: Vec<String> = v.iter().map(tancone::scalar::format_rational).collect();
        println!("  ({})", parts.join(", "));
    }
}
