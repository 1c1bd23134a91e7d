//! Twists, the Lie bracket, exponentials and the adjoint action.
//!
//! Run with `cargo run --example screw_algebra`.

use tancone::scalar::{format_rational, qi, qr, Q};
use tancone::screw::{adjoint_apply, exp_twist, exp_twist_exact, lie_bracket, Twist};

fn show(t: &Twist<Q>) -> String {
    let parts: Vec<String> = t.to_array().iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

fn main() {
    // a revolute axis along z through (0, 1, 0) and a prismatic joint along x
    let rz = Twist::new([qi(0), qi(0), qi(1)], [qi(1), qi(0), qi(0)]);
    let px = Twist::new([qi(0), qi(0), qi(0)], [qi(1), qi(0), qi(0)]);
    println!("Y_a = {}", show(&rz));
    println!("Y_b = {}", show(&px));
    println!("[Y_a, Y_b] = {}", show(&lie_bracket(&rz, &px)));
    println!("[Y_b, Y_a] = {}", show(&lie_bracket(&px, &rz)));

    // exact displacement along a prismatic screw, then transport of the revolute axis
    let g = exp_twist_exact(&px, &qr(3, 2)).expect("translations are exact");
    println!("Ad(exp(3/2 Y_b)) Y_a = {}", show(&adjoint_apply(&g, &rz)));

    // floating rotation about the revolute axis, and back through the logarithm
    let g = exp_twist(&rz.to_f64(), 0.75);
    let back = g.log();
    println!("log(exp(0.75 Y_a)) = {:?}", back.to_array().map(|v| (v * 1e12).round() / 1e12));
    println!("rotation angle = {:.12}", g.rotation_angle());
}
