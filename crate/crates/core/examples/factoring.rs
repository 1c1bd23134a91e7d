//! Restricted factoring and real-zero reduction of compatibility conditions.
//!
//! Run with `cargo run --example factoring`.

use tancone::poly::{factor_restricted, real_zero_reduction, MultiPoly};

fn main() {
    for text in [
        "513*p1_2^4 + 1335*p1_2^2*p2_1 + 800*p2_1^2",
        "p1_1*p1_3",
        "p1_1^2 + p1_2^2",
        "4*p1_1^2 - 9*p1_2^2",
        "p1_1^3 + p1_2^3 + p1_1*p1_2*p1_3",
    ] {
        let p: MultiPoly = text.parse().expect("polynomial syntax");
        let f = factor_restricted(&p);
        let factors: Vec<String> = f.factors.iter().map(|x| format!("({})^{}", x.poly, x.multiplicity)).collect();
        println!("{p}");
        println!("  = {} * {}{}", f.unit, factors.join(" * "), if f.scope_exceeded { "  [scope exceeded]" } else { "" });
        for alt in real_zero_reduction(&f.factors) {
            let eqs: Vec<String> = alt.iter().map(|e| format!("{e} = 0")).collect();
            println!("  or {}", eqs.join(" and "));
        }
    }
}
