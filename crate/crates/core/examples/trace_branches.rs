//! Numerical continuation along both 7R branches and jet fitting.
//!
//! Run with `cargo run --example trace_branches`.

use std::collections::BTreeMap;

use tancone::bundled;
use tancone::cone::analyze;
use tancone::poly::Var;
use tancone::tracer::{fit_jets, trace_branch};

fn main() {
    let linkage = bundled::seven_r();
    let analysis = analyze(&linkage, 6).expect("analysis runs");
    let model = linkage.local_model();
    for (i, branch) in analysis.last().branches.iter().enumerate() {
        // the order-1 parameter is scaled so that the first coordinate moves at unit speed
        let s = Var::param(1, 2);
        let x11 = branch.jets[0][0].coeff(&tancone::poly::Monomial::var(s));
        let params = BTreeMap::from([(s, 1.0 / tancone::scalar::q_to_f64(&x11))]);
        for h in [0.02, 0.01] {
            let curve = trace_branch(&model, branch, &params, 8, h).expect("branch is traceable");
            let jets = fit_jets(&curve, 2).expect("enough points");
            println!(
                "branch {} h = {h}: max residual {:.2e}, fitted x2[2] = {:.6}, x2[4] = {:.6}",
                i + 1,
                curve.max_residual(),
                jets[1][1],
                jets[1][3]
            );
        }
    }
}
