//! Numerical cross-checks of exact branches by continuation.

mod common;

use std::collections::BTreeMap;

use tancone::bundled;
use tancone::cone::{analyze, SolutionBranch};
use tancone::hoc::LoopSystem;
use tancone::poly::Var;
use tancone::scalar::{parse_rational, q_to_f64};
use tancone::tracer::{default_params, fit_jets, trace_branch, TraceError, TracedCurve};
use tancone::verify::{bundled_examples, ExpectedStructure};

use common::canonical;

fn trace(linkage: &tancone::linkage::Linkage, b: &SolutionBranch, params: &BTreeMap<Var, f64>, h: f64) -> TracedCurve {
    trace_branch(&linkage.local_model(), b, params, 8, h).expect("trace succeeds")
}

/// Distance of `v` from the row space of the tangent basis, relative to `|v|`.
fn tangent_defect(b: &SolutionBranch, v: &[f64]) -> f64 {
    let basis = b.tangent_space().expect("linear tangent space").to_f64();
    let a = basis.transpose();
    let rhs = nalgebra::DVector::from_column_slice(v);
    let coef = a.clone().svd(true, true).solve(&rhs, 1e-12).expect("svd");
    let resid = &a * coef - &rhs;
    resid.norm() / rhs.norm()
}

fn stacked_norm(loops: &LoopSystem, order: usize, jets: &[Vec<f64>]) -> f64 {
    loops.stacked_values(order, jets).iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn fitted_velocity_lies_in_tangent_space() {
    for linkage in [bundled::seven_r(), bundled::six_bar(), bundled::four_bar()] {
        let a = analyze(&linkage, 4).unwrap();
        for b in &a.last().branches {
            let curve = trace(&linkage, b, &default_params(b), 0.02);
            // A degree-8 fit keeps the truncation error of the velocity at O(h^8).
            let fitted = fit_jets(&curve, 6).unwrap();
            let d = tangent_defect(b, &fitted[0]);
            assert!(d < 1e-6, "{}: fitted velocity off the tangent space by {d:.2e}", linkage.name);
        }
    }
}

#[test]
fn second_order_constraint_residual_is_quadratic_in_h() {
    let linkage = bundled::seven_r();
    let a = analyze(&linkage, 4).unwrap();
    for b in &a.last().branches {
        let mut prev = None;
        for h in [0.04, 0.02, 0.01] {
            let curve = trace(&linkage, b, &default_params(b), h);
            let fitted = fit_jets(&curve, 2).unwrap();
            let r = stacked_norm(&a.loops, 2, &fitted);
            assert!(r < 10.0 * h * h, "H2 residual {r:.2e} at h = {h}");
            if let Some(p) = prev {
                assert!(r < p, "residual did not shrink: {p:.2e} -> {r:.2e}");
            }
            prev = Some(r);
        }
    }
}

/// The stored second-order values of the six-bar come from the exact solver
/// itself, so confirm them independently from traced curves.
#[test]
fn six_bar_second_order_values_match_traces() {
    let linkage = bundled::six_bar();
    let a = analyze(&linkage, 4).unwrap();
    let expected: ExpectedStructure = bundled_examples().remove(0).0;
    let stage2 = expected.stages.iter().find(|s| s.order == 2).unwrap();
    for b in &a.last().branches {
        let tangent = b.tangent_space().unwrap();
        let want = stage2
            .branches
            .iter()
            .find(|e| {
                canonical(e.tangent.iter().map(|r| r.iter().map(|s| parse_rational(s).unwrap()).collect()).collect())
                    == tangent
            })
            .expect("expected branch with this tangent");
        assert!(!want.second_order.is_empty());
        let params = default_params(b);
        let curve = trace(&linkage, b, &params, 0.02);
        let fitted = fit_jets(&curve, 2).unwrap();
        let s = fitted[0][0];
        assert!(s.abs() > 0.1, "x1_1 must be nonzero to normalize");
        for (coord, c) in &want.second_order {
            let j: usize = coord.parse().unwrap();
            let c = q_to_f64(&parse_rational(c).unwrap());
            let got = fitted[1][j - 1];
            assert!((got - c * s * s).abs() < 1e-3, "coordinate {j}: fitted {got:.6}, expected {:.6}", c * s * s);
        }
    }
}

#[test]
fn seven_r_acceleration_of_joint_four() {
    let linkage = bundled::seven_r();
    let a = analyze(&linkage, 4).unwrap();
    let mut seen = Vec::new();
    for b in &a.last().branches {
        let p = Var::param(1, 2);
        let mut params = default_params(b);
        // x1 = (1, 0, 1, 0, 4/3, 0, 4/3)
        params.insert(p, 4.0 / 3.0);
        let curve = trace(&linkage, b, &params, 0.02);
        assert_eq!(curve.points.len(), 17);
        let fitted = fit_jets(&curve, 2).unwrap();
        assert!((fitted[0][0] - 1.0).abs() < 1e-4, "x1_1 = {}", fitted[0][0]);
        seen.push(fitted[1][3]);
    }
    seen.sort_by(f64::total_cmp);
    assert!((seen[0] + 4.0 / 3.0).abs() < 0.05 * 4.0 / 3.0, "{seen:?}");
    assert!(seen[1].abs() < 1e-3, "{seen:?}");
}

#[test]
fn zero_steps_gives_the_base_point() {
    let linkage = bundled::seven_r();
    let a = analyze(&linkage, 4).unwrap();
    let b = &a.last().branches[0];
    let curve = trace_branch(&linkage.local_model(), b, &default_params(b), 0, 0.02).unwrap();
    assert_eq!(curve.points.len(), 1);
    assert_eq!(curve.center(), linkage.local_model().q0.as_slice());
}

#[test]
fn zero_tangent_and_bad_step_are_rejected() {
    let linkage = bundled::seven_r();
    let a = analyze(&linkage, 4).unwrap();
    let b = &a.last().branches[0];
    let zero: BTreeMap<Var, f64> = b.params.iter().map(|&v| (v, 0.0)).collect();
    let model = linkage.local_model();
    assert_eq!(trace_branch(&model, b, &zero, 4, 0.02).unwrap_err(), TraceError::ZeroTangent);
    assert_eq!(trace_branch(&model, b, &default_params(b), 4, -1.0).unwrap_err(), TraceError::BadStep(-1.0));
    let mut foreign = default_params(b);
    foreign.insert(Var::param(9, 9), 1.0);
    assert!(matches!(trace_branch(&model, b, &foreign, 4, 0.02), Err(TraceError::MissingParameter(_))));
}

#[test]
fn failures_report_the_step_index() {
    let linkage = bundled::seven_r();
    let a = analyze(&linkage, 4).unwrap();
    let b = &a.last().branches[0];
    let model = linkage.local_model();
    // Huge steps overshoot the predictor until Gauss-Newton cannot recover.
    let mut failed = None;
    for h in [0.5, 1.0, 2.0, 5.0, 20.0] {
        if let Err(e) = trace_branch(&model, b, &default_params(b), 8, h) {
            failed = Some(e);
            break;
        }
    }
    let e = failed.expect("some step size fails");
    match e {
        TraceError::TraceFailure { step, .. } => {
            assert!(step != 0 && step.abs() <= 8);
            assert!(e.to_string().contains(&format!("step {step}")));
        }
        ref other => panic!("unexpected error {other}"),
    }
}
