//! End-to-end acceptance checks, one test per criterion.
//!
//! Each test prints a single `criterion N: PASS|FAIL` line to stderr (not
//! captured by the harness) followed by any failed checks, then asserts.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use tancone::bundled;
use tancone::classify::{classify, has_real_solution, sample_point, sample_value, ClassificationKind, Membership};
use tancone::cone::{analyze, ConeStatus, SolutionBranch, DEFAULT_MAX_ORDER};
use tancone::hoc::systems_up_to;
use tancone::poly::{factor_restricted, real_zero_reduction, MultiPoly, RationalMatrix};
use tancone::scalar::{q_to_f64, qi, qr, Q};
use tancone::screw::{adjoint_apply, compose, exp_twist, lie_bracket, Twist};
use tancone::tracer::{fit_jets, trace_branch, ACCEPT_TOLERANCE};
use tancone::verify::{bundled_examples, verify_pairs};

use common::{canonical, cayley_pose, mutations, q_twist};

/// Collects named checks and reports them as one criterion.
struct Criterion {
    number: usize,
    failures: Vec<String>,
    checks: usize,
}

impl Criterion {
    fn new(number: usize) -> Self {
        Self { number, failures: Vec::new(), checks: 0 }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.checks += 1;
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn finish(self) {
        let mut err = std::io::stderr().lock();
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let _ = writeln!(err, "criterion {}: {verdict} ({} checks)", self.number, self.checks);
        for f in &self.failures {
            let _ = writeln!(err, "  failed: {f}");
        }
        let _ = err.flush();
        assert!(self.failures.is_empty(), "criterion {} failed: {:?}", self.number, self.failures);
    }
}

fn rows(v: &[&[(i64, i64)]]) -> RationalMatrix {
    canonical(v.iter().map(|r| r.iter().map(|&(n, d)| qr(n, d)).collect()).collect())
}

fn int_rows(v: &[&[i64]]) -> RationalMatrix {
    canonical(v.iter().map(|r| r.iter().map(|&n| qi(n)).collect()).collect())
}

fn tangents(branches: &[SolutionBranch]) -> Vec<Option<RationalMatrix>> {
    branches.iter().map(SolutionBranch::tangent_space).collect()
}

fn same_set(got: &[Option<RationalMatrix>], want: &[RationalMatrix]) -> bool {
    got.len() == want.len() && want.iter().all(|w| got.iter().any(|g| g.as_ref() == Some(w)))
}

#[test]
fn criterion_1_six_bar() {
    let mut c = Criterion::new(1);
    let start = Instant::now();
    let a = analyze(&bundled::six_bar(), DEFAULT_MAX_ORDER).expect("six-bar builds");
    let elapsed = start.elapsed();

    // (s,t,r,−r,0,−s−r,−t,r,0,r,0,−s−r,−t)
    let k1 = int_rows(&[
        &[1, 0, 0, 0, 0, -1, 0, 0, 0, 0, 0, -1, 0],
        &[0, 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, 0, -1],
        &[0, 0, 1, -1, 0, -1, 0, 1, 0, 1, 0, -1, 0],
    ]);
    let s1 = a.stage(1).expect("stage 1");
    c.check(s1.branches.len() == 1 && s1.branches[0].tangent_space().as_ref() == Some(&k1), "K1 is the 3-dim space");
    c.check(canonical(a.loops.nullspace.clone()) == k1, "nullspace of the velocity matrix equals K1");

    let line = int_rows(&[&[-1, 0, 1, -1, 0, 0, 0, 1, 0, 1, 0, 0, 0]]);
    let plane = int_rows(&[&[-1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0], &[0, -1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1]]);
    let s2 = a.stage(2).expect("stage 2");
    c.check(same_set(&tangents(&s2.branches), &[line.clone(), plane.clone()]), "stage 2 splits into the line and the plane");
    c.check(same_set(&tangents(&a.last().branches), &[line, plane]), "final stage keeps the same two tangent spaces");

    c.check(a.kappa == 2, format!("kappa is 2 (got {})", a.kappa));
    c.check(a.status == ConeStatus::Terminated, format!("status terminated (got {})", a.status));
    let cl = classify(&a);
    c.check(cl.kind == ClassificationKind::TransversalBifurcation, format!("transversal bifurcation (got {})", cl.kind));
    let mut dims = cl.dims.clone();
    dims.sort();
    c.check(dims == vec![1, 2], format!("branch dims {{1, 2}} (got {:?})", cl.dims));
    c.check(cl.contact_orders.len() == 1 && cl.contact_orders[0][2] == 0, format!("contact order 0 (got {:?})", cl.contact_orders));
    c.check(elapsed < Duration::from_secs(10), format!("runtime under 10 s (took {elapsed:?})"));
    c.finish();
}

/// Reference acceleration data in `(x₁, y₃)`: coefficients of `x₁²` and `y₃` per coordinate of `y`.
struct YVector {
    x1_sq: [(i64, i64); 7],
    y3: [(i64, i64); 7],
}

fn y_vectors() -> [YVector; 2] {
    let z = (0, 1);
    [
        // (y3, −43/30 x1², y3, 0, 7/30 x1² + 4/3 y3, −19/10 x1², 7/30 x1² + 4/3 y3)
        YVector {
            x1_sq: [z, (-43, 30), z, z, (7, 30), (-19, 10), (7, 30)],
            y3: [(1, 1), z, (1, 1), z, (4, 3), z, (4, 3)],
        },
        // (y3, −3/5 x1², y3, −4/3 x1², 7/30 x1² + 4/3 y3, −16/15 x1², 7/30 x1² + 4/3 y3)
        YVector {
            x1_sq: [z, (-3, 5), z, (-4, 3), (7, 30), (-16, 15), (7, 30)],
            y3: [(1, 1), z, (1, 1), z, (4, 3), z, (4, 3)],
        },
    ]
}

/// Whether the point with velocity `x` and acceleration `y` lies on `b`.
fn on_branch(b: &SolutionBranch, x: &[Q], y: &[Q]) -> Membership {
    let mut eqs = b.constraints.clone();
    for (e, v) in b.jets[0].iter().zip(x).chain(b.jets[1].iter().zip(y)) {
        eqs.push(e - &MultiPoly::constant(v.clone()));
    }
    has_real_solution(eqs)
}

#[test]
fn criterion_2_seven_r() {
    let mut c = Criterion::new(2);
    let start = Instant::now();
    let a = analyze(&bundled::seven_r(), DEFAULT_MAX_ORDER).expect("7R builds");
    let elapsed = start.elapsed();

    // (s,t,s,−8/5 t,4/3 s,t,4/3 s)
    let k1 = rows(&[
        &[(1, 1), (0, 1), (1, 1), (0, 1), (4, 3), (0, 1), (4, 3)],
        &[(0, 1), (1, 1), (0, 1), (-8, 5), (0, 1), (1, 1), (0, 1)],
    ]);
    let s1 = a.stage(1).expect("stage 1");
    c.check(s1.branches.len() == 1 && s1.branches[0].tangent_space().as_ref() == Some(&k1), "K1 is the 2-dim space");

    let line = rows(&[&[(1, 1), (0, 1), (1, 1), (0, 1), (4, 3), (0, 1), (4, 3)]]);
    let s2 = a.stage(2).expect("stage 2");
    c.check(s2.cone() == Some(vec![line.clone()]), "stage-2 cone is the line (s,0,s,0,4/3 s,0,4/3 s)");

    // The stage-2 conditions must cut out exactly x6 = 0 over K1.
    let x6 = &s1.branches[0].jets[0][5];
    let x6_sq = x6 * x6;
    let conditions_ok = !s2.conditions.is_empty()
        && s2.conditions.iter().all(|p| p.div_exact(&x6_sq).is_some_and(|q| q.is_constant() && !q.is_zero()));
    c.check(conditions_ok, format!("stage-2 conditions are multiples of x6^2 (got {:?})", s2.conditions.iter().map(ToString::to_string).collect::<Vec<_>>()));
    let reduced_ok = s2.conditions.iter().all(|p| {
        let alts = real_zero_reduction(&factor_restricted(p).factors);
        alts.len() == 1
            && alts[0].len() == 1
            && alts[0][0].div_exact(x6).is_some_and(|q| q.is_constant() && !q.is_zero())
    });
    c.check(reduced_ok, "real zero set of the stage-2 conditions is x6 = 0");

    let s4 = a.stage(4).expect("stage 4");
    c.check(s4.branches.len() == 2, format!("stage 4 has exactly 2 branches (got {})", s4.branches.len()));
    c.check(s4.branches.iter().all(|b| b.tangent_space().as_ref() == Some(&line)), "both stage-4 branches are tangent to the line");

    // Five rational samples (x1, y3) of each reference y-vector lie on exactly one computed branch.
    for (idx, yv) in y_vectors().iter().enumerate() {
        let mut hits = vec![0usize; s4.branches.len()];
        for m in 0..5 {
            let (x1, y3) = (sample_value(2 * m), sample_value(2 * m + 1));
            let x: Vec<Q> = [(1, 1), (0, 1), (1, 1), (0, 1), (4, 3), (0, 1), (4, 3)].iter().map(|&(n, d)| qr(n, d) * &x1).collect();
            let y: Vec<Q> = (0..7).map(|j| qr(yv.x1_sq[j].0, yv.x1_sq[j].1) * &x1 * &x1 + qr(yv.y3[j].0, yv.y3[j].1) * &y3).collect();
            let found: Vec<usize> = (0..s4.branches.len()).filter(|&i| on_branch(&s4.branches[i], &x, &y) == Membership::Yes).collect();
            c.check(found.len() == 1, format!("reference branch {} sample {m} lies on exactly one branch (found {found:?})", idx + 1));
            for i in found {
                hits[i] += 1;
            }
        }
        c.check(hits.iter().any(|&h| h == 5), format!("all samples of reference branch {} hit the same branch", idx + 1));
    }

    // Exact equalities of the distinguishing acceleration entries.
    let mut pattern: Vec<(Q, Q)> = Vec::new();
    for b in &s4.branches {
        let x1 = &b.jets[0][0];
        let sq = x1 * x1;
        let coef = |j: usize| {
            let p = &b.jets[1][j];
            if p.is_zero() {
                Some(qi(0))
            } else {
                p.div_exact(&sq).and_then(|q| q.constant_value())
            }
        };
        match (coef(1), coef(3)) {
            (Some(y2), Some(y4)) => pattern.push((y2, y4)),
            _ => c.check(false, "y2 and y4 are constant multiples of x1^2"),
        }
    }
    pattern.sort();
    c.check(
        pattern == vec![(qr(-43, 30), qi(0)), (qr(-3, 5), qr(-4, 3))],
        format!("(y2, y4) are (-43/30, 0) and (-3/5, -4/3) times x1^2 (got {pattern:?})"),
    );

    let cl = classify(&a);
    c.check(cl.kind == ClassificationKind::NonTransversalBifurcation, format!("non-transversal bifurcation (got {})", cl.kind));
    c.check(cl.contact_orders == vec![[1, 2, 1]], format!("contact order 1 (got {:?})", cl.contact_orders));
    c.check(elapsed < Duration::from_secs(60), format!("runtime under 60 s (took {elapsed:?})"));
    c.finish();
}

/// Every stage-`i+1` jet sample truncated to order `i` lies on some stage-`i` branch.
fn check_nesting(c: &mut Criterion, name: &str, samples: usize) {
    let linkage = match name {
        "six_bar" => bundled::six_bar(),
        _ => bundled::seven_r(),
    };
    let a = analyze(&linkage, DEFAULT_MAX_ORDER).expect("bundled linkage builds");
    for pair in a.stages.windows(2) {
        let (outer, inner) = (&pair[0], &pair[1]);
        for (bi, b) in inner.branches.iter().enumerate() {
            c.check(b.constraints.is_empty(), format!("{name} stage {} branch {} is parametric", inner.order, bi + 1));
            let mut ok = true;
            for m in 0..samples {
                let point = sample_point(&b.params, m);
                let jets: Vec<Vec<Q>> = b.jets[..outer.order]
                    .iter()
                    .map(|x| x.iter().map(|e| e.eval(&point).expect("sampled")).collect())
                    .collect();
                let contained = outer.branches.iter().any(|o| {
                    let mut eqs = o.constraints.clone();
                    for (ox, v) in o.jets.iter().zip(&jets) {
                        eqs.extend(ox.iter().zip(v).map(|(e, q)| e - &MultiPoly::constant(q.clone())));
                    }
                    has_real_solution(eqs) == Membership::Yes
                });
                ok &= contained;
            }
            c.check(ok, format!("{name}: stage {} branch {} nests in stage {}", inner.order, bi + 1, outer.order));
        }
    }
}

#[test]
fn criterion_3_invariants() {
    let mut c = Criterion::new(3);
    check_nesting(&mut c, "six_bar", 50);
    check_nesting(&mut c, "seven_r", 50);

    for linkage in [bundled::six_bar(), bundled::seven_r()] {
        let systems = systems_up_to(&linkage, 6).expect("bundled linkage builds");
        let first = systems[0].leading_matrix();
        c.check(first == systems[0].loops().jacobian, format!("{}: order-1 matrix is the velocity matrix", linkage.name));
        for sys in &systems {
            if sys.order <= 4 {
                let homogeneous = sys.components().all(|p| p.is_zero() || p.weighted_degrees() == [sys.order as u32].into());
                c.check(homogeneous, format!("{}: H^({}) is weighted homogeneous", linkage.name, sys.order));
            }
            c.check(sys.leading_matrix() == first, format!("{}: leading matrix of order {} equals the order-1 matrix", linkage.name, sys.order));
        }
    }

    // Lie algebra identities on a fixed grid of rational twists.
    let twists: Vec<Twist<Q>> = (0..8).map(|m| q_twist(&(0..6).map(|k| sample_value(6 * m + k)).collect::<Vec<_>>())).collect();
    for a in &twists {
        for b in &twists {
            c.check(lie_bracket(a, b) == lie_bracket(b, a).neg(), "bracket antisymmetry");
            for d in twists.iter().take(3) {
                let jacobi = lie_bracket(a, &lie_bracket(b, d))
                    .add(&lie_bracket(b, &lie_bracket(d, a)))
                    .add(&lie_bracket(d, &lie_bracket(a, b)));
                c.check(jacobi.is_zero(), "Jacobi identity");
            }
        }
    }
    // Exact rational rotations for the adjoint homomorphism.
    for (i, a) in twists.iter().enumerate() {
        let g = cayley_pose(&twists[(i + 1) % twists.len()], &twists[(i + 2) % twists.len()]);
        let h = cayley_pose(&twists[(i + 3) % twists.len()], a);
        let b = &twists[(i + 4) % twists.len()];
        c.check(
            adjoint_apply(&g, &lie_bracket(a, b)) == lie_bracket(&adjoint_apply(&g, a), &adjoint_apply(&g, b)),
            "Ad preserves the bracket (exact)",
        );
        c.check(adjoint_apply(&compose(&g, &h), a) == adjoint_apply(&g, &adjoint_apply(&h, a)), "Ad(gh) = Ad(g)Ad(h) (exact)");
    }
    // Floating point through the exponential.
    for (i, a) in twists.iter().enumerate() {
        let af = a.to_f64();
        let bf = twists[(i + 1) % twists.len()].to_f64();
        let g = exp_twist(&twists[(i + 2) % twists.len()].to_f64(), 0.3 + i as f64 * 0.1);
        let h = exp_twist(&twists[(i + 3) % twists.len()].to_f64(), -0.7);
        let lhs = adjoint_apply(&g, &lie_bracket(&af, &bf));
        let rhs = lie_bracket(&adjoint_apply(&g, &af), &adjoint_apply(&g, &bf));
        let scale = 1.0 + lhs.to_array().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = lhs.to_array().iter().zip(rhs.to_array()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        c.check(err < 1e-10 * scale, format!("Ad preserves the bracket in floating point (err {err:.2e})"));
        let lhs = adjoint_apply(&compose(&g, &h), &af);
        let rhs = adjoint_apply(&g, &adjoint_apply(&h, &af));
        let err = lhs.to_array().iter().zip(rhs.to_array()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        c.check(err < 1e-10 * scale, format!("Ad(gh) = Ad(g)Ad(h) in floating point (err {err:.2e})"));
    }
    c.finish();
}

#[test]
fn criterion_4_tracer() {
    let mut c = Criterion::new(4);
    let linkage = bundled::seven_r();
    let a = analyze(&linkage, DEFAULT_MAX_ORDER).expect("7R builds");
    let model = linkage.local_model();
    let branches = &a.last().branches;
    c.check(branches.len() == 2, format!("two final branches (got {})", branches.len()));

    for b in branches {
        // Seed with x1 = (1,0,1,0,4/3,0,4/3): the order-1 parameter is fixed by x1_1 = 1.
        let x1_1 = &b.jets[0][0];
        let p = *b.params.iter().find(|v| v.order() == 1).expect("order-1 parameter");
        let slope = x1_1.derivative(p).constant_value().expect("x1_1 is linear");
        let mut params: BTreeMap<_, f64> = b.params.iter().map(|&v| (v, 0.0)).collect();
        params.insert(p, 1.0 / q_to_f64(&slope));

        let y4_exact = b.jets[1][3].derivative(p).derivative(p).constant_value().map(|q| q_to_f64(&q) / 2.0 / q_to_f64(&slope).powi(2));
        let target = y4_exact.unwrap_or(f64::NAN);
        let reference = if b.jets[1][3].is_zero() { 0.0 } else { -4.0 / 3.0 };
        c.check((target - reference).abs() < 1e-12, format!("exact y4 coefficient {target} matches {reference}"));

        let mut errors = Vec::new();
        for h in [0.02, 0.01] {
            match trace_branch(&model, b, &params, 8, h) {
                Ok(curve) => {
                    c.check(curve.points.len() == 17, "17 traced points");
                    c.check(
                        curve.max_residual() < ACCEPT_TOLERANCE,
                        format!("closure residual {:.2e} below 1e-10 at h = {h}", curve.max_residual()),
                    );
                    let fitted = fit_jets(&curve, 2).expect("enough points");
                    let y4 = fitted[1][3];
                    let err = (y4 - reference).abs();
                    if h == 0.02 {
                        if reference == 0.0 {
                            c.check(err < 1e-3, format!("branch with y4 = 0: fitted {y4:.6} within 1e-3"));
                        } else {
                            c.check(err < 0.05 * reference.abs(), format!("branch with y4 = -4/3: fitted {y4:.6} within 5%"));
                        }
                    }
                    // The acceleration of the first coordinate is generic on both branches.
                    let y2_exact = q_to_f64(&b.jets[1][1].derivative(p).derivative(p).constant_value().expect("quadratic"))
                        / 2.0
                        / q_to_f64(&slope).powi(2);
                    errors.push(((fitted[1][1] - y2_exact).abs(), err));
                }
                Err(e) => c.check(false, format!("trace at h = {h} failed: {e}")),
            }
        }
        if let [(e2_coarse, e4_coarse), (e2_fine, e4_fine)] = errors[..] {
            let (coarse, fine) = if reference == 0.0 { (e2_coarse, e2_fine) } else { (e4_coarse, e4_fine) };
            c.check(coarse / fine >= 3.0, format!("halving h improves the fit error {coarse:.3e} -> {fine:.3e} by at least 3x"));
        }
    }
    c.finish();
}

#[test]
fn criterion_5_controls() {
    let mut c = Criterion::new(5);

    let four = analyze(&bundled::four_bar(), DEFAULT_MAX_ORDER).expect("four-bar builds");
    let cl = classify(&four);
    c.check(cl.kind == ClassificationKind::RegularPoint, format!("four-bar is a regular point (got {})", cl.kind));
    c.check(four.kappa == 1, format!("four-bar kappa 1 (got {})", four.kappa));

    let two = analyze(&bundled::two_joint(), 6).expect("two-joint builds");
    c.check(two.stages.len() == 6, format!("two-joint analyzed through order 6 (got {})", two.stages.len()));
    for st in &two.stages {
        c.check(
            st.branches.len() == 1 && st.branches[0].dim() == 1,
            format!("two-joint stage {}: one 1-dim branch (got {} branches)", st.order, st.branches.len()),
        );
    }

    let expected = bundled_examples();
    let clean = verify_pairs(&expected, 4);
    c.check(clean.failures.is_empty(), format!("unmutated examples pass: {clean}"));
    let mut total = 0;
    for (exp, doc) in &expected {
        for (label, mutated) in mutations(doc) {
            total += 1;
            let summary = verify_pairs(&[(exp.clone(), mutated.as_str())], 4);
            c.check(!summary.failures.is_empty(), format!("{}: mutation {label} is detected", exp.example));
        }
    }
    c.check(total == 6 * 13 + 6 * 7, format!("every screw coordinate mutated ({total})"));
    c.finish();
}
