//! Floating-point continuation along a branch.
//!
//! Each step predicts with the branch's truncated Taylor polynomial and then
//! projects back onto the closure variety by Gauss-Newton, keeping the
//! correction orthogonal to the local tangent so the iterate cannot slide
//! onto a neighbouring branch.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::SolutionBranch;
use crate::linkage::LoopModel;
use crate::poly::Var;

/// Corrector target on the closure residual.
pub const CORRECTOR_TOLERANCE: f64 = 1e-12;
/// Largest closure residual accepted for a traced point.
pub const ACCEPT_TOLERANCE: f64 = 1e-10;
/// Gauss-Newton iteration cap per point.
pub const MAX_ITERATIONS: usize = 50;

/// Points `q(t_m)`, `t_m = m·h`, for `m = −M..=M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracedCurve {
    pub h: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

impl TracedCurve {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Point at `t = 0`.
    pub fn center(&self) -> &[f64] {
        &self.points[self.steps]
    }

    /// Tab-separated rows `t, q_1..q_n, residual` with a header line.
    pub fn to_tsv(&self, labels: &[String]) -> String {
        let mut out = String::from("# t");
        for l in labels {
            out.push('\t');
            out.push_str(l);
        }
        out.push_str("\tresidual\n");
        for ((t, q), r) in self.times.iter().zip(&self.points).zip(&self.residuals) {
            out.push_str(&format!("{t:.6}"));
            for v in q {
                out.push_str(&format!("\t{v:.15e}"));
            }
            out.push_str(&format!("\t{r:.3e}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("branch tangent vanishes at the given parameters")]
    ZeroTangent,
    #[error("no value for branch parameter {0}")]
    MissingParameter(String),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("trace failure at step {step}: corrector stalled at residual {residual:.3e}")]
    TraceFailure { step: i64, residual: f64 },
    #[error("need at least {needed} points to fit order {order}, have {have}")]
    InsufficientPoints { order: usize, needed: usize, have: usize },
}

/// Parameter values with every order-1 parameter at one and the rest at zero.
pub fn default_params(branch: &SolutionBranch) -> BTreeMap<Var, f64> {
    branch.params.iter().map(|&v| (v, if v.order() == 1 { 1.0 } else { 0.0 })).collect()
}

/// Jets of `branch` at `params`, as floats; parameters not given count as zero.
pub fn jets_at(branch: &SolutionBranch, params: &BTreeMap<Var, f64>) -> Vec<Vec<f64>> {
    let mut values: BTreeMap<Var, f64> = branch.params.iter().map(|&v| (v, 0.0)).collect();
    for c in &branch.constraints {
        values.extend(c.vars().into_iter().map(|v| (v, 0.0)));
    }
    values.extend(params.iter().map(|(k, v)| (*k, *v)));
    branch
        .jets
        .iter()
        .map(|x| x.iter().map(|e| e.eval_f64(&values).expect("all parameters assigned")).collect())
        .collect()
}

/// Taylor polynomial `Σ x_k t^k / k!` and its derivative.
fn taylor(jets: &[Vec<f64>], t: f64) -> (Vec<f64>, Vec<f64>) {
    let n = jets.first().map_or(0, Vec::len);
    let mut value = vec![0.0; n];
    let mut slope = vec![0.0; n];
    let mut fact = 1.0;
    for (k, x) in jets.iter().enumerate() {
        let k = k + 1;
        fact *= k as f64;
        let p = t.powi(k as i32) / fact;
        let dp = t.powi(k as i32 - 1) / (fact / k as f64);
        for j in 0..n {
            value[j] += x[j] * p;
            slope[j] += x[j] * dp;
        }
    }
    (value, slope)
}

/// Traces `2M + 1` points of the branch through `model.q0`.
pub fn trace_branch(
    model: &LoopModel,
    branch: &SolutionBranch,
    params: &BTreeMap<Var, f64>,
    steps: usize,
    h: f64,
) -> Result<TracedCurve, TraceError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(TraceError::BadStep(h));
    }
    for p in params.keys() {
        if !branch.params.contains(p) {
            return Err(TraceError::MissingParameter(p.to_string()));
        }
    }
    let jets = jets_at(branch, params);
    if jets.first().is_none_or(|x1| x1.iter().all(|v| v.abs() < 1e-300)) {
        return Err(TraceError::ZeroTangent);
    }
    let n = model.n();
    let q0 = model.q0.clone();
    let m = steps as i64;
    let mut points = vec![Vec::new(); 2 * steps + 1];
    let mut residuals = vec![0.0; 2 * steps + 1];
    points[steps] = q0.clone();
    residuals[steps] = model.closure_residual(&q0);
    for dir in [1i64, -1] {
        let mut prev = q0.clone();
        for k in 1..=m {
            let t_prev = (dir * (k - 1)) as f64 * h;
            let t = (dir * k) as f64 * h;
            let (tp, _) = taylor(&jets, t_prev);
            let (tn, slope) = taylor(&jets, t);
            let guess: Vec<f64> = (0..n).map(|j| prev[j] + tn[j] - tp[j]).collect();
            let (q, r) = correct(model, guess, &slope);
            if !(r < ACCEPT_TOLERANCE) {
                return Err(TraceError::TraceFailure { step: dir * k, residual: r });
            }
            let idx = (steps as i64 + dir * k) as usize;
            points[idx] = q.clone();
            residuals[idx] = r;
            prev = q;
        }
    }
    let times = (-m..=m).map(|k| k as f64 * h).collect();
    Ok(TracedCurve { h, steps, times, points, residuals })
}

/// Gauss-Newton on `[J; τᵀ] Δ = [−r; 0]` in the least-squares sense.
fn correct(model: &LoopModel, mut q: Vec<f64>, tangent: &[f64]) -> (Vec<f64>, f64) {
    let n = q.len();
    let norm = tangent.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let tau: Vec<f64> = tangent.iter().map(|v| v / norm).collect();
    let mut res = model.closure_residual(&q);
    for _ in 0..MAX_ITERATIONS {
        if res < CORRECTOR_TOLERANCE {
            break;
        }
        let r = model.residual(&q);
        let jac = model.jacobian(&q);
        let rows = jac.nrows();
        let mut a = DMatrix::zeros(rows + 1, n);
        a.view_mut((0, 0), (rows, n)).copy_from(&jac);
        for j in 0..n {
            a[(rows, j)] = tau[j];
        }
        let mut b = DVector::zeros(rows + 1);
        for i in 0..rows {
            b[i] = -r[i];
        }
        let svd = a.svd(true, true);
        let Ok(delta) = svd.solve(&b, 1e-12) else { break };
        let next: Vec<f64> = (0..n).map(|j| q[j] + delta[j]).collect();
        let next_res = model.closure_residual(&next);
        if !next_res.is_finite() {
            break;
        }
        let stalled = next_res >= res;
        q = next;
        res = next_res;
        if stalled && res < ACCEPT_TOLERANCE {
            break;
        }
    }
    (q, res)
}

/// Estimates of `x_1..x_order` at `t = 0` from a least-squares polynomial
/// fit of degree `order + 2`.
pub fn fit_jets(curve: &TracedCurve, order: usize) -> Result<Vec<Vec<f64>>, TraceError> {
    let degree = order + 2;
    let have = curve.points.len();
    if have < degree + 1 {
        return Err(TraceError::InsufficientPoints { order, needed: degree + 1, have });
    }
    let scale = curve.times.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let vander = DMatrix::from_fn(have, degree + 1, |i, k| (curve.times[i] / scale).powi(k as i32));
    let svd = vander.svd(true, true);
    let n = curve.points[0].len();
    let mut out = vec![vec![0.0; n]; order];
    for j in 0..n {
        let y = DVector::from_iterator(have, curve.points.iter().map(|q| q[j]));
        let c = svd.solve(&y, 1e-14).expect("singular vectors were computed");
        let mut fact = 1.0;
        for k in 1..=order {
            fact *= k as f64;
            out[k - 1][j] = c[k] * fact / scale.powi(k as i32);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(c: f64, h: f64, m: usize) -> TracedCurve {
        let times: Vec<f64> = (-(m as i64)..=m as i64).map(|k| k as f64 * h).collect();
        let points = times.iter().map(|t| vec![c * t * t, 2.0 * t]).collect();
        TracedCurve { h, steps: m, residuals: vec![0.0; times.len()], times, points }
    }

    #[test]
    fn exact_quadratic_fit() {
        let jets = fit_jets(&synthetic(0.7, 0.05, 4), 2).unwrap();
        assert!((jets[1][0] - 1.4).abs() < 1e-10);
        assert!((jets[0][1] - 2.0).abs() < 1e-10);
        assert!(jets[0][0].abs() < 1e-10);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(fit_jets(&synthetic(1.0, 0.1, 1), 2), Err(TraceError::InsufficientPoints { .. })));
    }

    #[test]
    fn taylor_derivative() {
        let (v, d) = taylor(&[vec![1.0], vec![2.0], vec![6.0]], 0.5);
        assert!((v[0] - (0.5 + 0.25 + 0.125)).abs() < 1e-15);
        assert!((d[0] - (1.0 + 1.0 + 0.75)).abs() < 1e-15);
    }
}
