use nalgebra::DMatrix;

use super::model::{Linkage, LinkageError};
use crate::scalar::{q_to_f64, Q};
use crate::screw::{adjoint_apply, compose, exp_twist, exp_twist_exact, PoseTransform, Twist};

/// Screw of each cycle entry at `q0`, exactly: `(coord, sign, S)` in cycle order.
pub type ExactCycleScrews = Vec<(usize, i8, Twist<Q>)>;

impl Linkage {
    /// `f_l(q)`: ordered product of `exp(σ q Y)` around cycle `l`.
    pub fn constraint_map(&self, l: usize, q: &[f64]) -> PoseTransform<f64> {
        self.cycles[l].entries.iter().fold(PoseTransform::identity(), |g, e| {
            compose(&g, &exp_twist(&self.screw(e.coord).to_f64(), f64::from(e.sign) * q[e.coord]))
        })
    }

    /// Sum over cycles of rotation angle plus translation norm of `f_l(q)`.
    pub fn closure_residual(&self, q: &[f64]) -> f64 {
        (0..self.cycles.len()).map(|l| pose_deviation(&self.constraint_map(l, q))).sum()
    }

    /// `S_i = Ad_{g_{l,i}(q)} Y_i`, where `g_{l,i}` multiplies the cycle's
    /// exponentials up to and including joint `i`.
    pub fn joint_screws_at(&self, l: usize, q: &[f64]) -> Vec<Twist<f64>> {
        let mut g = PoseTransform::identity();
        self.cycles[l]
            .entries
            .iter()
            .map(|e| {
                let y = self.screw(e.coord).to_f64();
                g = compose(&g, &exp_twist(&y, f64::from(e.sign) * q[e.coord]));
                adjoint_apply(&g, &y)
            })
            .collect()
    }

    /// Exact joint screws at `q0` for every cycle.
    ///
    /// Uses `current_screws` when the document supplies them; otherwise
    /// transports the reference screws, which is exact only when every
    /// partial product is rational (zero or pure-translation displacements).
    pub fn exact_screws_at_q0(&self) -> Result<Vec<ExactCycleScrews>, LinkageError> {
        self.cycles
            .iter()
            .map(|cycle| {
                let mut g = PoseTransform::<Q>::identity();
                cycle
                    .entries
                    .iter()
                    .map(|e| {
                        if let Some(cur) = &self.current_screws {
                            return Ok((e.coord, e.sign, cur[e.coord].clone()));
                        }
                        let y = self.screw(e.coord);
                        let angle = &self.q0[e.coord] * Q::from_integer(e.sign.into());
                        let step = exp_twist_exact(y, &angle)
                            .ok_or_else(|| LinkageError::NonRepresentable { coord: self.coord_label(e.coord) })?;
                        g = compose(&g, &step);
                        Ok((e.coord, e.sign, adjoint_apply(&g, y)))
                    })
                    .collect()
            })
            .collect()
    }

    /// Floating model for continuation around `q0`.
    pub fn local_model(&self) -> LoopModel {
        let q0: Vec<f64> = self.q0.iter().map(q_to_f64).collect();
        match &self.current_screws {
            Some(cur) => LoopModel {
                cycles: self.cycles.iter().map(|c| c.entries.iter().map(|e| (e.coord, f64::from(e.sign))).collect()).collect(),
                screws: cur.iter().map(Twist::to_f64).collect(),
                origin: q0.clone(),
                q0,
            },
            None => LoopModel {
                cycles: self.cycles.iter().map(|c| c.entries.iter().map(|e| (e.coord, f64::from(e.sign))).collect()).collect(),
                screws: (0..self.n()).map(|i| self.screw(i).to_f64()).collect(),
                origin: vec![0.0; self.n()],
                q0,
            },
        }
    }
}

fn pose_deviation(g: &PoseTransform<f64>) -> f64 {
    let p = g.translation;
    g.rotation_angle() + (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Loop closure equations in floating point.
///
/// Joint `i` contributes `exp(σ (q_i − origin_i) screw_i)`; without a screw
/// override the origin is zero and the screws are the reference screws.
#[derive(Clone, Debug)]
pub struct LoopModel {
    pub cycles: Vec<Vec<(usize, f64)>>,
    pub screws: Vec<Twist<f64>>,
    pub origin: Vec<f64>,
    /// Configuration analyzed, as the starting point of traces.
    pub q0: Vec<f64>,
}

impl LoopModel {
    pub fn n(&self) -> usize {
        self.screws.len()
    }

    pub fn constraint_map(&self, l: usize, q: &[f64]) -> PoseTransform<f64> {
        self.cycles[l].iter().fold(PoseTransform::identity(), |g, &(c, s)| {
            compose(&g, &exp_twist(&self.screws[c], s * (q[c] - self.origin[c])))
        })
    }

    /// Stacked per-cycle `(rotation vector, translation)`.
    pub fn residual(&self, q: &[f64]) -> Vec<f64> {
        let mut r = Vec::with_capacity(6 * self.cycles.len());
        for l in 0..self.cycles.len() {
            let g = self.constraint_map(l, q);
            r.extend(g.rotation_vector());
            r.extend(g.translation);
        }
        r
    }

    pub fn closure_residual(&self, q: &[f64]) -> f64 {
        (0..self.cycles.len()).map(|l| pose_deviation(&self.constraint_map(l, q))).sum()
    }

    /// Jacobian of [`residual`](Self::residual) in spatial form: column `i`
    /// holds `σ (ω_i, v_i + ω_i × p_l)` for the current screws, which is exact
    /// for the translation rows and first-order accurate for the rotation
    /// rows near closure.
    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(6 * self.cycles.len(), self.n());
        for (l, cycle) in self.cycles.iter().enumerate() {
            let mut g = PoseTransform::identity();
            let mut cols = Vec::with_capacity(cycle.len());
            for &(c, s) in cycle {
                g = compose(&g, &exp_twist(&self.screws[c], s * (q[c] - self.origin[c])));
                cols.push((c, s, adjoint_apply(&g, &self.screws[c])));
            }
            let p = g.translation;
            for (c, s, st) in cols {
                let w = st.angular;
                let v = st.linear;
                let wxp = [w[1] * p[2] - w[2] * p[1], w[2] * p[0] - w[0] * p[2], w[0] * p[1] - w[1] * p[0]];
                for k in 0..3 {
                    jac[(6 * l + k, c)] += s * w[k];
                    jac[(6 * l + 3 + k, c)] += s * (v[k] + wxp[k]);
                }
            }
        }
        jac
    }
}
