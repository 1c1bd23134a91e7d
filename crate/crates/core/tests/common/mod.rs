//! Helpers shared by the integration tests.
#![allow(dead_code)]

use serde_json::Value;

use tancone::poly::RationalMatrix;
use tancone::scalar::{format_rational, parse_rational, qi, Q};
use tancone::screw::{PoseTransform, Twist};

/// Nonzero rows of the reduced echelon form.
pub fn canonical(rows: Vec<Vec<Q>>) -> RationalMatrix {
    let (r, pivots) = RationalMatrix::from_rows(rows).rref();
    RationalMatrix::from_rows((0..pivots.len()).map(|i| r.row(i).to_vec()).collect())
}

pub fn q_twist(c: &[Q]) -> Twist<Q> {
    Twist::from_array(std::array::from_fn(|i| c[i].clone()))
}

/// Exact rigid motion: Cayley rotation of `rot.angular`, translation `shift.linear`.
pub fn cayley_pose(rot: &Twist<Q>, shift: &Twist<Q>) -> PoseTransform<Q> {
    let w = &rot.angular;
    let n2 = &w[0] * &w[0] + &w[1] * &w[1] + &w[2] * &w[2];
    let den = qi(1) + &n2;
    let k = [
        [qi(0), -w[2].clone(), w[1].clone()],
        [w[2].clone(), qi(0), -w[0].clone()],
        [-w[1].clone(), w[0].clone(), qi(0)],
    ];
    // R = ((1 − |w|²) I + 2 w wᵀ + 2 K) / (1 + |w|²)
    let rotation = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let id = if i == j { qi(1) - &n2 } else { qi(0) };
            (id + qi(2) * &w[i] * &w[j] + qi(2) * &k[i][j]) / &den
        })
    });
    PoseTransform { rotation, translation: shift.linear.clone() }
}

/// Every single-coordinate `+1` perturbation of the joint screws in a document.
pub fn mutations(doc: &str) -> Vec<(String, String)> {
    let base: Value = serde_json::from_str(doc).expect("bundled document is JSON");
    let mut out = Vec::new();
    let joints = base["joints"].as_array().expect("joints array");
    for (ji, joint) in joints.iter().enumerate() {
        let id = joint["id"].as_str().unwrap_or("?").to_string();
        let screws = joint["screws"].as_array().expect("screws array");
        for (si, screw) in screws.iter().enumerate() {
            for k in 0..screw.as_array().map_or(0, Vec::len) {
                let mut v = base.clone();
                let cell = &mut v["joints"][ji]["screws"][si][k];
                let q = parse_rational(cell.as_str().expect("rational string")).expect("rational");
                *cell = Value::String(format_rational(&(q + qi(1))));
                out.push((format!("{id}.{}[{k}]", si + 1), v.to_string()));
            }
        }
    }
    out
}
