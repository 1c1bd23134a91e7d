//! Screw coordinates and rigid displacements.
//!
//! A [`Twist`] is stored as `(angular, linear)` with no normalization, so the
//! same type carries joint screws of any pitch and magnitude. Everything is
//! generic over [`Ring`] so the exact pipeline can run on rationals or on
//! polynomials while the tracer runs on `f64`.

use std::fmt;

use crate::scalar::{Ring, Q};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Twist<T = Q> {
    pub angular: [T; 3],
    pub linear: [T; 3],
}

impl<T: fmt::Debug> fmt::Debug for Twist<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.angular.iter().chain(self.linear.iter()))
            .finish()
    }
}

fn cross<T: Ring>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1].mul(&b[2]).sub(&a[2].mul(&b[1])),
        a[2].mul(&b[0]).sub(&a[0].mul(&b[2])),
        a[0].mul(&b[1]).sub(&a[1].mul(&b[0])),
    ]
}

fn add3<T: Ring>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [a[0].add(&b[0]), a[1].add(&b[1]), a[2].add(&b[2])]
}

fn mat_vec<T: Ring>(m: &[[T; 3]; 3], v: &[T; 3]) -> [T; 3] {
    std::array::from_fn(|i| m[i][0].mul(&v[0]).add(&m[i][1].mul(&v[1])).add(&m[i][2].mul(&v[2])))
}

fn mat_mul<T: Ring>(a: &[[T; 3]; 3], b: &[[T; 3]; 3]) -> [[T; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            a[i][0]
                .mul(&b[0][j])
                .add(&a[i][1].mul(&b[1][j]))
                .add(&a[i][2].mul(&b[2][j]))
        })
    })
}

impl<T: Ring> Twist<T> {
    pub fn new(angular: [T; 3], linear: [T; 3]) -> Self {
        Self { angular, linear }
    }

    pub fn zero() -> Self {
        Self::new(std::array::from_fn(|_| T::ring_zero()), std::array::from_fn(|_| T::ring_zero()))
    }

    /// Builds from the 6-vector `(ω, v)`.
    pub fn from_array(c: [T; 6]) -> Self {
        let [a0, a1, a2, l0, l1, l2] = c;
        Self::new([a0, a1, a2], [l0, l1, l2])
    }

    pub fn component(&self, i: usize) -> &T {
        if i < 3 {
            &self.angular[i]
        } else {
            &self.linear[i - 3]
        }
    }

    pub fn to_array(&self) -> [T; 6] {
        std::array::from_fn(|i| self.component(i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.angular.iter().chain(self.linear.iter()).all(Ring::is_ring_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(add3(&self.angular, &other.angular), add3(&self.linear, &other.linear))
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::new(
            std::array::from_fn(|i| k.mul(&self.angular[i])),
            std::array::from_fn(|i| k.mul(&self.linear[i])),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(
            std::array::from_fn(|i| self.angular[i].neg()),
            std::array::from_fn(|i| self.linear[i].neg()),
        )
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Twist<U> {
        Twist {
            angular: std::array::from_fn(|i| f(&self.angular[i])),
            linear: std::array::from_fn(|i| f(&self.linear[i])),
        }
    }
}

impl Twist<Q> {
    pub fn to_f64(&self) -> Twist<f64> {
        self.map(<f64 as Ring>::from_rational)
    }

    pub fn lift<T: Ring>(&self) -> Twist<T> {
        self.map(T::from_rational)
    }
}

/// Screw product `[A, B] = (ω₁×ω₂, ω₁×v₂ − ω₂×v₁)`.
pub fn lie_bracket<T: Ring>(a: &Twist<T>, b: &Twist<T>) -> Twist<T> {
    let w = cross(&a.angular, &b.angular);
    let l1 = cross(&a.angular, &b.linear);
    let l2 = cross(&b.angular, &a.linear);
    Twist::new(w, std::array::from_fn(|i| l1[i].sub(&l2[i])))
}

/// Rigid displacement stored as rotation plus translation.
#[derive(Clone, PartialEq)]
pub struct PoseTransform<T = f64> {
    pub rotation: [[T; 3]; 3],
    pub translation: [T; 3],
}

impl<T: fmt::Debug> fmt::Debug for PoseTransform<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoseTransform")
            .field("rotation", &self.rotation)
            .field("translation", &self.translation)
            .finish()
    }
}

impl<T: Ring> PoseTransform<T> {
    pub fn identity() -> Self {
        let one = T::from_rational(&crate::scalar::qi(1));
        Self {
            rotation: std::array::from_fn(|i| {
                std::array::from_fn(|j| if i == j { one.clone() } else { T::ring_zero() })
            }),
            translation: std::array::from_fn(|_| T::ring_zero()),
        }
    }

    pub fn from_translation(p: [T; 3]) -> Self {
        Self { translation: p, ..Self::identity() }
    }

    pub fn inverse(&self) -> Self {
        let rt: [[T; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| self.rotation[j][i].clone()));
        let p = mat_vec(&rt, &self.translation);
        Self { rotation: rt, translation: std::array::from_fn(|i| p[i].neg()) }
    }

    pub fn apply_point(&self, x: &[T; 3]) -> [T; 3] {
        add3(&mat_vec(&self.rotation, x), &self.translation)
    }
}

/// Group product `g1 · g2`.
pub fn compose<T: Ring>(g1: &PoseTransform<T>, g2: &PoseTransform<T>) -> PoseTransform<T> {
    PoseTransform {
        rotation: mat_mul(&g1.rotation, &g2.rotation),
        translation: add3(&mat_vec(&g1.rotation, &g2.translation), &g1.translation),
    }
}

/// `Ad_g Y`: ω′ = Rω, v′ = p × Rω + Rv.
pub fn adjoint_apply<T: Ring>(g: &PoseTransform<T>, y: &Twist<T>) -> Twist<T> {
    let rw = mat_vec(&g.rotation, &y.angular);
    let rv = mat_vec(&g.rotation, &y.linear);
    let pxrw = cross(&g.translation, &rw);
    Twist::new(rw, add3(&pxrw, &rv))
}

fn skew(w: &[f64; 3]) -> [[f64; 3]; 3] {
    [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
}

/// `exp(q·Y)` in closed form. The pure-translation case (ω exactly zero) never
/// divides by ‖ω‖.
pub fn exp_twist(y: &Twist<f64>, q: f64) -> PoseTransform<f64> {
    let w = y.angular;
    let v = y.linear;
    let wn2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    if wn2 == 0.0 {
        return PoseTransform::from_translation([v[0] * q, v[1] * q, v[2] * q]);
    }
    let wn = wn2.sqrt();
    let theta = wn * q;
    let (s, c) = theta.sin_cos();
    let k = skew(&w);
    let k2 = mat_mul(&k, &k);
    // R = I + sinθ/|ω| K + (1−cosθ)/|ω|² K²
    let a = s / wn;
    let b = (1.0 - c) / wn2;
    let rotation = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id + a * k[i][j] + b * k2[i][j]
        })
    });
    // p = (qI + (1−cosθ)/|ω|² K + (θ − sinθ)/|ω|³ K²) v
    let c1 = (1.0 - c) / wn2;
    let c2 = (theta - s) / (wn2 * wn);
    let kv = mat_vec(&k, &v);
    let k2v = mat_vec(&k2, &v);
    let translation = std::array::from_fn(|i| q * v[i] + c1 * kv[i] + c2 * k2v[i]);
    PoseTransform { rotation, translation }
}

/// Exact `exp(q·Y)` when it is rational: `q = 0` or a pure translation.
pub fn exp_twist_exact(y: &Twist<Q>, q: &Q) -> Option<PoseTransform<Q>> {
    use num_traits::Zero;
    if Zero::is_zero(q) {
        return Some(PoseTransform::identity());
    }
    if y.angular.iter().all(Zero::is_zero) {
        return Some(PoseTransform::from_translation(std::array::from_fn(|i| &y.linear[i] * q)));
    }
    None
}

impl PoseTransform<f64> {
    /// Rotation angle in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        let r = &self.rotation;
        let tr = r[0][0] + r[1][1] + r[2][2];
        // atan2 form stays accurate near 0 and π
        let sx = r[2][1] - r[1][2];
        let sy = r[0][2] - r[2][0];
        let sz = r[1][0] - r[0][1];
        let sin2 = (sx * sx + sy * sy + sz * sz).sqrt();
        sin2.atan2(tr - 1.0)
    }

    /// Rotation vector (axis·angle) of the rotation part.
    pub fn rotation_vector(&self) -> [f64; 3] {
        let r = &self.rotation;
        let theta = self.rotation_angle();
        let s = [r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]];
        if theta < 1e-8 {
            return [0.5 * s[0], 0.5 * s[1], 0.5 * s[2]];
        }
        if std::f64::consts::PI - theta < 1e-6 {
            // axis from the symmetric part: R + I = 2 n nᵀ at θ = π
            let mut best = 0;
            for i in 1..3 {
                if r[i][i] > r[best][best] {
                    best = i;
                }
            }
            let mut n = [0.0; 3];
            let d = ((r[best][best] + 1.0) / 2.0).max(0.0).sqrt();
            for i in 0..3 {
                n[i] = if i == best { d } else { (r[i][best] + r[best][i]) / (4.0 * d) };
            }
            if s[0] * n[0] + s[1] * n[1] + s[2] * n[2] < 0.0 {
                n = [-n[0], -n[1], -n[2]];
            }
            return [theta * n[0], theta * n[1], theta * n[2]];
        }
        let f = theta / (2.0 * theta.sin());
        [f * s[0], f * s[1], f * s[2]]
    }

    /// Matrix logarithm as a twist `(ω, v)` with `exp_twist(log(g), 1) = g`.
    pub fn log(&self) -> Twist<f64> {
        let w = self.rotation_vector();
        let theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        let p = self.translation;
        if theta < 1e-12 {
            return Twist::new(w, p);
        }
        // V⁻¹ = I − ½K + (1/θ²)(1 − θ sinθ / (2(1 − cosθ))) K²
        let k = skew(&w);
        let k2 = mat_mul(&k, &k);
        let c = (1.0 - theta * theta.sin() / (2.0 * (1.0 - theta.cos()))) / (theta * theta);
        let kp = mat_vec(&k, &p);
        let k2p = mat_vec(&k2, &p);
        Twist::new(w, std::array::from_fn(|i| p[i] - 0.5 * kp[i] + c * k2p[i]))
    }

    /// Largest deviation of `RᵀR` from identity plus `|det R − 1|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let r = &self.rotation;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - id).abs());
            }
        }
        let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        worst + (det - 1.0).abs()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.rotation[i][j] - other.rotation[i][j]).abs());
            }
            d = d.max((self.translation[i] - other.translation[i]).abs());
        }
        d
    }
}

impl PoseTransform<Q> {
    pub fn to_f64(&self) -> PoseTransform<f64> {
        PoseTransform {
            rotation: std::array::from_fn(|i| {
                std::array::from_fn(|j| <f64 as Ring>::from_rational(&self.rotation[i][j]))
            }),
            translation: std::array::from_fn(|i| <f64 as Ring>::from_rational(&self.translation[i])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qi, qr};
    use std::f64::consts::PI;

    type M4 = [[f64; 4]; 4];

    fn hat(y: &Twist<f64>) -> M4 {
        let w = y.angular;
        let v = y.linear;
        [
            [0.0, -w[2], w[1], v[0]],
            [w[2], 0.0, -w[0], v[1]],
            [-w[1], w[0], 0.0, v[2]],
            [0.0; 4],
        ]
    }

    fn vee(m: &M4) -> Twist<f64> {
        Twist::new([m[2][1], m[0][2], m[1][0]], [m[0][3], m[1][3], m[2][3]])
    }

    fn mm(a: &M4, b: &M4) -> M4 {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
    }

    fn homog(g: &PoseTransform<f64>) -> M4 {
        let mut m = [[0.0; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = g.rotation[i][j];
            }
            m[i][3] = g.translation[i];
        }
        m[3][3] = 1.0;
        m
    }

    // truncated series oracle for the 4×4 matrix exponential
    fn series_exp(y: &Twist<f64>, q: f64, terms: usize) -> PoseTransform<f64> {
        let x: M4 = hat(y).map(|r| r.map(|e| e * q));
        let mut acc: M4 = std::array::from_fn(|i| std::array::from_fn(|j| (i == j) as u8 as f64));
        let mut term = acc;
        for k in 1..terms {
            term = mm(&term, &x).map(|r| r.map(|e| e / k as f64));
            for i in 0..4 {
                for j in 0..4 {
                    acc[i][j] += term[i][j];
                }
            }
        }
        PoseTransform {
            rotation: std::array::from_fn(|i| std::array::from_fn(|j| acc[i][j])),
            translation: [acc[0][3], acc[1][3], acc[2][3]],
        }
    }

    fn tw(c: [i64; 6]) -> Twist<Q> {
        Twist::from_array(c.map(qi))
    }

    #[test]
    fn exp_identity_at_zero() {
        let y = Twist::<f64>::from_array([0.3, -1.0, 2.0, 4.0, 0.5, -1.0]);
        let g = exp_twist(&y, 0.0);
        assert!(g.max_abs_diff(&PoseTransform::identity()) == 0.0);
    }

    #[test]
    fn exp_pure_rotation_about_z() {
        let g = exp_twist(&tw([0, 0, 1, 0, 0, 0]).to_f64(), PI / 2.0);
        let want = PoseTransform {
            rotation: [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
        };
        assert!(g.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn exp_pure_translation() {
        let g = exp_twist(&tw([0, 0, 0, 1, 0, 0]).to_f64(), 2.0);
        assert_eq!(g.rotation, PoseTransform::<f64>::identity().rotation);
        assert_eq!(g.translation, [2.0, 0.0, 0.0]);
    }

    #[test]
    fn exp_screw_about_x_by_pi() {
        // frozen from the 30-term series oracle: R = diag(1,−1,−1), p = (0,2,0)
        let y = tw([1, 0, 0, 0, 0, -1]).to_f64();
        let g = exp_twist(&y, PI);
        let frozen = PoseTransform {
            rotation: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
            translation: [0.0, 2.0, 0.0],
        };
        assert!(g.max_abs_diff(&frozen) < 1e-12);
        assert!(series_exp(&y, PI, 30).max_abs_diff(&frozen) < 1e-10);
    }

    #[test]
    fn exp_matches_series_on_assorted_twists() {
        let mut k = 0u64;
        let mut next = || {
            // small LCG, deterministic
            k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((k >> 33) as f64 / (1u64 << 31) as f64) * 2.0 - 1.0
        };
        for _ in 0..100 {
            let y = Twist::<f64>::from_array(std::array::from_fn(|_| next() * 1.5));
            let q = next() * 2.0;
            let g = exp_twist(&y, q);
            assert!(g.max_abs_diff(&series_exp(&y, q, 40)) < 1e-10);
            assert!(g.orthogonality_defect() < 1e-12);
        }
    }

    #[test]
    fn compose_examples() {
        let z = tw([0, 0, 1, 0, 0, 0]).to_f64();
        let g = exp_twist(&Twist::from_array([0.2, 0.1, -0.4, 1.0, 2.0, 3.0]), 0.7);
        let id = PoseTransform::<f64>::identity();
        assert!(compose(&id, &g).max_abs_diff(&g) < 1e-15);
        assert!(compose(&g, &g.inverse()).max_abs_diff(&id) < 1e-14);
        let half = exp_twist(&z, PI / 2.0);
        assert!(compose(&half, &half).max_abs_diff(&exp_twist(&z, PI)) < 1e-15);
    }

    #[test]
    fn adjoint_examples_match_conjugation() {
        let conj = |g: &PoseTransform<f64>, y: &Twist<f64>| {
            let h = homog(g);
            let hi = homog(&g.inverse());
            vee(&mm(&mm(&h, &hat(y)), &hi))
        };
        let id = PoseTransform::<Q>::identity();
        let y = tw([1, 2, 3, 4, 5, 6]);
        assert_eq!(adjoint_apply(&id, &y), y);

        let g = PoseTransform::from_translation([qi(2), qi(0), qi(0)]);
        let y = tw([0, 0, 1, 0, 0, 0]);
        assert_eq!(adjoint_apply(&g, &y), tw([0, 0, 1, 0, -2, 0]));
        let c = conj(&g.to_f64(), &y.to_f64());
        assert_eq!(c, tw([0, 0, 1, 0, -2, 0]).to_f64());

        let rz = exp_twist(&tw([0, 0, 1, 0, 0, 0]).to_f64(), PI / 2.0);
        let y = tw([0, 0, 0, 1, 0, 0]).to_f64();
        let a = adjoint_apply(&rz, &y);
        let c = conj(&rz, &y);
        for i in 0..6 {
            assert!((a.component(i) - c.component(i)).abs() < 1e-15);
            assert!((a.component(i) - [0.0, 0.0, 0.0, 0.0, 1.0, 0.0][i]).abs() < 1e-15);
        }
    }

    #[test]
    fn bracket_examples_match_commutator() {
        let comm = |a: &Twist<f64>, b: &Twist<f64>| {
            let (x, y) = (hat(a), hat(b));
            let (p, q) = (mm(&x, &y), mm(&y, &x));
            vee(&std::array::from_fn(|i| std::array::from_fn(|j| p[i][j] - q[i][j])))
        };
        let cases = [
            ([1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1]),
            ([0, 0, 1, 0, 0, 0], [1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]),
        ];
        for (a, b, want) in cases {
            let (a, b) = (tw(a), tw(b));
            assert_eq!(lie_bracket(&a, &b), tw(want));
            assert_eq!(comm(&a.to_f64(), &b.to_f64()), tw(want).to_f64());
        }
        let y = Twist::from_array([qr(3, 5), qr(4, 5), qi(0), qi(0), qi(0), qr(-6, 5)]);
        assert!(lie_bracket(&y, &y).is_zero());
    }

    #[test]
    fn exact_exp_only_when_rational() {
        let p = tw([0, 0, 0, 1, 2, 3]);
        let g = exp_twist_exact(&p, &qr(1, 2)).unwrap();
        assert_eq!(g.translation, [qr(1, 2), qi(1), qr(3, 2)]);
        assert!(exp_twist_exact(&tw([0, 0, 1, 0, 0, 0]), &qr(1, 2)).is_none());
        assert!(exp_twist_exact(&tw([0, 0, 1, 0, 0, 0]), &qi(0)).is_some());
    }

    #[test]
    fn log_inverts_exp() {
        for (c, q) in [
            ([0.2, 0.1, -0.4, 1.0, 2.0, 3.0], 0.7),
            ([0.0, 0.0, 0.0, 1.0, -2.0, 0.5], 1.3),
            ([1.0, 0.0, 0.0, 0.0, 0.0, -1.0], 3.0),
            ([0.0, 1e-9, 0.0, 0.0, 0.0, 1.0], 1.0),
        ] {
            let y = Twist::<f64>::from_array(c);
            let g = exp_twist(&y, q);
            let back = exp_twist(&g.log(), 1.0);
            assert!(back.max_abs_diff(&g) < 1e-10, "{c:?}");
        }
    }
}
