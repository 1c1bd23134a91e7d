use num_traits::{Signed, Zero};

use super::factor::Factor;
use super::matrix::RationalMatrix;
use super::multipoly::{Monomial, MultiPoly, Var};
use crate::scalar::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    PositiveSemidefinite,
    NegativeSemidefinite,
    Indefinite,
}

impl Definiteness {
    pub fn is_semidefinite(self) -> bool {
        self != Definiteness::Indefinite
    }
}

/// Symmetric Gram matrix of a homogeneous quadratic form, with its variables.
pub fn quadratic_form_matrix(f: &MultiPoly) -> Option<(Vec<Var>, RationalMatrix)> {
    if f.is_zero() || f.terms().any(|(m, _)| m.degree() != 2) {
        return None;
    }
    let vars: Vec<Var> = f.vars().into_iter().collect();
    let idx = |v: Var| vars.iter().position(|&w| w == v).unwrap();
    let mut m = RationalMatrix::zeros(vars.len(), vars.len());
    let half = Q::new(1.into(), 2.into());
    for (mono, c) in f.terms() {
        match mono.powers() {
            [(v, 2)] => m[(idx(*v), idx(*v))] = c.clone(),
            [(a, 1), (b, 1)] => {
                let (i, j) = (idx(*a), idx(*b));
                m[(i, j)] = c * &half;
                m[(j, i)] = c * &half;
            }
            _ => unreachable!("degree checked"),
        }
    }
    Some((vars, m))
}

/// Sign character of a homogeneous quadratic form, or `None` if `f` is not one.
pub fn quadratic_definiteness(f: &MultiPoly) -> Option<Definiteness> {
    let (_, m) = quadratic_form_matrix(f)?;
    Some(symmetric_definiteness(&m))
}

/// Congruence diagonalization with exact arithmetic.
pub fn symmetric_definiteness(m: &RationalMatrix) -> Definiteness {
    let n = m.nrows();
    let mut a = m.clone();
    let (mut pos, mut neg) = (false, false);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&i| !a[(i, i)].is_zero());
        let Some(k) = pivot else {
            // zero diagonal with a nonzero off-diagonal entry takes both signs
            let off = active.iter().any(|&i| active.iter().any(|&j| i != j && !a[(i, j)].is_zero()));
            if off {
                return Definiteness::Indefinite;
            }
            break;
        };
        let d = a[(k, k)].clone();
        if d.is_positive() {
            pos = true;
        } else {
            neg = true;
        }
        active.retain(|&i| i != k);
        for &i in &active {
            let f = &a[(i, k)] / &d;
            if f.is_zero() {
                continue;
            }
            for &j in &active {
                let v = &f * &a[(k, j)];
                a[(i, j)] -= v;
            }
        }
    }
    match (pos, neg) {
        (true, true) => Definiteness::Indefinite,
        (_, false) => Definiteness::PositiveSemidefinite,
        (false, true) => Definiteness::NegativeSemidefinite,
    }
}

/// Replaces each factor of `f = 0` by conditions with the same real zeros.
///
/// The result is a disjunction: one entry per factor, each a conjunction of
/// polynomial equations. Multiplicities are dropped. A sign-definite quadratic
/// form becomes the linear equations cutting out its kernel, and a sum of
/// same-signed even powers of single variables becomes those variables.
pub fn real_zero_reduction(factors: &[Factor]) -> Vec<Vec<MultiPoly>> {
    factors.iter().filter(|f| !f.poly.is_constant()).map(|f| reduce_factor(&f.poly)).collect()
}

fn reduce_factor(f: &MultiPoly) -> Vec<MultiPoly> {
    if let Some((vars, m)) = quadratic_form_matrix(f) {
        if symmetric_definiteness(&m).is_semidefinite() {
            let (r, pivots) = m.rref();
            return (0..pivots.len())
                .map(|i| {
                    MultiPoly::from_terms(
                        vars.iter().enumerate().map(|(j, &v)| (Monomial::var(v), r[(i, j)].clone())),
                    )
                })
                .collect();
        }
    }
    if let Some(vs) = even_power_sum(f) {
        return vs.into_iter().map(MultiPoly::var).collect();
    }
    vec![f.clone()]
}

/// Variables of `f = Σ cᵢ vᵢ^(2kᵢ)` when all `cᵢ` share a sign.
fn even_power_sum(f: &MultiPoly) -> Option<Vec<Var>> {
    let mut sign = None;
    let mut vars = Vec::new();
    for (m, c) in f.terms() {
        let [(v, e)] = m.powers() else { return None };
        if e % 2 == 1 {
            return None;
        }
        let s = c.is_positive();
        if *sign.get_or_insert(s) != s {
            return None;
        }
        vars.push(*v);
    }
    vars.sort();
    (vars.len() > 1).then_some(vars)
}

/// Dense univariate polynomial, coefficients ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly(pub Vec<Q>);

impl UniPoly {
    pub fn from_multipoly(p: &MultiPoly, v: Var) -> Option<Self> {
        if p.vars().iter().any(|&w| w != v) {
            return None;
        }
        let mut c = vec![Q::zero(); p.degree_in(v) as usize + 1];
        for (m, k) in p.terms() {
            c[m.exponent(v) as usize] += k;
        }
        Some(Self(c).trimmed())
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self(self.0.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer((i as i64).into())).collect())
            .trimmed()
    }

    /// Remainder of division by a nonzero `d`.
    pub fn rem(&self, d: &Self) -> Self {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.0[dd].clone();
        let mut r = self.0.clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let f = &r[k] / &lead;
            if !f.is_zero() {
                for i in 0..=dd {
                    let v = &f * &d.0[i];
                    r[k - dd + i] -= v;
                }
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Self(r).trimmed()
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    fn sign_at_pos_inf(&self) -> i32 {
        self.0.last().map_or(0, |c| if c.is_positive() { 1 } else { -1 })
    }

    fn sign_at_neg_inf(&self) -> i32 {
        let s = self.sign_at_pos_inf();
        if self.degree().unwrap_or(0) % 2 == 1 {
            -s
        } else {
            s
        }
    }

    /// Number of distinct real roots, by Sturm's theorem.
    pub fn count_real_roots(&self) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let mut seq = vec![self.clone(), self.derivative()];
        while let Some(last) = seq.last().filter(|p| !p.is_zero()) {
            let prev = &seq[seq.len() - 2];
            let r = prev.rem(last);
            if r.is_zero() {
                break;
            }
            seq.push(Self(r.0.iter().map(|c| -c).collect()));
        }
        let changes = |signs: Vec<i32>| {
            let s: Vec<i32> = signs.into_iter().filter(|&s| s != 0).collect();
            s.windows(2).filter(|w| w[0] != w[1]).count()
        };
        let at_neg = changes(seq.iter().map(Self::sign_at_neg_inf).collect());
        let at_pos = changes(seq.iter().map(Self::sign_at_pos_inf).collect());
        at_neg - at_pos
    }
}
