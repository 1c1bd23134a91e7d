//! Branch comparison and configuration classification.
//!
//! Two branches are compared through the projections `π_j` of their jet sets.
//! Equal tangent cones with a difference at order `k` give a non-transversal
//! bifurcation with contact of order `k − 1`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cone::{Analysis, ConeStatus, SolutionBranch};
use crate::poly::{MultiPoly, RationalMatrix, UniPoly, Var};
use crate::scalar::{qi, Q};

/// Outcome of an exact membership or inclusion question.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Yes,
    No,
    Unknown,
}

impl Membership {
    pub fn is_yes(self) -> bool {
        self == Membership::Yes
    }

    fn and(self, other: Membership) -> Membership {
        match (self, other) {
            (Membership::No, _) | (_, Membership::No) => Membership::No,
            (Membership::Yes, Membership::Yes) => Membership::Yes,
            _ => Membership::Unknown,
        }
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::Yes => "yes",
            Membership::No => "no",
            Membership::Unknown => "unknown",
        })
    }
}

/// Deterministic rational sample sequence `1, −1, 2, 1/2, 3, −1/2, 4, 1/3, …`.
pub fn sample_value(idx: usize) -> Q {
    if idx % 2 == 0 {
        qi(idx as i64 / 2 + 1)
    } else {
        let m = (idx - 1) / 2;
        let den = (m as i64 + 3) / 2;
        let num = if m % 2 == 0 { -1 } else { 1 };
        Q::new(num.into(), den.into())
    }
}

/// Assignment of sample number `m` to `params`.
pub fn sample_point(params: &[Var], m: usize) -> BTreeMap<Var, Q> {
    let p = params.len();
    params.iter().enumerate().map(|(i, &v)| (v, sample_value(m * p + i))).collect()
}

/// Decides whether the polynomial system `eqs = 0` has a real solution.
///
/// Variables entering linearly with a constant coefficient are eliminated
/// first. What remains is settled when it is univariate (via gcd and Sturm
/// counts) or has only rational roots to branch on; otherwise `Unknown`.
pub fn has_real_solution(eqs: Vec<MultiPoly>) -> Membership {
    solve_depth(eqs, 0)
}

fn solve_depth(mut eqs: Vec<MultiPoly>, depth: usize) -> Membership {
    loop {
        eqs.retain(|e| !e.is_zero());
        if eqs.iter().any(MultiPoly::is_constant) {
            return Membership::No;
        }
        if eqs.is_empty() {
            return Membership::Yes;
        }
        match find_linear(&eqs) {
            Some((i, v, value)) => {
                eqs.swap_remove(i);
                let map = BTreeMap::from([(v, value)]);
                for e in &mut eqs {
                    *e = e.substitute(&map);
                }
            }
            None => break,
        }
    }
    let vars: Vec<Var> = eqs.iter().flat_map(|e| e.vars()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    if let [v] = vars.as_slice() {
        let mut g = UniPoly::from_multipoly(&eqs[0], *v).unwrap();
        for e in &eqs[1..] {
            g = g.gcd(&UniPoly::from_multipoly(e, *v).unwrap());
        }
        return if g.count_real_roots() > 0 { Membership::Yes } else { Membership::No };
    }
    if depth > 8 {
        return Membership::Unknown;
    }
    // a univariate equation: branch over its roots when they are all rational
    for e in &eqs {
        let ev = e.vars();
        if ev.len() != 1 {
            continue;
        }
        let v = *ev.iter().next().unwrap();
        let u = UniPoly::from_multipoly(e, v).unwrap();
        let real = u.count_real_roots();
        if real == 0 {
            return Membership::No;
        }
        let fact = crate::poly::factor_restricted(e);
        let roots: Vec<Q> = fact
            .factors
            .iter()
            .filter(|f| f.poly.total_degree() == 1)
            .map(|f| {
                let a = f.poly.coeff(&crate::poly::Monomial::var(v));
                let b = f.poly.coeff(&crate::poly::Monomial::one());
                -b / a
            })
            .collect();
        let mut any_unknown = roots.len() < real;
        for r in roots {
            let map = BTreeMap::from([(v, MultiPoly::constant(r))]);
            let sub: Vec<MultiPoly> = eqs.iter().map(|e| e.substitute(&map)).collect();
            match solve_depth(sub, depth + 1) {
                Membership::Yes => return Membership::Yes,
                Membership::Unknown => any_unknown = true,
                Membership::No => {}
            }
        }
        return if any_unknown { Membership::Unknown } else { Membership::No };
    }
    Membership::Unknown
}

/// An equation index, a variable of degree one with constant coefficient,
/// and the value solving for it. Prefers the latest variable.
pub(crate) fn find_linear(eqs: &[MultiPoly]) -> Option<(usize, Var, MultiPoly)> {
    let mut best: Option<(usize, Var, MultiPoly)> = None;
    for (i, e) in eqs.iter().enumerate() {
        if let Some((v, value)) = solve_linear(e) {
            if best.as_ref().is_none_or(|b| v > b.1) {
                best = Some((i, v, value));
            }
        }
    }
    best
}

/// Solves `e = 0` for its latest variable that appears linearly with a
/// constant coefficient.
pub(crate) fn solve_linear(e: &MultiPoly) -> Option<(Var, MultiPoly)> {
    for v in e.vars().into_iter().rev() {
        if e.degree_in(v) != 1 {
            continue;
        }
        let coeffs = e.coefficients_in(v);
        let Some(alpha) = coeffs.get(&1).and_then(MultiPoly::constant_value) else { continue };
        let rest = coeffs.get(&0).cloned().unwrap_or_default();
        return Some((v, rest.scale(&(-alpha.recip()))));
    }
    None
}

fn rank_of_jacobian(exprs: &[&MultiPoly], params: &[Var], at: &BTreeMap<Var, Q>) -> usize {
    if params.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<Q>> = exprs
        .iter()
        .map(|e| params.iter().map(|&v| e.derivative(v).eval(at).unwrap_or_default()).collect())
        .collect();
    if rows.is_empty() {
        return 0;
    }
    RationalMatrix::from_rows(rows).rank()
}

/// Dimension of the image of the jet orders `orders` over a branch.
pub fn image_dimension(branch: &SolutionBranch, orders: &[usize]) -> usize {
    let exprs: Vec<&MultiPoly> = orders.iter().flat_map(|&k| branch.jets[k - 1].iter()).collect();
    (0..2).map(|m| rank_of_jacobian(&exprs, &branch.params, &sample_point(&branch.params, m + 1))).max().unwrap_or(0)
}

/// Whether the projection of `a` onto the jet orders `orders` lies inside that of `b`.
pub fn subset_on(a: &SolutionBranch, b: &SolutionBranch, orders: &[usize]) -> Membership {
    assert!(orders.iter().all(|&k| k >= 1 && k <= a.order.min(b.order)), "order out of range");
    if !a.constraints.is_empty() {
        return Membership::Unknown;
    }
    if image_dimension(a, orders) > image_dimension(b, orders) {
        return Membership::No;
    }
    let deg = orders
        .iter()
        .flat_map(|&k| a.jets[k - 1].iter())
        .map(MultiPoly::total_degree)
        .max()
        .unwrap_or(1)
        .max(1) as usize;
    let samples = if a.params.is_empty() { 1 } else { 2 * deg * (a.params.len() + 1) };
    let mut result = Membership::Yes;
    for m in 0..samples {
        let point = sample_point(&a.params, m);
        let mut eqs: Vec<MultiPoly> = b.constraints.clone();
        for &k in orders {
            for (ea, eb) in a.jets[k - 1].iter().zip(&b.jets[k - 1]) {
                let target = ea.eval(&point).expect("all parameters sampled");
                eqs.push(eb - &MultiPoly::constant(target));
            }
        }
        result = result.and(has_real_solution(eqs));
        if result == Membership::No {
            break;
        }
    }
    result
}

/// `π_j(a) ⊆ π_j(b)`.
pub fn subset_test(a: &SolutionBranch, b: &SolutionBranch, j: usize) -> Membership {
    subset_on(a, b, &[j])
}

/// Inclusion of the full jet sets up to `a.order`.
pub fn subset_full(a: &SolutionBranch, b: &SolutionBranch) -> Membership {
    let orders: Vec<usize> = (1..=a.order.min(b.order)).collect();
    subset_on(a, b, &orders)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassificationKind {
    RegularPoint,
    SingleBranchSingularity,
    TransversalBifurcation,
    NonTransversalBifurcation,
    DeadPoint,
    Inconclusive,
}

impl fmt::Display for ClassificationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassificationKind::RegularPoint => "regular-point",
            ClassificationKind::SingleBranchSingularity => "single-branch-singularity",
            ClassificationKind::TransversalBifurcation => "transversal-bifurcation",
            ClassificationKind::NonTransversalBifurcation => "non-transversal-bifurcation",
            ClassificationKind::DeadPoint => "dead-point",
            ClassificationKind::Inconclusive => "inconclusive",
        })
    }
}

/// Inclusion outcomes between two branches at one jet order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inclusions {
    pub order: usize,
    pub a_in_b: Membership,
    pub b_in_a: Membership,
}

/// Comparison of branches `a` and `b` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRelation {
    pub a: usize,
    pub b: usize,
    /// Orders compared, up to and including the first difference.
    pub inclusions: Vec<Inclusions>,
    /// `k − 1` for the first order `k` with unequal projections.
    pub contact_order: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: ClassificationKind,
    pub branch_count: usize,
    pub dims: Vec<usize>,
    /// `[a, b, contact order]` per branch pair, 1-based.
    pub contact_orders: Vec<[usize; 3]>,
    pub pairs: Vec<PairRelation>,
    pub kinematotropic: bool,
    pub notes: Vec<String>,
}

/// Applies the projection comparison to the final stage of an analysis.
pub fn classify(analysis: &Analysis) -> Classification {
    let stage = analysis.stages.last().expect("at least one stage");
    let branches = &stage.branches;
    let dims: Vec<usize> = branches.iter().map(SolutionBranch::dim).collect();
    let mut notes = Vec::new();
    let mut inconclusive = analysis.status == ConeStatus::ScopeExceeded;
    if analysis.status == ConeStatus::ScopeExceeded {
        notes.push("a compatibility condition exceeded the factoring scope".into());
    }
    if branches.iter().any(|b| !b.constraints.is_empty()) {
        inconclusive = true;
        notes.push("some branch keeps nonlinear parameter relations".into());
    }
    if analysis.stages.iter().any(|s| s.unresolved) {
        inconclusive = true;
        notes.push("a branch inclusion could not be decided".into());
    }

    let first_nonzero = analysis.stages.first().is_some_and(|s| s.branches.iter().any(|b| b.dim() > 0));
    if branches.is_empty() {
        let kind = if first_nonzero && !inconclusive { ClassificationKind::DeadPoint } else { ClassificationKind::Inconclusive };
        notes.push("every first-order direction fails a higher-order condition".into());
        return Classification { kind, branch_count: 0, dims, contact_orders: Vec::new(), pairs: Vec::new(), kinematotropic: false, notes };
    }

    let order = stage.order;
    let mut pairs = Vec::new();
    let mut kinematotropic = false;
    let mut any_tangent = false;
    for i in 0..branches.len() {
        for j in i + 1..branches.len() {
            let (a, b) = (&branches[i], &branches[j]);
            let mut inclusions = Vec::new();
            let mut contact = None;
            for k in 1..=order {
                let ab = subset_test(a, b, k);
                let ba = subset_test(b, a, k);
                inclusions.push(Inclusions { order: k, a_in_b: ab, b_in_a: ba });
                if ab == Membership::Unknown || ba == Membership::Unknown {
                    inconclusive = true;
                    break;
                }
                if ab != ba {
                    kinematotropic = true;
                }
                if !(ab.is_yes() && ba.is_yes()) {
                    contact = Some(k - 1);
                    break;
                }
            }
            if contact != Some(0) {
                any_tangent = true;
            }
            if contact.is_none() && !inconclusive {
                notes.push(format!("branches {} and {} agree in all jets through order {order}", i + 1, j + 1));
            }
            pairs.push(PairRelation { a: i + 1, b: j + 1, inclusions, contact_order: contact });
        }
    }
    let contact_orders = pairs.iter().map(|p| [p.a, p.b, p.contact_order.unwrap_or(order)]).collect();

    let kind = if inconclusive {
        ClassificationKind::Inconclusive
    } else if branches.len() == 1 {
        if analysis.kappa == 1 {
            ClassificationKind::RegularPoint
        } else {
            ClassificationKind::SingleBranchSingularity
        }
    } else if any_tangent {
        ClassificationKind::NonTransversalBifurcation
    } else {
        ClassificationKind::TransversalBifurcation
    };
    Classification { kind, branch_count: branches.len(), dims, contact_orders, pairs, kinematotropic, notes }
}
