//! Staged solution of the higher-order constraints.
//!
//! A branch is a polynomial parametrization of a family of jets
//! `(x_1, …, x_i)`. Stage `i` sets `x_i = −P·r + N·p_i`, where `r` is `H^(i)`
//! with `x_i = 0`, `P` a particular inverse of the velocity matrix and `N` a
//! nullspace basis. Solvability requires `L·r = 0` for a left-nullspace basis
//! `L`. These compatibility conditions are factored, reduced to equations
//! with the same real zeros, and each alternative becomes a child branch.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{solve_linear, subset_full, subset_test, Membership};
use crate::hoc::{ConstraintSystem, LoopSystem};
use crate::linkage::{Linkage, LinkageError};
use crate::poly::{factor_restricted, real_zero_reduction, MultiPoly, RationalMatrix, UniPoly, Var};
use crate::scalar::Q;

/// Default highest order analyzed.
pub const DEFAULT_MAX_ORDER: usize = 6;

/// Jets `x_1..x_order` as polynomials in free parameters `p_{k,m}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SolutionBranch {
    pub order: usize,
    /// Free parameters, sorted.
    pub params: Vec<Var>,
    /// `jets[k-1][j]` is `x_{k,j}`.
    pub jets: Vec<Vec<MultiPoly>>,
    /// Relations among the parameters that could not be solved for.
    pub constraints: Vec<MultiPoly>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("projection order {order} outside 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("constraint system has order {got}, expected {expected}")]
    StageMismatch { got: usize, expected: usize },
}

impl SolutionBranch {
    /// The empty jet family before any stage.
    pub fn root() -> Self {
        Self { order: 0, params: Vec::new(), jets: Vec::new(), constraints: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.jets.first().map_or(0, Vec::len)
    }

    /// `π_k`: the expressions for `x_k`.
    pub fn project(&self, k: usize) -> Result<&[MultiPoly], ConeError> {
        if k == 0 || k > self.order {
            return Err(ConeError::OrderOutOfRange { order: k, max: self.order });
        }
        Ok(&self.jets[k - 1])
    }

    pub fn x1_is_zero(&self) -> bool {
        self.jets.first().is_none_or(|x| x.iter().all(MultiPoly::is_zero))
    }

    /// Canonical basis of `π_1` when it is a linear subspace: the nonzero
    /// rows of the reduced echelon form of the spanning vectors.
    pub fn tangent_space(&self) -> Option<RationalMatrix> {
        if !self.constraints.is_empty() {
            return None;
        }
        let x1 = self.jets.first()?;
        let vars: BTreeSet<Var> = x1.iter().flat_map(MultiPoly::vars).collect();
        let mut rows = Vec::new();
        for v in &vars {
            let mut row = Vec::with_capacity(x1.len());
            for e in x1 {
                let d = e.derivative(*v);
                row.push(d.constant_value()?);
            }
            rows.push(row);
        }
        if x1.iter().any(|e| e.terms().any(|(m, _)| m.degree() != 1)) {
            return None;
        }
        if rows.is_empty() {
            return Some(RationalMatrix::zeros(0, x1.len()));
        }
        let (r, pivots) = RationalMatrix::from_rows(rows).rref();
        Some(RationalMatrix::from_rows((0..pivots.len()).map(|i| r.row(i).to_vec()).collect()))
    }

    /// Dimension of `π_1`.
    pub fn dim(&self) -> usize {
        match self.tangent_space() {
            Some(m) => m.nrows(),
            None if self.order == 0 => 0,
            None => crate::classify::image_dimension(self, &[1]),
        }
    }

    fn substitute(&mut self, map: &BTreeMap<Var, MultiPoly>) {
        for x in &mut self.jets {
            for e in x.iter_mut() {
                *e = e.substitute(map);
            }
        }
        self.params.retain(|v| !map.contains_key(v));
    }

    fn key(&self) -> (Vec<Vec<String>>, Vec<String>) {
        (
            self.jets.iter().map(|x| x.iter().map(ToString::to_string).collect()).collect(),
            self.constraints.iter().map(ToString::to_string).collect(),
        )
    }

    /// Whether every `H^(k)`, `k ≤ order`, vanishes identically on the branch.
    pub fn satisfies(&self, loops: &LoopSystem) -> bool {
        (1..=self.order).all(|k| loops.stacked_values(k, &self.jets).iter().all(MultiPoly::is_zero))
    }
}

impl fmt::Display for SolutionBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, x) in self.jets.iter().enumerate() {
            let parts: Vec<String> = x.iter().map(ToString::to_string).collect();
            writeln!(f, "x{} = ({})", k + 1, parts.join(", "))?;
        }
        for c in &self.constraints {
            writeln!(f, "subject to {c} = 0")?;
        }
        Ok(())
    }
}

/// Branches surviving through one order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeStage {
    pub order: usize,
    pub branches: Vec<SolutionBranch>,
    /// Nonzero compatibility conditions met at this order, primitive and deduplicated.
    pub conditions: Vec<MultiPoly>,
    /// Alternatives dropped because their tangent vanished.
    pub collapsed: usize,
    /// Some condition exceeded the factoring scope.
    pub scope_exceeded: bool,
    /// Some branch inclusion could not be decided.
    pub unresolved: bool,
}

impl ConeStage {
    /// The stage before any order is imposed.
    pub fn initial() -> Self {
        Self {
            order: 0,
            branches: vec![SolutionBranch::root()],
            conditions: Vec::new(),
            collapsed: 0,
            scope_exceeded: false,
            unresolved: false,
        }
    }

    /// Maximal tangent subspaces, when every branch has one.
    pub fn cone(&self) -> Option<Vec<RationalMatrix>> {
        let spaces: Option<Vec<RationalMatrix>> = self.branches.iter().map(SolutionBranch::tangent_space).collect();
        let mut spaces = spaces?;
        spaces.sort_by_key(|m| format!("{m:?}"));
        spaces.dedup();
        let maximal: Vec<RationalMatrix> = spaces
            .iter()
            .enumerate()
            .filter(|&(i, a)| !spaces.iter().enumerate().any(|(j, b)| i != j && contains(b, a) && !contains(a, b)))
            .map(|(_, a)| a.clone())
            .collect();
        Some(maximal)
    }
}

/// Whether the row space of `big` contains that of `small`.
fn contains(big: &RationalMatrix, small: &RationalMatrix) -> bool {
    if small.nrows() == 0 {
        return true;
    }
    let rows: Vec<Vec<Q>> =
        (0..big.nrows()).map(|i| big.row(i).to_vec()).chain((0..small.nrows()).map(|i| small.row(i).to_vec())).collect();
    RationalMatrix::from_rows(rows).rank() == big.nrows()
}

/// Whether two stages have the same tangent cone.
pub fn same_cone(a: &ConeStage, b: &ConeStage) -> Membership {
    match (a.cone(), b.cone()) {
        (Some(x), Some(y)) => {
            if x == y {
                Membership::Yes
            } else {
                Membership::No
            }
        }
        _ => {
            let within = |s: &ConeStage, t: &ConeStage| {
                let mut all = Membership::Yes;
                for x in &s.branches {
                    let mut best = Membership::No;
                    for y in &t.branches {
                        match subset_test(x, y, 1) {
                            Membership::Yes => {
                                best = Membership::Yes;
                                break;
                            }
                            Membership::Unknown => best = Membership::Unknown,
                            Membership::No => {}
                        }
                    }
                    all = match (all, best) {
                        (Membership::No, _) | (_, Membership::No) => Membership::No,
                        (Membership::Yes, Membership::Yes) => Membership::Yes,
                        _ => Membership::Unknown,
                    };
                }
                all
            };
            match (within(a, b), within(b, a)) {
                (Membership::Yes, Membership::Yes) => Membership::Yes,
                (Membership::No, _) | (_, Membership::No) => Membership::No,
                _ => Membership::Unknown,
            }
        }
    }
}

/// Imposes the constraints of order `sys.order` on every branch of `prev`.
pub fn stage_solve(prev: &ConeStage, sys: &ConstraintSystem) -> Result<ConeStage, ConeError> {
    if sys.order != prev.order + 1 {
        return Err(ConeError::StageMismatch { got: sys.order, expected: prev.order + 1 });
    }
    Ok(stage_solve_loops(prev, sys.loops()))
}

/// [`stage_solve`] driven directly by the first-order data.
///
/// The order-`i` constraint is evaluated on branch expressions through the
/// same recursion that builds the symbolic systems.
pub fn stage_solve_loops(prev: &ConeStage, loops: &LoopSystem) -> ConeStage {
    let order = prev.order + 1;
    let n = loops.n;
    let d = loops.nullspace.len();
    let mut out = Vec::new();
    let mut conditions = BTreeSet::new();
    let mut collapsed = 0;
    let mut scope_exceeded = false;

    for parent in &prev.branches {
        let mut jets = parent.jets.clone();
        jets.push(vec![MultiPoly::zero(); n]);
        let r = loops.stacked_values(order, &jets);
        let conds: Vec<MultiPoly> = loops
            .left_nullspace
            .iter()
            .map(|l| l.iter().zip(&r).fold(MultiPoly::zero(), |acc, (c, v)| acc + v.scale(c)))
            .filter(|c| !c.is_zero())
            .map(|c| c.primitive_part().1)
            .collect();
        conditions.extend(conds.iter().cloned());

        let new_params: Vec<Var> = (1..=d).map(|m| Var::param(order, m)).collect();
        let pr = loops.particular.apply(&r);
        let x: Vec<MultiPoly> = (0..n)
            .map(|j| {
                new_params.iter().zip(&loops.nullspace).fold(-&pr[j], |acc, (p, v)| {
                    acc + MultiPoly::var(*p).scale(&v[j])
                })
            })
            .collect();
        jets[order - 1] = x;
        let mut params = parent.params.clone();
        params.extend(new_params);
        let child = SolutionBranch { order, params, jets, constraints: parent.constraints.clone() };

        let mut flags = Flags::default();
        for b in resolve(child, conds, &mut flags) {
            if b.x1_is_zero() && !parent.x1_is_zero() {
                collapsed += 1;
            } else {
                out.push(b);
            }
        }
        scope_exceeded |= flags.scope_exceeded;
    }

    let (branches, unresolved) = absorb(out);
    ConeStage {
        order,
        branches,
        conditions: conditions.into_iter().collect(),
        collapsed,
        scope_exceeded: scope_exceeded || prev.scope_exceeded,
        unresolved: unresolved || prev.unresolved,
    }
}

#[derive(Default)]
struct Flags {
    scope_exceeded: bool,
}

/// Splits `branch` over the real zero sets of `pending`, in order.
fn resolve(branch: SolutionBranch, pending: Vec<MultiPoly>, flags: &mut Flags) -> Vec<SolutionBranch> {
    let mut out = Vec::new();
    let mut stack = vec![(branch, pending)];
    while let Some((b, mut pending)) = stack.pop() {
        pending.retain(|c| !c.is_zero());
        if pending.is_empty() {
            out.push(b);
            continue;
        }
        let c = pending.remove(0);
        if c.is_constant() {
            continue;
        }
        let fact = factor_restricted(&c);
        flags.scope_exceeded |= fact.scope_exceeded;
        for alt in real_zero_reduction(&fact.factors).into_iter().rev() {
            let mut nb = b.clone();
            let mut np = pending.clone();
            if impose(&mut nb, &mut np, alt) {
                stack.push((nb, np));
            }
        }
    }
    out
}

/// Imposes `eqs = 0` on `b`, substituting wherever an equation is linear in
/// some parameter. Returns `false` if the result has no real points.
fn impose(b: &mut SolutionBranch, pending: &mut [MultiPoly], eqs: Vec<MultiPoly>) -> bool {
    let mut queue: Vec<MultiPoly> = eqs;
    queue.append(&mut b.constraints);
    let mut kept: Vec<MultiPoly> = Vec::new();
    while !queue.is_empty() {
        let e = queue.remove(0);
        if e.is_zero() {
            continue;
        }
        if e.is_constant() {
            return false;
        }
        if let Some((v, value)) = solve_linear(&e) {
            let map = BTreeMap::from([(v, value)]);
            b.substitute(&map);
            for p in pending.iter_mut() {
                *p = p.substitute(&map);
            }
            for q in queue.iter_mut() {
                *q = q.substitute(&map);
            }
            // kept relations may have become solvable
            queue.extend(kept.drain(..).map(|k| k.substitute(&map)));
            continue;
        }
        let vars = e.vars();
        if vars.len() == 1 {
            let v = *vars.iter().next().unwrap();
            if UniPoly::from_multipoly(&e, v).is_some_and(|u| u.count_real_roots() == 0) {
                return false;
            }
        }
        let prim = e.primitive_part().1;
        if !kept.contains(&prim) {
            kept.push(prim);
        }
    }
    kept.sort();
    b.constraints = kept;
    true
}

/// Sorts, deduplicates and drops branches contained in another one.
fn absorb(mut branches: Vec<SolutionBranch>) -> (Vec<SolutionBranch>, bool) {
    branches.sort_by_cached_key(|b| (b.dim(), b.key()));
    branches.dedup_by(|a, b| a.key() == b.key());
    let mut alive = vec![true; branches.len()];
    let mut unresolved = false;
    for i in 0..branches.len() {
        for j in 0..branches.len() {
            if i == j || !alive[j] {
                continue;
            }
            match subset_full(&branches[i], &branches[j]) {
                Membership::Yes => {
                    alive[i] = false;
                    break;
                }
                Membership::Unknown => unresolved = true,
                Membership::No => {}
            }
        }
    }
    let kept = branches.into_iter().zip(alive).filter(|(_, a)| *a).map(|(b, _)| b).collect();
    (kept, unresolved)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeStatus {
    /// `π_1` stabilized before the order cap.
    Terminated,
    /// Stabilization was not observed within the analyzed orders.
    OrderCapped,
    /// Some condition could not be factored.
    ScopeExceeded,
}

impl fmt::Display for ConeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConeStatus::Terminated => "terminated",
            ConeStatus::OrderCapped => "order-capped",
            ConeStatus::ScopeExceeded => "factoring-scope-exceeded",
        })
    }
}

/// The cone at the first order where it stops changing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KinematicTangentCone {
    pub kappa: usize,
    pub stage: ConeStage,
    pub status: ConeStatus,
}

/// Solves stage by stage until `π_1` of consecutive stages agrees.
pub fn tangent_cone(linkage: &Linkage, max_order: usize) -> Result<KinematicTangentCone, LinkageError> {
    let loops = LoopSystem::new(linkage)?;
    let mut prev = stage_solve_loops(&ConeStage::initial(), &loops);
    for _ in 1..max_order.max(1) {
        let next = stage_solve_loops(&prev, &loops);
        if next.scope_exceeded {
            return Ok(KinematicTangentCone { kappa: prev.order, stage: next, status: ConeStatus::ScopeExceeded });
        }
        if same_cone(&prev, &next) == Membership::Yes {
            return Ok(KinematicTangentCone { kappa: prev.order, stage: prev, status: ConeStatus::Terminated });
        }
        prev = next;
    }
    let status = if prev.scope_exceeded { ConeStatus::ScopeExceeded } else { ConeStatus::OrderCapped };
    Ok(KinematicTangentCone { kappa: prev.order, stage: prev, status })
}

/// All stages through a fixed order, with the stabilization order.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub name: String,
    pub loops: LoopSystem,
    pub stages: Vec<ConeStage>,
    pub kappa: usize,
    pub status: ConeStatus,
    pub max_order: usize,
}

impl Analysis {
    pub fn last(&self) -> &ConeStage {
        self.stages.last().expect("at least one stage")
    }

    pub fn stage(&self, order: usize) -> Option<&ConeStage> {
        self.stages.get(order.checked_sub(1)?)
    }
}

/// Highest order from the `TANCONE_MAX_ORDER` environment variable, or the default.
pub fn max_order_from_env() -> usize {
    std::env::var("TANCONE_MAX_ORDER").ok().and_then(|s| s.parse().ok()).filter(|&k| k >= 1).unwrap_or(DEFAULT_MAX_ORDER)
}

/// Runs every stage through `max_order`.
///
/// `kappa` is the first order from which the tangent cone no longer changes
/// through `max_order`. When the last two stages differ, stabilization is
/// unobserved and the status is [`ConeStatus::OrderCapped`].
pub fn analyze(linkage: &Linkage, max_order: usize) -> Result<Analysis, LinkageError> {
    let loops = LoopSystem::new(linkage)?;
    Ok(analyze_loops(linkage.name.clone(), loops, max_order))
}

pub fn analyze_loops(name: String, loops: LoopSystem, max_order: usize) -> Analysis {
    let max_order = max_order.max(1);
    let mut stages: Vec<ConeStage> = Vec::with_capacity(max_order);
    let mut prev = ConeStage::initial();
    for _ in 0..max_order {
        let next = stage_solve_loops(&prev, &loops);
        let dead = next.branches.is_empty();
        stages.push(next.clone());
        prev = next;
        if dead {
            break;
        }
    }
    let last = stages.len();
    let mut kappa = last;
    let mut undecided = false;
    while kappa > 1 {
        match same_cone(&stages[kappa - 2], &stages[last - 1]) {
            Membership::Yes => kappa -= 1,
            Membership::Unknown => {
                undecided = true;
                break;
            }
            Membership::No => break,
        }
    }
    let status = if stages.iter().any(|s| s.scope_exceeded) {
        ConeStatus::ScopeExceeded
    } else if stages.last().is_some_and(|s| s.branches.is_empty()) {
        ConeStatus::Terminated
    } else if kappa == last || undecided {
        ConeStatus::OrderCapped
    } else {
        ConeStatus::Terminated
    };
    Analysis { name, loops, stages, kappa, status, max_order }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::scalar::qi;

    #[test]
    fn two_joint_is_regular_line() {
        let a = analyze(&bundled::two_joint(), 4).unwrap();
        assert_eq!(a.kappa, 1);
        assert_eq!(a.status, ConeStatus::Terminated);
        assert_eq!(a.last().branches.len(), 1);
        assert_eq!(a.last().branches[0].dim(), 1);
        assert!(a.last().branches.iter().all(|b| b.satisfies(&a.loops)));
    }

    #[test]
    fn projection_bounds() {
        let b = SolutionBranch::root();
        assert!(b.project(1).is_err());
    }

    #[test]
    fn impose_detects_empty_real_set() {
        let mut b = SolutionBranch {
            order: 1,
            params: vec![Var::param(1, 1)],
            jets: vec![vec![MultiPoly::var(Var::param(1, 1))]],
            constraints: Vec::new(),
        };
        let e: MultiPoly = "p1_1^2 + 1".parse().unwrap();
        assert!(!impose(&mut b.clone(), &mut [], vec![e]));
        let e: MultiPoly = "2*p1_1 - 1".parse().unwrap();
        assert!(impose(&mut b, &mut [], vec![e]));
        assert_eq!(b.jets[0][0], MultiPoly::constant(Q::new(1.into(), 2.into())));
        let _ = qi(0);
    }
}
