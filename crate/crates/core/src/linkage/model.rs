use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Q;
use crate::screw::Twist;

/// Physical joint type; fixes how many 1-DOF screws it decomposes into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
    Helical,
    Cylindrical,
    Spherical,
}

impl JointKind {
    pub fn screw_count(self) -> usize {
        match self {
            JointKind::Cylindrical => 2,
            JointKind::Spherical => 3,
            _ => 1,
        }
    }
}

impl fmt::Display for JointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JointKind::Revolute => "revolute",
            JointKind::Prismatic => "prismatic",
            JointKind::Helical => "helical",
            JointKind::Cylindrical => "cylindrical",
            JointKind::Spherical => "spherical",
        };
        f.write_str(s)
    }
}

/// A joint edge between two bodies, as a chain of 1-DOF screws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Joint {
    pub id: String,
    pub kind: JointKind,
    pub from: usize,
    pub to: usize,
    pub screws: Vec<Twist<Q>>,
}

/// One scalar joint coordinate: `sub`-th screw (0-based) of joint `joint`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Coordinate {
    pub joint: usize,
    pub sub: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CycleEntry {
    /// Flat coordinate index.
    pub coord: usize,
    /// +1 when the joint is traversed along its direction, −1 against it.
    pub sign: i8,
}

/// Closed loop in traversal order, starting at its co-tree edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundamentalCycle {
    pub entries: Vec<CycleEntry>,
}

impl FundamentalCycle {
    pub fn coords(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.coord)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkageError {
    #[error("{location}: malformed document: {message}")]
    Syntax { location: String, message: String },
    #[error("{location}: malformed rational literal {literal:?}")]
    MalformedRational { location: String, literal: String },
    #[error("{location}: unknown body {name:?}")]
    UnknownBody { location: String, name: String },
    #[error("{location}: duplicate id {id:?}")]
    Duplicate { location: String, id: String },
    #[error("{location}: joint {id:?} of kind {kind} needs {expected} screws, found {found}")]
    ScrewCount { location: String, id: String, kind: JointKind, expected: usize, found: usize },
    #[error("{location}: unknown joint in cycle: {id:?}")]
    UnknownJointInCycle { location: String, id: String },
    #[error("{location}: unknown joint {id:?}")]
    UnknownJoint { location: String, id: String },
    #[error("{location}: joint {id:?} has no sub-joint {sub}")]
    BadSubIndex { location: String, id: String, sub: usize },
    #[error("{location}: cycle sign must be 1 or -1, found {sign}")]
    BadSign { location: String, sign: i64 },
    #[error("linkage graph is disconnected: body {body:?} is unreachable")]
    Disconnected { body: String },
    #[error("{location}: not a spanning tree: {reason}")]
    BadTree { location: String, reason: String },
    #[error("{location}: {reason}")]
    BadCycle { location: String, reason: String },
    #[error("{location}: {reason}")]
    BadConfiguration { location: String, reason: String },
    #[error("joint screws at q0 are not exactly representable (coordinate {coord}); supply current_screws")]
    NonRepresentable { coord: String },
}

/// Closed-loop linkage: topology graph, joint screws and loop bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Linkage {
    pub name: String,
    pub bodies: Vec<String>,
    pub joints: Vec<Joint>,
    /// Flat coordinate order: document joint order, then sub order.
    pub coords: Vec<Coordinate>,
    /// Joint indices of the spanning tree.
    pub tree: Vec<usize>,
    pub cycles: Vec<FundamentalCycle>,
    /// Analyzed configuration; all zeros unless given.
    pub q0: Vec<Q>,
    /// Exact joint screws at `q0`, when supplied by the document.
    pub current_screws: Option<Vec<Twist<Q>>>,
}

/// Cycle description by joint index and 0-based sub-joint, before flattening.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleSpec {
    pub entries: Vec<(usize, usize, i8)>,
}

impl Linkage {
    /// Validates topology and builds cycles (computed from the tree when not given).
    pub fn new(
        name: impl Into<String>,
        bodies: Vec<String>,
        joints: Vec<Joint>,
        tree: Option<Vec<usize>>,
        root: usize,
        cycles: Option<Vec<CycleSpec>>,
    ) -> Result<Self, LinkageError> {
        for (i, j) in joints.iter().enumerate() {
            let expected = j.kind.screw_count();
            if j.screws.len() != expected {
                return Err(LinkageError::ScrewCount {
                    location: format!("joints[{i}]"),
                    id: j.id.clone(),
                    kind: j.kind,
                    expected,
                    found: j.screws.len(),
                });
            }
        }
        let coords: Vec<Coordinate> = joints
            .iter()
            .enumerate()
            .flat_map(|(j, joint)| (0..joint.screws.len()).map(move |sub| Coordinate { joint: j, sub }))
            .collect();
        let tree = match tree {
            Some(t) => {
                validate_tree(bodies.len(), &joints, &t, &bodies)?;
                t
            }
            None => bfs_tree(&bodies, &joints, root)?,
        };
        check_connected(&bodies, &joints)?;
        let mut link = Linkage {
            name: name.into(),
            bodies,
            joints,
            coords,
            tree,
            cycles: Vec::new(),
            q0: Vec::new(),
            current_screws: None,
        };
        link.q0 = vec![Q::default(); link.n()];
        link.cycles = match cycles {
            Some(specs) => link.cycles_from_specs(&specs)?,
            None => link.fundamental_cycles(),
        };
        Ok(link)
    }

    /// Number of scalar joint coordinates.
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Number of independent loops, `|edges| − |nodes| + 1`.
    pub fn gamma(&self) -> usize {
        (self.joints.len() + 1).saturating_sub(self.bodies.len())
    }

    pub fn screw(&self, coord: usize) -> &Twist<Q> {
        let c = self.coords[coord];
        &self.joints[c.joint].screws[c.sub]
    }

    /// `J3.2`-style label with a 1-based sub index (bare id for 1-DOF joints).
    pub fn coord_label(&self, coord: usize) -> String {
        let c = self.coords[coord];
        let j = &self.joints[c.joint];
        if j.screws.len() == 1 {
            j.id.clone()
        } else {
            format!("{}.{}", j.id, c.sub + 1)
        }
    }

    pub fn coord_index(&self, joint: usize, sub: usize) -> Option<usize> {
        self.coords.iter().position(|c| c.joint == joint && c.sub == sub)
    }

    pub fn joint_index(&self, id: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.id == id)
    }

    /// One cycle per co-tree edge, in document order.
    ///
    /// Each cycle traverses its co-tree edge forward, then returns through the
    /// tree from the edge's target to its source. A tree edge walked against
    /// its direction contributes its sub-joints in reverse with sign −1.
    pub fn fundamental_cycles(&self) -> Vec<FundamentalCycle> {
        let in_tree = |j: usize| self.tree.contains(&j);
        (0..self.joints.len())
            .filter(|&j| !in_tree(j))
            .map(|j| {
                let joint = &self.joints[j];
                let mut entries = self.joint_entries(j, true);
                for (edge, forward) in self.tree_path(joint.to, joint.from) {
                    entries.extend(self.joint_entries(edge, forward));
                }
                FundamentalCycle { entries }
            })
            .collect()
    }

    fn joint_entries(&self, j: usize, forward: bool) -> Vec<CycleEntry> {
        let subs = self.joints[j].screws.len();
        let order: Vec<usize> = if forward { (0..subs).collect() } else { (0..subs).rev().collect() };
        order
            .into_iter()
            .map(|sub| CycleEntry {
                coord: self.coord_index(j, sub).expect("coordinate exists"),
                sign: if forward { 1 } else { -1 },
            })
            .collect()
    }

    /// Tree edges from body `a` to body `b`, each flagged with whether it is
    /// walked along its own direction.
    fn tree_path(&self, a: usize, b: usize) -> Vec<(usize, bool)> {
        let mut prev: Vec<Option<(usize, usize, bool)>> = vec![None; self.bodies.len()];
        let mut seen = vec![false; self.bodies.len()];
        let mut queue = VecDeque::from([a]);
        seen[a] = true;
        while let Some(u) = queue.pop_front() {
            if u == b {
                break;
            }
            for &e in &self.tree {
                let joint = &self.joints[e];
                let step = if joint.from == u {
                    Some((joint.to, true))
                } else if joint.to == u {
                    Some((joint.from, false))
                } else {
                    None
                };
                if let Some((w, fwd)) = step {
                    if !seen[w] {
                        seen[w] = true;
                        prev[w] = Some((u, e, fwd));
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = b;
        while cur != a {
            let (u, e, fwd) = prev[cur].expect("tree spans the graph");
            path.push((e, fwd));
            cur = u;
        }
        path.reverse();
        path
    }

    fn cycles_from_specs(&self, specs: &[CycleSpec]) -> Result<Vec<FundamentalCycle>, LinkageError> {
        if specs.len() != self.gamma() {
            return Err(LinkageError::BadCycle {
                location: "cycles".into(),
                reason: format!("expected {} independent cycles, found {}", self.gamma(), specs.len()),
            });
        }
        specs
            .iter()
            .enumerate()
            .map(|(l, spec)| {
                let loc = format!("cycles[{l}]");
                let Some(&(first, _, _)) = spec.entries.first() else {
                    return Err(LinkageError::BadCycle { location: loc, reason: "empty cycle".into() });
                };
                if self.tree.contains(&first) {
                    return Err(LinkageError::BadCycle {
                        location: loc,
                        reason: format!("cycle must start at a co-tree joint, {:?} is in the tree", self.joints[first].id),
                    });
                }
                let entries = spec
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(k, &(j, sub, sign))| {
                        let location = format!("cycles[{l}].joints[{k}]");
                        if sign != 1 && sign != -1 {
                            return Err(LinkageError::BadSign { location, sign: sign.into() });
                        }
                        let coord = self.coord_index(j, sub).ok_or_else(|| LinkageError::BadSubIndex {
                            location,
                            id: self.joints[j].id.clone(),
                            sub: sub + 1,
                        })?;
                        Ok(CycleEntry { coord, sign })
                    })
                    .collect::<Result<_, _>>()?;
                Ok(FundamentalCycle { entries })
            })
            .collect()
    }
}

fn bfs_tree(bodies: &[String], joints: &[Joint], root: usize) -> Result<Vec<usize>, LinkageError> {
    let mut seen = vec![false; bodies.len()];
    let mut tree = Vec::new();
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(u) = queue.pop_front() {
        for (e, j) in joints.iter().enumerate() {
            let other = if j.from == u {
                j.to
            } else if j.to == u {
                j.from
            } else {
                continue;
            };
            if !seen[other] {
                seen[other] = true;
                tree.push(e);
                queue.push_back(other);
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(LinkageError::Disconnected { body: bodies[i].clone() });
    }
    tree.sort_unstable();
    Ok(tree)
}

fn check_connected(bodies: &[String], joints: &[Joint]) -> Result<(), LinkageError> {
    if bodies.is_empty() {
        return Ok(());
    }
    bfs_tree(bodies, joints, 0).map(|_| ())
}

fn validate_tree(nb: usize, joints: &[Joint], tree: &[usize], bodies: &[String]) -> Result<(), LinkageError> {
    let bad = |reason: String| LinkageError::BadTree { location: "tree".into(), reason };
    if tree.len() + 1 != nb {
        return Err(bad(format!("{} bodies need {} tree joints, found {}", nb, nb.saturating_sub(1), tree.len())));
    }
    // union-find over bodies
    let mut parent: Vec<usize> = (0..nb).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &e in tree {
        let j = &joints[e];
        let (a, b) = (find(&mut parent, j.from), find(&mut parent, j.to));
        if a == b {
            return Err(bad(format!("joint {:?} closes a loop inside the tree", j.id)));
        }
        parent[a] = b;
    }
    let r0 = find(&mut parent, 0);
    for i in 1..nb {
        if find(&mut parent, i) != r0 {
            return Err(bad(format!("body {:?} is not spanned", bodies[i])));
        }
    }
    Ok(())
}
