//! Comparison of analyses against stored expected structures.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bundled;
use crate::classify::{classify, ClassificationKind};
use crate::cone::{analyze, Analysis, SolutionBranch};
use crate::linkage::{parse_linkage, Linkage};
use crate::poly::RationalMatrix;
use crate::scalar::{parse_rational, Q};

pub const EXPECTED_SIX_BAR: &str = include_str!("../data/expected/six_bar.json");
pub const EXPECTED_SEVEN_R: &str = include_str!("../data/expected/seven_r.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedStructure {
    pub example: String,
    pub kappa: usize,
    pub kind: ClassificationKind,
    pub contact_orders: Vec<[usize; 3]>,
    pub stages: Vec<ExpectedStage>,
    /// Stacked velocity constraint matrix at `q0`, one column per coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_order_matrix: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedStage {
    pub order: usize,
    pub branches: Vec<ExpectedBranch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedBranch {
    /// Spanning vectors of `π_1`.
    pub tangent: Vec<Vec<String>>,
    /// Coordinate (1-based) to `c` with `x_{2,j} = c · x_{1,1}²`.
    #[serde(default)]
    pub second_order: BTreeMap<String, String>,
}

/// First point where an analysis departs from the expectation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub example: String,
    /// Stage order, or `None` for the overall verdict.
    pub stage: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stage {
            Some(k) => write!(f, "{}: stage {k} diverges: {}", self.example, self.detail),
            None => write!(f, "{}: verdict diverges: {}", self.example, self.detail),
        }
    }
}

fn rational_rows(rows: &[Vec<String>]) -> Vec<Vec<Q>> {
    rows.iter().map(|r| r.iter().map(|s| parse_rational(s).expect("expected data holds rationals")).collect()).collect()
}

fn canonical(rows: Vec<Vec<Q>>) -> RationalMatrix {
    let (r, pivots) = RationalMatrix::from_rows(rows).rref();
    RationalMatrix::from_rows((0..pivots.len()).map(|i| r.row(i).to_vec()).collect())
}

fn describe(m: &RationalMatrix) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let r: Vec<String> = m.row(i).iter().map(crate::scalar::format_rational).collect();
            format!("({})", r.join(","))
        })
        .collect();
    format!("span{{{}}}", rows.join(", "))
}

impl ExpectedBranch {
    fn matches(&self, b: &SolutionBranch) -> Result<(), String> {
        let want = canonical(rational_rows(&self.tangent));
        let got = b.tangent_space().ok_or("tangent cone is not a linear space")?;
        if want != got {
            return Err(format!("tangent {} instead of {}", describe(&got), describe(&want)));
        }
        if self.second_order.is_empty() {
            return Ok(());
        }
        let x1 = b.project(1).map_err(|e| e.to_string())?;
        let x2 = b.project(2).map_err(|e| e.to_string())?;
        let s2 = &x1[0] * &x1[0];
        for (coord, c) in &self.second_order {
            let j: usize = coord.parse().expect("coordinate index");
            let c = parse_rational(c).expect("rational coefficient");
            let diff = &x2[j - 1] - &s2.scale(&c);
            if !diff.is_zero() {
                return Err(format!("x2[{j}] = {} is not {} * x1[1]^2", x2[j - 1], crate::scalar::format_rational(&c)));
            }
        }
        Ok(())
    }
}

/// Finds a one-to-one assignment of expected to computed branches.
fn assign(expected: &[ExpectedBranch], got: &[SolutionBranch], used: &mut Vec<bool>) -> Result<(), String> {
    let Some((first, rest)) = expected.split_first() else { return Ok(()) };
    let mut last_err = String::from("no branch left");
    for (i, b) in got.iter().enumerate() {
        if used[i] {
            continue;
        }
        match first.matches(b) {
            Ok(()) => {
                used[i] = true;
                match assign(rest, got, used) {
                    Ok(()) => return Ok(()),
                    Err(e) => last_err = e,
                }
                used[i] = false;
            }
            Err(e) => last_err = format!("branch {}: {e}", i + 1),
        }
    }
    Err(last_err)
}

impl ExpectedStructure {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Highest stage order listed.
    pub fn depth(&self) -> usize {
        self.stages.iter().map(|s| s.order).max().unwrap_or(1)
    }

    pub fn check(&self, analysis: &Analysis) -> Result<(), Divergence> {
        let diverge = |stage, detail: String| Divergence { example: self.example.clone(), stage, detail };
        if let Some(rows) = &self.first_order_matrix {
            let want = RationalMatrix::from_rows(rational_rows(rows));
            let got = &analysis.loops.jacobian;
            if (want.nrows(), want.ncols()) != (got.nrows(), got.ncols()) {
                return Err(diverge(
                    Some(1),
                    format!("constraint matrix is {}x{}, expected {}x{}", got.nrows(), got.ncols(), want.nrows(), want.ncols()),
                ));
            }
            for i in 0..want.nrows() {
                for j in 0..want.ncols() {
                    if want[(i, j)] != got[(i, j)] {
                        return Err(diverge(
                            Some(1),
                            format!(
                                "constraint matrix entry ({}, {}) is {}, expected {}",
                                i + 1,
                                j + 1,
                                crate::scalar::format_rational(&got[(i, j)]),
                                crate::scalar::format_rational(&want[(i, j)])
                            ),
                        ));
                    }
                }
            }
        }
        for st in &self.stages {
            let Some(got) = analysis.stage(st.order) else {
                return Err(diverge(Some(st.order), "stage was not reached".into()));
            };
            if got.branches.len() != st.branches.len() {
                return Err(diverge(
                    Some(st.order),
                    format!("expected {} branch(es), found {}", st.branches.len(), got.branches.len()),
                ));
            }
            let mut used = vec![false; got.branches.len()];
            assign(&st.branches, &got.branches, &mut used).map_err(|e| diverge(Some(st.order), e))?;
        }
        if analysis.kappa != self.kappa {
            return Err(diverge(None, format!("kappa {} instead of {}", analysis.kappa, self.kappa)));
        }
        let c = classify(analysis);
        if c.kind != self.kind {
            return Err(diverge(None, format!("classification {} instead of {}", c.kind, self.kind)));
        }
        if c.contact_orders != self.contact_orders {
            return Err(diverge(None, format!("contact orders {:?} instead of {:?}", c.contact_orders, self.contact_orders)));
        }
        Ok(())
    }
}

/// Analyzes `linkage` through `max_order` and checks it.
pub fn verify_linkage(expected: &ExpectedStructure, linkage: &Linkage, max_order: usize) -> Result<(), Divergence> {
    let analysis = analyze(linkage, max_order.max(expected.depth())).map_err(|e| Divergence {
        example: expected.example.clone(),
        stage: Some(1),
        detail: e.to_string(),
    })?;
    expected.check(&analysis)
}

/// Parses a document and checks it.
pub fn verify_document(expected: &ExpectedStructure, document: &str, max_order: usize) -> Result<(), Divergence> {
    let linkage = parse_linkage(document).map_err(|e| Divergence {
        example: expected.example.clone(),
        stage: None,
        detail: format!("document rejected: {e}"),
    })?;
    verify_linkage(expected, &linkage, max_order)
}

/// The bundled examples with their expected structures.
pub fn bundled_examples() -> Vec<(ExpectedStructure, &'static str)> {
    vec![
        (ExpectedStructure::parse(EXPECTED_SIX_BAR).expect("bundled expectation parses"), bundled::SIX_BAR),
        (ExpectedStructure::parse(EXPECTED_SEVEN_R).expect("bundled expectation parses"), bundled::SEVEN_R),
    ]
}

/// Outcome of checking all bundled examples.
pub struct VerifySummary {
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<Divergence>,
}

impl fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.failures {
            writeln!(f, "FAIL {d}")?;
        }
        write!(f, "{}/{} examples pass", self.passed, self.total)
    }
}

pub fn verify_examples(max_order: usize) -> VerifySummary {
    verify_pairs(&bundled_examples(), max_order)
}

pub fn verify_pairs(pairs: &[(ExpectedStructure, &str)], max_order: usize) -> VerifySummary {
    let failures: Vec<Divergence> =
        pairs.iter().filter_map(|(e, doc)| verify_document(e, doc, max_order).err()).collect();
    VerifySummary { passed: pairs.len() - failures.len(), total: pairs.len(), failures }
}
