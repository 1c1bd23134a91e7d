//! Analysis reports in JSON and plain text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::{classify, Classification};
use crate::cone::{analyze, Analysis, ConeStatus, SolutionBranch};
use crate::linkage::{Linkage, LinkageError};
use crate::poly::MultiPoly;
use crate::tracer::{default_params, trace_branch, TracedCurve};

/// Steps and step size used for the verification traces of `--trace`.
pub const REPORT_TRACE_STEPS: usize = 8;
pub const REPORT_TRACE_H: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSummary {
    pub order: usize,
    pub branch_count: usize,
    pub dims: Vec<usize>,
    pub conditions: Vec<MultiPoly>,
    pub collapsed: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchReport {
    pub dim: usize,
    pub params: Vec<String>,
    /// Order (as a decimal string) to the expressions of `x_order`.
    pub jets: BTreeMap<String, Vec<MultiPoly>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<MultiPoly>,
}

impl BranchReport {
    pub fn from_branch(b: &SolutionBranch) -> Self {
        Self {
            dim: b.dim(),
            params: b.params.iter().map(ToString::to_string).collect(),
            jets: b.jets.iter().enumerate().map(|(k, x)| ((k + 1).to_string(), x.clone())).collect(),
            constraints: b.constraints.clone(),
        }
    }

    /// Jets in increasing order.
    pub fn ordered_jets(&self) -> Vec<(usize, &Vec<MultiPoly>)> {
        let mut v: Vec<(usize, &Vec<MultiPoly>)> =
            self.jets.iter().filter_map(|(k, x)| k.parse().ok().map(|k| (k, x))).collect();
        v.sort_by_key(|(k, _)| *k);
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub branch: usize,
    pub ok: bool,
    pub max_residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub name: String,
    pub coordinates: Vec<String>,
    pub cycles: usize,
    pub rank: usize,
    pub analysis_order: usize,
    pub kappa: usize,
    pub status: ConeStatus,
    pub stages: Vec<StageSummary>,
    pub branches: Vec<BranchReport>,
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<TraceSummary>>,
}

impl AnalysisReport {
    pub fn build(linkage: &Linkage, analysis: &Analysis, traces: Option<Vec<TraceSummary>>) -> Self {
        let classification = classify(analysis);
        Self {
            name: linkage.name.clone(),
            coordinates: (0..linkage.n()).map(|c| linkage.coord_label(c)).collect(),
            cycles: linkage.gamma(),
            rank: analysis.loops.rank(),
            analysis_order: analysis.stages.len(),
            kappa: analysis.kappa,
            status: analysis.status,
            stages: analysis
                .stages
                .iter()
                .map(|s| StageSummary {
                    order: s.order,
                    branch_count: s.branches.len(),
                    dims: s.branches.iter().map(SolutionBranch::dim).collect(),
                    conditions: s.conditions.clone(),
                    collapsed: s.collapsed,
                })
                .collect(),
            branches: analysis.last().branches.iter().map(BranchReport::from_branch).collect(),
            classification,
            traces,
        }
    }

    /// Whether the verdict is usable as is (exit status zero).
    pub fn conclusive(&self) -> bool {
        self.status == ConeStatus::Terminated
            && self.classification.kind != crate::classify::ClassificationKind::Inconclusive
            && self.traces.as_ref().is_none_or(|t| t.iter().all(|s| s.ok))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let name = if self.name.is_empty() { "(unnamed)" } else { &self.name };
        let _ = writeln!(s, "linkage: {name}");
        let _ = writeln!(s, "coordinates: {}", self.coordinates.join(" "));
        let _ = writeln!(s, "cycles: {}, first-order rank: {}", self.cycles, self.rank);
        let _ = writeln!(s, "analysis order: {}", self.analysis_order);
        let _ = writeln!(s, "kappa: {}", self.kappa);
        let _ = writeln!(s, "status: {}", self.status);
        for st in &self.stages {
            let dims: Vec<String> = st.dims.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "stage {}: {} branch(es), dims [{}]", st.order, st.branch_count, dims.join(", "));
            for c in &st.conditions {
                let _ = writeln!(s, "  condition: {c} = 0");
            }
            if st.collapsed > 0 {
                let _ = writeln!(s, "  dropped {} alternative(s) with vanishing tangent", st.collapsed);
            }
        }
        for (i, b) in self.branches.iter().enumerate() {
            let _ = writeln!(s, "branch {} (dim {}), parameters: {}", i + 1, b.dim, b.params.join(" "));
            for (k, x) in b.ordered_jets() {
                let parts: Vec<String> = x.iter().map(ToString::to_string).collect();
                let _ = writeln!(s, "  x{k} = [{}]", parts.join(", "));
            }
            for c in &b.constraints {
                let _ = writeln!(s, "  subject to: {c} = 0");
            }
        }
        let c = &self.classification;
        let _ = writeln!(s, "classification: {}", c.kind);
        for p in &c.pairs {
            let contact = p.contact_order.map_or_else(|| "undetermined".to_string(), |k| k.to_string());
            let _ = writeln!(s, "  branches {} and {}: contact order {contact}", p.a, p.b);
            for inc in &p.inclusions {
                let _ = writeln!(
                    s,
                    "    order {}: {} in {}: {}, {} in {}: {}",
                    inc.order, p.a, p.b, inc.a_in_b, p.b, p.a, inc.b_in_a
                );
            }
        }
        let _ = writeln!(s, "kinematotropic: {}", if c.kinematotropic { "yes" } else { "no" });
        for note in &c.notes {
            let _ = writeln!(s, "note: {note}");
        }
        if let Some(traces) = &self.traces {
            for t in traces {
                match (&t.error, t.max_residual) {
                    (Some(e), _) => {
                        let _ = writeln!(s, "trace branch {}: failed: {e}", t.branch);
                    }
                    (None, Some(r)) => {
                        let _ = writeln!(s, "trace branch {}: ok, max residual {r:.3e}", t.branch);
                    }
                    _ => {}
                }
            }
        }
        s
    }
}

/// Branch jets as listed in a text report, by branch then order.
pub fn parse_text_branches(text: &str) -> Vec<Vec<Vec<MultiPoly>>> {
    let mut out: Vec<Vec<Vec<MultiPoly>>> = Vec::new();
    for line in text.lines() {
        if line.starts_with("branch ") {
            out.push(Vec::new());
        } else if let Some(rest) = line.strip_prefix("  x") {
            let Some((_, list)) = rest.split_once(" = [") else { continue };
            let list = list.trim_end_matches(']');
            let polys = if list.is_empty() {
                Vec::new()
            } else {
                list.split(", ").map(|p| p.parse().expect("report polynomial parses")).collect()
            };
            if let Some(b) = out.last_mut() {
                b.push(polys);
            }
        }
    }
    out
}

/// Traces every final branch at its default parameters.
pub fn trace_all(linkage: &Linkage, analysis: &Analysis) -> Vec<TraceSummary> {
    let model = linkage.local_model();
    analysis
        .last()
        .branches
        .iter()
        .enumerate()
        .map(|(i, b)| match trace_branch(&model, b, &default_params(b), REPORT_TRACE_STEPS, REPORT_TRACE_H) {
            Ok(c) => TraceSummary { branch: i + 1, ok: true, max_residual: Some(c.max_residual()), error: None },
            Err(e) => TraceSummary { branch: i + 1, ok: false, max_residual: None, error: Some(e.to_string()) },
        })
        .collect()
}

/// Runs the full pipeline on a linkage.
pub fn analyze_report(linkage: &Linkage, max_order: usize, with_traces: bool) -> Result<AnalysisReport, LinkageError> {
    let analysis = analyze(linkage, max_order)?;
    let traces = with_traces.then(|| trace_all(linkage, &analysis));
    Ok(AnalysisReport::build(linkage, &analysis, traces))
}

/// Traced curve for a report consumer.
pub fn curve_dump(linkage: &Linkage, curve: &TracedCurve) -> String {
    let labels: Vec<String> = (0..linkage.n()).map(|c| linkage.coord_label(c)).collect();
    curve.to_tsv(&labels)
}
