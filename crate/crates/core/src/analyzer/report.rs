use std::fmt::Write as _;

use serde::Serialize;

use crate::multirate::MultiRateKind;
use crate::numkernel::{CMatrix, C64};
use crate::oracle::OracleVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Controllable,
    Uncontrollable,
    Inconclusive,
}

impl Verdict {
    pub fn is_definite(self) -> bool {
        self != Verdict::Inconclusive
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Controllable => "Controllable",
            Verdict::Uncontrollable => "Uncontrollable",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

/// The rule that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    ContinuousPbh,
    ScalarDynamics,
    SelfLoopDynamics,
    NecessarySingularTopology,
    NecessarySubsystems,
    ChainTopology,
    StarTopology,
    StarNonPathological,
    CircleTopology,
    DiagonalizableTopology,
    EigenspaceAnnihilation,
    TransmissionMultiRate,
    ControlMultiRate,
    Oracle,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::ContinuousPbh => "continuous_pbh",
            Criterion::ScalarDynamics => "scalar_dynamics",
            Criterion::SelfLoopDynamics => "self_loop_dynamics",
            Criterion::NecessarySingularTopology => "necessary_singular_topology",
            Criterion::NecessarySubsystems => "necessary_subsystems",
            Criterion::ChainTopology => "chain_topology",
            Criterion::StarTopology => "star_topology",
            Criterion::StarNonPathological => "star_non_pathological",
            Criterion::CircleTopology => "circle_topology",
            Criterion::DiagonalizableTopology => "diagonalizable_topology",
            Criterion::EigenspaceAnnihilation => "eigenspace_annihilation",
            Criterion::TransmissionMultiRate => "transmission_multi_rate",
            Criterion::ControlMultiRate => "control_multi_rate",
            Criterion::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// A concrete failure instance: the eigenvalue at which a rank test failed,
/// the rank found, and a left vector exhibiting the deficiency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub check: String,
    pub eigenvalue: C64,
    pub rank: usize,
    pub required: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<C64>>,
}

impl Witness {
    pub fn vector_matrix(&self) -> Option<CMatrix> {
        self.vector
            .as_ref()
            .map(|v| CMatrix::from_row_slice(1, v.len(), v))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Evidence {
    pub conditions: Vec<Condition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Distance of a rank decision from its threshold (>= 1 means clear).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub check: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub verdict: Verdict,
    pub criterion: Criterion,
    pub evidence: Evidence,
    pub margins: Vec<Margin>,
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<MultiRateKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleVerdict>,
}

impl AnalysisReport {
    pub fn new(verdict: Verdict, criterion: Criterion) -> Self {
        AnalysisReport {
            verdict,
            criterion,
            evidence: Evidence::default(),
            margins: Vec::new(),
            flags: Vec::new(),
            kind: None,
            l: None,
            oracle: None,
        }
    }

    pub fn condition(&mut self, name: impl Into<String>, holds: bool, detail: impl Into<String>) {
        self.evidence.conditions.push(Condition {
            name: name.into(),
            holds,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.evidence.notes.push(text.into());
    }

    pub fn margin(&mut self, check: impl Into<String>, ratio: f64) {
        self.margins.push(Margin {
            check: check.into(),
            ratio,
        });
    }

    pub fn flag(&mut self, flag: impl Into<String>) {
        let flag = flag.into();
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }

    /// Records a witness, keeping the first one.
    pub fn witness(&mut self, w: Witness) {
        if self.evidence.witness.is_none() {
            self.evidence.witness = Some(w);
        }
    }

    pub fn all_conditions_hold(&self) -> bool {
        self.evidence.conditions.iter().all(|c| c.holds)
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.margins.iter().map(|m| m.ratio).reduce(f64::min)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable multi-line summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict:   {}", self.verdict.as_str());
        let _ = writeln!(s, "criterion: {}", self.criterion.as_str());
        if let (Some(kind), Some(l)) = (self.kind, self.l) {
            let _ = writeln!(s, "multirate: {} l={l}", kind.as_str());
        }
        for c in &self.evidence.conditions {
            let mark = if c.holds { "ok  " } else { "FAIL" };
            if c.detail.is_empty() {
                let _ = writeln!(s, "  [{mark}] {}", c.name);
            } else {
                let _ = writeln!(s, "  [{mark}] {}: {}", c.name, c.detail);
            }
        }
        if let Some(w) = &self.evidence.witness {
            let _ = writeln!(
                s,
                "witness:   {} at {} (rank {} < {})",
                w.check,
                fmt_complex(w.eigenvalue),
                w.rank,
                w.required
            );
        }
        for n in &self.evidence.notes {
            let _ = writeln!(s, "note:      {n}");
        }
        if let Some(m) = self.min_margin() {
            let _ = writeln!(s, "margin:    {m:.3e}");
        }
        if !self.flags.is_empty() {
            let _ = writeln!(s, "flags:     {}", self.flags.join(", "));
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                s,
                "oracle:    rank {}/{} reachable={} controllable_to_origin={}",
                o.rank, o.dim, o.reachable, o.controllable_to_origin
            );
        }
        s
    }
}

pub(crate) fn fmt_complex(z: C64) -> String {
    if z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) {
        format!("{:.6}", z.re)
    } else if z.im < 0.0 {
        format!("{:.6}-{:.6}j", z.re, -z.im)
    } else {
        format!("{:.6}+{:.6}j", z.re, z.im)
    }
}
