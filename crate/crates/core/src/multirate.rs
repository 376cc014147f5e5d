//! Multi-rate sampling: transmission at `h` with control held for `l`
//! periods (TMS), or control at `h` with transmission every `l` periods
//! (CMS).

use serde::{Deserialize, Serialize};

use crate::analyzer::{
    annihilation_over_family, decompose, eigenspace_phis, fmt_complex, AnalysisReport, Criterion,
    SubsystemFamily, Verdict, Witness,
};
use crate::analyzer::EIGENSPACE_REL;
use crate::error::{Error, Result};
use crate::numkernel::eig::link_groups;
use crate::numkernel::{eigenvalues, fro, kron, left_null_space, CMatrix, Tolerance, C64};
use crate::sysmodel::{discretize, sampled_blocks, NetworkedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultiRateKind {
    #[serde(rename = "TMS")]
    Tms,
    #[serde(rename = "CMS")]
    Cms,
}

impl MultiRateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MultiRateKind::Tms => "TMS",
            MultiRateKind::Cms => "CMS",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiRateSpec {
    pub base: NetworkedSystem,
    pub kind: MultiRateKind,
    /// Rate ratio between the slow and the fast period.
    pub l: usize,
}

impl MultiRateSpec {
    pub fn new(base: NetworkedSystem, kind: MultiRateKind, l: usize) -> Result<Self> {
        let spec = MultiRateSpec { base, kind, l };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::validation("multirate.l", "must be an integer >= 1"));
        }
        self.base.validate()
    }
}

/// Discrete system advancing by `l` base periods per step.
#[derive(Debug, Clone)]
pub struct LiftedSystem {
    pub phi: CMatrix,
    pub psi: CMatrix,
    pub kind: MultiRateKind,
    pub l: usize,
    pub period: f64,
}

fn expect_kind(spec: &MultiRateSpec, kind: MultiRateKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(Error::NotApplicable(format!(
            "expected a {} model, got {}",
            kind.as_str(),
            spec.kind.as_str()
        )));
    }
    Ok(())
}

/// `(Phi_s^l, (Phi_s^{l-1} + ... + I) Psi_s)`.
pub fn lift_tms(spec: &MultiRateSpec) -> Result<LiftedSystem> {
    expect_kind(spec, MultiRateKind::Tms)?;
    let ss = discretize(&spec.base)?;
    let nn = ss.phi_s.nrows();
    // Horner: S_{k+1} = Phi S_k + I, P_{k+1} = Phi P_k.
    let mut sum = CMatrix::identity(nn, nn);
    let mut power = ss.phi_s.clone();
    for _ in 1..spec.l {
        sum = &ss.phi_s * &sum + CMatrix::identity(nn, nn);
        power = &power * &ss.phi_s;
    }
    Ok(LiftedSystem {
        phi: power,
        psi: sum * &ss.psi_s,
        kind: MultiRateKind::Tms,
        l: spec.l,
        period: spec.l as f64 * spec.base.h,
    })
}

/// State matrix discretized at `l h`, input `[Delta (x) e^{A(l-1)h} B(h), ..., Delta (x) B(h)]`.
pub fn lift_cms(spec: &MultiRateSpec) -> Result<LiftedSystem> {
    expect_kind(spec, MultiRateKind::Cms)?;
    let slow = discretize(&spec.base.with_period(spec.l as f64 * spec.base.h)?)?;
    Ok(LiftedSystem {
        phi: slow.phi_s,
        psi: cms_input(spec)?,
        kind: MultiRateKind::Cms,
        l: spec.l,
        period: spec.l as f64 * spec.base.h,
    })
}

fn cms_input(spec: &MultiRateSpec) -> Result<CMatrix> {
    let (e_ah, _, bh) = sampled_blocks(&spec.base.node, spec.base.h)?;
    let delta = spec.base.topo.delta_matrix();
    let blocks: Vec<CMatrix> = {
        // Built from the last block backwards: e^{A r h} B(h) for r = 0..l-1.
        let mut acc = bh.clone();
        let mut rev = Vec::with_capacity(spec.l);
        for _ in 0..spec.l {
            rev.push(kron(&delta, &acc));
            acc = &e_ah * &acc;
        }
        rev.reverse();
        rev
    };
    let rows = blocks[0].nrows();
    let width = blocks[0].ncols();
    let mut psi = CMatrix::zeros(rows, width * spec.l);
    for (r, b) in blocks.iter().enumerate() {
        psi.columns_mut(r * width, width).copy_from(b);
    }
    Ok(psi)
}

pub fn lift(spec: &MultiRateSpec) -> Result<LiftedSystem> {
    match spec.kind {
        MultiRateKind::Tms => lift_tms(spec),
        MultiRateKind::Cms => lift_cms(spec),
    }
}

/// One distinct eigenvalue of the base sampled matrix and its `l`-th power.
/// Entries sharing `group` collide after lifting.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedEigenvalue {
    pub base: C64,
    pub lifted: C64,
    pub multiplicity: usize,
    pub group: usize,
}

pub fn tms_spectrum(fam: &SubsystemFamily, l: usize) -> Vec<LiftedEigenvalue> {
    let l = l.max(1);
    let mut out: Vec<LiftedEigenvalue> = fam
        .shared_eigenvalues()
        .into_iter()
        .map(|s| {
            let multiplicity = s
                .members
                .iter()
                .map(|&(e, k)| {
                    let entry = &fam.entries[e];
                    entry.spectrum[k].multiplicity * entry.algebraic_multiplicity()
                })
                .sum();
            LiftedEigenvalue {
                base: s.value,
                lifted: s.value.powu(l as u32),
                multiplicity,
                group: 0,
            }
        })
        .collect();
    let lifted: Vec<C64> = out.iter().map(|e| e.lifted).collect();
    let rho = lifted.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let radius = fam.radius.max(f64::EPSILON) * (1.0 + rho);
    for (g, members) in link_groups(&lifted, radius).into_iter().enumerate() {
        for k in members {
            out[k].group = g;
        }
    }
    out.sort_by_key(|e| e.group);
    out
}

fn geometric_sum(theta: C64, l: usize) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for _ in 0..l {
        s = s * theta + C64::new(1.0, 0.0);
    }
    s
}

fn stack_rows(parts: &[CMatrix]) -> CMatrix {
    let cols = parts.iter().map(CMatrix::ncols).max().unwrap_or(0);
    let rows = parts.iter().map(CMatrix::nrows).sum();
    let mut m = CMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        m.rows_mut(r, p.nrows()).copy_from(p);
        r += p.nrows();
    }
    m
}

fn decomposition_failed(criterion: Criterion, e: Error) -> Result<AnalysisReport> {
    match e {
        Error::InternalInconsistency(_) => Err(e),
        other => {
            let mut r = AnalysisReport::new(Verdict::Inconclusive, criterion);
            r.note(format!("subsystem decomposition unavailable: {other}"));
            Ok(r)
        }
    }
}

/// Geometric-sum condition on every base eigenvalue, then eigenspace
/// annihilation on the lifted eigenspaces (direct sums where powers collide).
pub fn check_tms(spec: &MultiRateSpec, tol: &Tolerance) -> Result<AnalysisReport> {
    tol.validate()?;
    expect_kind(spec, MultiRateKind::Tms)?;
    let ss = discretize(&spec.base)?;
    let lifted = lift_tms(spec)?;
    let fam = match decompose(&ss, &spec.base.topo, tol) {
        Ok(f) => f,
        Err(e) => return decomposition_failed(Criterion::TransmissionMultiRate, e),
    };
    let mut report = AnalysisReport::new(Verdict::Inconclusive, Criterion::TransmissionMultiRate);
    report.kind = Some(MultiRateKind::Tms);
    report.l = Some(spec.l);
    let spectrum = tms_spectrum(&fam, spec.l);

    let threshold = fam.radius * spec.l as f64;
    let mut first_zero = None;
    for e in &spectrum {
        let s = geometric_sum(e.base, spec.l);
        report.margin(format!("geometric sum at {}", fmt_complex(e.base)), s.norm() / threshold.max(f64::MIN_POSITIVE));
        if s.norm() <= threshold && first_zero.is_none() {
            first_zero = Some((e.base, s));
        }
    }
    report.condition(
        "geometric sum of every eigenvalue is nonzero",
        first_zero.is_none(),
        first_zero.map_or(String::new(), |(t, s)| format!("|sum| = {:.3e} at {}", s.norm(), fmt_complex(t))),
    );
    if let Some((theta, _)) = first_zero {
        report.witness(Witness {
            check: "geometric sum".into(),
            eigenvalue: theta,
            rank: 0,
            required: 1,
            vector: None,
        });
        return Ok(report);
    }

    let scale = fro(&lifted.phi).max(f64::MIN_POSITIVE);
    let nn = lifted.phi.nrows();
    let groups = spectrum.last().map_or(0, |e| e.group + 1);
    let mut failed = false;
    let mut incomplete = false;
    for g in 0..groups {
        let members: Vec<&LiftedEigenvalue> = spectrum.iter().filter(|e| e.group == g).collect();
        let mu = members.iter().map(|e| e.lifted).sum::<C64>() / members.len() as f64;
        let mut parts = Vec::new();
        for e in &members {
            parts.push(eigenspace_phis(&fam, e.base, tol)?.stacked());
        }
        let rows = stack_rows(&parts);
        let direct = left_null_space(
            &(&lifted.phi - CMatrix::identity(nn, nn) * mu),
            tol.rank_rel.max(EIGENSPACE_REL) * scale,
        )
        .nrows();
        if members.len() > 1 {
            report.note(format!(
                "lifted eigenvalue {} collects {} base eigenvalues",
                fmt_complex(mu),
                members.len()
            ));
        }
        if direct != rows.nrows() {
            incomplete = true;
            report.flag("eigenspace_dimension_mismatch");
            report.note(format!(
                "lifted eigenspace at {} has dimension {}, direct sum gives {}",
                fmt_complex(mu),
                direct,
                rows.nrows()
            ));
        }
        let test = crate::analyzer::annihilation_test(&rows, &lifted.psi, tol);
        report.margin(format!("annihilation at {}", fmt_complex(mu)), test.margin);
        report.condition(
            format!("eta * input != 0 on lifted eigenspace at {}", fmt_complex(mu)),
            test.holds,
            format!("rank {} of {}", test.rank, test.required),
        );
        if !test.holds {
            failed = true;
            report.witness(Witness {
                check: "lifted eigenspace annihilation".into(),
                eigenvalue: mu,
                rank: test.rank,
                required: test.required,
                vector: test.witness.as_ref().map(|m| m.iter().copied().collect()),
            });
        }
    }
    report.verdict = if failed {
        let theta = eigenvalues(&lifted.phi)?;
        let singular = theta.iter().any(|z| z.norm() <= fam.radius);
        if singular {
            report.note("lifted state matrix is singular; failure is not conclusive");
            Verdict::Inconclusive
        } else {
            Verdict::Uncontrollable
        }
    } else if incomplete {
        Verdict::Inconclusive
    } else {
        Verdict::Controllable
    };
    Ok(report)
}

/// Eigenspace annihilation for the system discretized at `l h` against the
/// stacked input of the `l` control updates inside one transmission period.
pub fn check_cms(spec: &MultiRateSpec, tol: &Tolerance) -> Result<AnalysisReport> {
    tol.validate()?;
    expect_kind(spec, MultiRateKind::Cms)?;
    let slow_sys = spec.base.with_period(spec.l as f64 * spec.base.h)?;
    let slow = discretize(&slow_sys)?;
    let psi = cms_input(spec)?;
    let fam = match decompose(&slow, &slow_sys.topo, tol) {
        Ok(f) => f,
        Err(e) => return decomposition_failed(Criterion::ControlMultiRate, e),
    };
    let mut report = annihilation_over_family(&slow, &fam, &psi, Criterion::ControlMultiRate, tol)?;
    report.kind = Some(MultiRateKind::Cms);
    report.l = Some(spec.l);
    Ok(report)
}
