//! Controllability criteria for networked sampled-data systems and the
//! combiner that runs them in a fixed order, backed by the oracle.

mod basic;
mod criteria;
mod family;
mod report;
mod special;
mod topology;

pub use basic::{is_pathological, pbh_single_continuous, Pathology, PathologyWitness};
pub use criteria::{check_diagonalizable, check_necessary, check_sufficient_general};
pub use family::{
    decompose, eigenspace_phis, EigenspaceBasis, EigenspaceTerm, SharedEigenvalue, Subsystem,
    SubsystemFamily,
};
pub use report::{AnalysisReport, Condition, Criterion, Evidence, Margin, Verdict, Witness};
pub use special::{check_scalar, check_selfloop};
pub use topology::{check_chain, check_circle, check_star, circle_eigenvalues, classify, TopologyPattern};

pub(crate) use criteria::{annihilation_over_family, annihilation_test};
pub(crate) use family::EIGENSPACE_REL;
pub(crate) use report::fmt_complex;

use crate::error::{Error, Result};
use crate::multirate::{check_cms, check_tms};
use crate::numkernel::{eigenvalues, spectral_radius, Tolerance};
use crate::oracle::{kalman_rank, OracleVerdict};
use crate::sysmodel::{discretize, Model, NetworkedSystem, SampledSystem};

/// Outcome of one attempted criterion inside [`analyze`].
enum Attempt {
    Decided(AnalysisReport),
    Open(String),
}

fn attempt(name: &str, r: Result<AnalysisReport>) -> Result<Attempt> {
    match r {
        Ok(rep) if rep.verdict.is_definite() => Ok(Attempt::Decided(rep)),
        Ok(_) => Ok(Attempt::Open(format!("{name}: inconclusive"))),
        Err(Error::NotApplicable(why)) => Ok(Attempt::Open(format!("{name}: not applicable ({why})"))),
        Err(e @ Error::InternalInconsistency(_)) => Err(e),
        Err(e) => Ok(Attempt::Open(format!("{name}: skipped ({e})"))),
    }
}

fn state_matrix_singular(ss: &SampledSystem) -> Result<bool> {
    let theta = eigenvalues(&ss.phi_s)?;
    let r = Tolerance::default().eig_cluster * (1.0 + spectral_radius(&theta));
    Ok(theta.iter().any(|z| z.norm() <= r))
}

fn run_criteria(sys: &NetworkedSystem, ss: &SampledSystem, tol: &Tolerance, trail: &mut Vec<String>) -> Result<Option<AnalysisReport>> {
    macro_rules! try_criterion {
        ($name:expr, $call:expr) => {
            match attempt($name, $call)? {
                Attempt::Decided(r) => return Ok(Some(r)),
                Attempt::Open(note) => trail.push(note),
            }
        };
    }
    if sys.node.n() == 1 {
        try_criterion!("scalar dynamics", check_scalar(sys, tol));
    }
    try_criterion!("self-loop dynamics", check_selfloop(sys, tol));

    let fam = match decompose(ss, &sys.topo, tol) {
        Ok(f) => f,
        Err(e @ Error::InternalInconsistency(_)) => return Err(e),
        Err(e) => {
            trail.push(format!("decomposition: skipped ({e})"));
            return Ok(None);
        }
    };
    try_criterion!("necessary conditions", check_necessary(ss, &fam, tol));
    match classify(&sys.topo.w) {
        TopologyPattern::Chain => try_criterion!("chain topology", check_chain(ss, &sys.topo, tol)),
        TopologyPattern::Star => try_criterion!("star topology", check_star(sys, ss, tol)),
        TopologyPattern::Circle => try_criterion!("circle topology", check_circle(ss, &sys.topo, tol)),
        TopologyPattern::Other => {}
    }
    if fam.jordan.is_diagonalizable() && fam.is_nonsingular() {
        try_criterion!("diagonalizable topology", check_diagonalizable(ss, &fam, tol));
    }
    try_criterion!("eigenspace annihilation", check_sufficient_general(ss, &fam, tol));
    Ok(None)
}

fn oracle_report(oracle: &OracleVerdict, singular: bool) -> AnalysisReport {
    let verdict = if oracle.reachable {
        Verdict::Controllable
    } else {
        Verdict::Uncontrollable
    };
    let mut r = AnalysisReport::new(verdict, Criterion::Oracle);
    r.condition(
        "reachability matrix has full rank",
        oracle.reachable,
        format!("rank {} of {}", oracle.rank, oracle.dim),
    );
    if let Some(&z) = oracle.deficient_eigenvalues.first() {
        r.witness(Witness {
            check: "rank [sI - Phi_s, Psi_s]".into(),
            eigenvalue: z,
            rank: oracle.rank,
            required: oracle.dim,
            vector: None,
        });
    }
    if !oracle.reachable && singular {
        r.note("verdict refers to reachability; the sampled state matrix is singular");
        if oracle.controllable_to_origin {
            r.flag("controllable_to_origin");
        }
    }
    r
}

/// Fails when a definite verdict from a structured criterion contradicts
/// the oracle.
pub(crate) fn cross_check(report: &AnalysisReport, oracle: &OracleVerdict) -> Result<()> {
    if report.criterion == Criterion::Oracle || !report.verdict.is_definite() {
        return Ok(());
    }
    let says = report.verdict == Verdict::Controllable;
    if says != oracle.reachable {
        return Err(Error::InternalInconsistency(format!(
            "criterion {} reports {} but the reachability rank is {}/{}",
            report.criterion.as_str(),
            report.verdict.as_str(),
            oracle.rank,
            oracle.dim
        )));
    }
    Ok(())
}

/// Runs the criteria in order (special dynamics, necessary conditions,
/// topology fast paths, diagonalizable topology, general eigenspace test)
/// and falls back to the oracle when none is conclusive.
pub fn analyze(sys: &NetworkedSystem, tol: &Tolerance) -> Result<AnalysisReport> {
    tol.validate()?;
    sys.validate()?;
    let ss = discretize(sys)?;
    let oracle = kalman_rank(&ss.phi_s, &ss.psi_s, tol)?;
    let singular = state_matrix_singular(&ss)?;
    let mut trail = Vec::new();
    let mut report = match run_criteria(sys, &ss, tol, &mut trail)? {
        Some(r) => r,
        None => oracle_report(&oracle, singular),
    };
    cross_check(&report, &oracle)?;
    for note in trail {
        report.note(note);
    }
    if singular {
        report.flag("singular_state_matrix");
    }
    let path = is_pathological(&sys.node.a, sys.h, tol)?;
    if path.pathological {
        report.flag("pathological_node_sampling");
        if report.verdict == Verdict::Controllable {
            report.note("node sampling pathological, eliminated by network");
        }
        for w in &path.witnesses {
            report.note(format!("pathological pair: {}", w.describe()));
        }
    }
    report.oracle = Some(oracle);
    Ok(report)
}

/// Analyzes a single-rate or multi-rate model.
pub fn analyze_model(model: &Model, tol: &Tolerance) -> Result<AnalysisReport> {
    match model {
        Model::Single(sys) => analyze(sys, tol),
        Model::MultiRate(spec) => {
            tol.validate()?;
            let lifted = crate::multirate::lift(spec)?;
            let oracle = kalman_rank(&lifted.phi, &lifted.psi, tol)?;
            let mut report = match spec.kind {
                crate::multirate::MultiRateKind::Tms => check_tms(spec, tol)?,
                crate::multirate::MultiRateKind::Cms => check_cms(spec, tol)?,
            };
            cross_check(&report, &oracle)?;
            if !report.verdict.is_definite() {
                let criterion = report.criterion;
                let mut fallback = oracle_report(&oracle, false);
                fallback.evidence.notes.push(format!("{} inconclusive", criterion.as_str()));
                fallback.flags.extend(report.flags.drain(..));
                report = fallback;
            }
            report.kind = Some(spec.kind);
            report.l = Some(spec.l);
            report.oracle = Some(oracle);
            Ok(report)
        }
    }
}
