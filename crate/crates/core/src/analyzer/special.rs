use super::basic::pbh_sweep;
use super::criteria::vector_of;
use super::report::{AnalysisReport, Criterion, Verdict, Witness};
use crate::error::{Error, Result};
use crate::numkernel::{
    eigenvalues, fro, kron, max_abs_diff, spectral_radius, CMatrix, Tolerance, C64,
};
use crate::sysmodel::{assemble_continuous, discretize, NetworkedSystem};

/// Shared verdict logic: the continuous pair decides controllability of
/// the sampled pair whenever it is controllable, and in both directions
/// when the sampled state matrix is nonsingular.
fn continuous_equivalence(
    sys: &NetworkedSystem,
    phi: &CMatrix,
    psi: &CMatrix,
    criterion: Criterion,
    tol: &Tolerance,
) -> Result<AnalysisReport> {
    let ss = discretize(sys)?;
    let sweep = pbh_sweep("rank [sI - Phi, Psi]", phi, psi, tol)?;
    let theta = eigenvalues(&ss.phi_s)?;
    let nonsingular = theta
        .iter()
        .all(|z| z.norm() > tol.cluster_radius(spectral_radius(&theta)));
    let mut report = AnalysisReport::new(Verdict::Inconclusive, criterion);
    report.condition("continuous system controllable", sweep.full_rank, "");
    report.condition("sampled state matrix nonsingular", nonsingular, "");
    report.margin("continuous pbh", sweep.margin);
    if sweep.full_rank {
        report.verdict = Verdict::Controllable;
    } else if let Some(w) = sweep.witness {
        if nonsingular {
            report.verdict = Verdict::Uncontrollable;
            // The continuous witness is also a left eigenvector of the
            // sampled state matrix.
            let sampled = w.vector.as_ref().map(|v| {
                let v = CMatrix::from_row_slice(1, v.len(), v);
                let num = (&v * &ss.phi_s * v.adjoint())[(0, 0)];
                let den = (&v * v.adjoint())[(0, 0)];
                (vector_of(&v), num / den)
            });
            match sampled {
                Some((vector, theta)) => report.witness(Witness {
                    check: "sampled eigenvector annihilates input".into(),
                    eigenvalue: theta,
                    rank: w.rank,
                    required: w.required,
                    vector: Some(vector),
                }),
                None => report.witness(w),
            }
        } else {
            report.witness(w);
            report.note("continuous system uncontrollable but sampled state matrix is singular");
        }
    }
    Ok(report)
}

/// One-dimensional node dynamics (`n = 1`, `a != 0`).
pub fn check_scalar(sys: &NetworkedSystem, tol: &Tolerance) -> Result<AnalysisReport> {
    let node = &sys.node;
    if node.n() != 1 {
        return Err(Error::NotApplicable("node dimension is not 1".into()));
    }
    let a = node.a[(0, 0)];
    if a.norm() == 0.0 {
        return Err(Error::NotApplicable("scalar dynamics require a != 0".into()));
    }
    let c = node.hc()[(0, 0)];
    let nodes = sys.topo.nodes();
    let id = CMatrix::identity(nodes, nodes);
    let phi = &id * a + &sys.topo.w * c;
    let psi = kron(&sys.topo.delta_matrix(), &node.b);
    let mut report = continuous_equivalence(sys, &phi, &psi, Criterion::ScalarDynamics, tol)?;

    // Closed form of the sampled state matrix.
    let eah = (a * sys.h).exp();
    let closed = &id * eah + &sys.topo.w * (c / a * (eah - C64::new(1.0, 0.0)));
    let ss = discretize(sys)?;
    let dev = max_abs_diff(&closed, &ss.phi_s) / (1.0 + fro(&ss.phi_s));
    report.margin("closed-form sampled matrix deviation", dev);
    if dev > 1e-10 {
        report.flag("closed_form_mismatch");
    }
    Ok(report)
}

/// Self-loop node dynamics (`A = I`).
pub fn check_selfloop(sys: &NetworkedSystem, tol: &Tolerance) -> Result<AnalysisReport> {
    let n = sys.node.n();
    if max_abs_diff(&sys.node.a, &CMatrix::identity(n, n)) > 1e-12 {
        return Err(Error::NotApplicable("state matrix is not the identity".into()));
    }
    let (phi, psi) = assemble_continuous(sys)?;
    continuous_equivalence(sys, &phi, &psi, Criterion::SelfLoopDynamics, tol)
}
