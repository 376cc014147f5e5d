use super::basic::pbh_sweep;
use super::family::{eigenspace_phis, SubsystemFamily};
use super::report::{fmt_complex, AnalysisReport, Criterion, Verdict, Witness};
use crate::error::{Error, Result};
use crate::numkernel::{
    fro, kron, left_null_space, orth_rows, rank_info_scaled, CMatrix, Tolerance, C64,
};
use crate::sysmodel::SampledSystem;

/// Whether every nonzero combination of `rows` has a nonzero product with
/// `input`, decided as a full-row-rank test on `orth(rows) * input`.
pub(crate) struct Annihilation {
    pub holds: bool,
    pub rank: usize,
    pub required: usize,
    pub margin: f64,
    /// A unit combination of `rows` annihilating `input`, if any.
    pub witness: Option<CMatrix>,
}

pub(crate) fn annihilation_test(rows: &CMatrix, input: &CMatrix, tol: &Tolerance) -> Annihilation {
    let q = orth_rows(rows, 0.0, tol);
    let g = &q * input;
    let info = rank_info_scaled(&g, fro(input), tol);
    let holds = info.rank == q.nrows();
    let witness = if holds {
        None
    } else {
        let null = left_null_space(&g, info.cutoff);
        (null.nrows() > 0).then(|| null.rows(0, 1) * &q)
    };
    Annihilation {
        holds,
        rank: info.rank,
        required: q.nrows(),
        margin: info.margin(),
        witness,
    }
}

pub(crate) fn vector_of(m: &CMatrix) -> Vec<C64> {
    m.iter().copied().collect()
}

/// Eigenspace annihilation test over every eigenvalue of the sampled state
/// matrix. Sufficient for controllability; also necessary when the sampled
/// state matrix is nonsingular.
pub fn check_sufficient_general(
    ss: &SampledSystem,
    fam: &SubsystemFamily,
    tol: &Tolerance,
) -> Result<AnalysisReport> {
    annihilation_over_family(ss, fam, &ss.psi_s, Criterion::EigenspaceAnnihilation, tol)
}

pub(crate) fn annihilation_over_family(
    ss: &SampledSystem,
    fam: &SubsystemFamily,
    input: &CMatrix,
    criterion: Criterion,
    tol: &Tolerance,
) -> Result<AnalysisReport> {
    let _ = ss;
    let mut report = AnalysisReport::new(Verdict::Inconclusive, criterion);
    let mut failed = false;
    let mut incomplete = false;
    for shared in fam.shared_eigenvalues() {
        let basis = eigenspace_phis(fam, shared.value, tol)?;
        let label = format!("eta * input != 0 on eigenspace at {}", fmt_complex(basis.theta));
        if !basis.is_complete() {
            incomplete = true;
            report.flag("eigenspace_dimension_mismatch");
            report.note(format!(
                "eigenspace at {} assembled with {} vectors, direct count {}",
                fmt_complex(basis.theta),
                basis.basis.len(),
                basis.expected_dim
            ));
        }
        let test = annihilation_test(&basis.stacked(), input, tol);
        report.margin(format!("annihilation at {}", fmt_complex(basis.theta)), test.margin);
        report.condition(
            label,
            test.holds,
            format!("rank {} of {}", test.rank, test.required),
        );
        if !test.holds {
            failed = true;
            report.witness(Witness {
                check: "eigenspace annihilation".into(),
                eigenvalue: basis.theta,
                rank: test.rank,
                required: test.required,
                vector: test.witness.as_ref().map(vector_of),
            });
        }
    }
    report.verdict = if failed {
        if fam.is_nonsingular() {
            Verdict::Uncontrollable
        } else {
            report.note("sampled state matrix is singular; failure is not conclusive");
            Verdict::Inconclusive
        }
    } else if incomplete {
        Verdict::Inconclusive
    } else {
        Verdict::Controllable
    };
    Ok(report)
}

/// Conditions for a diagonalizable topology matrix: `(W, Delta)`
/// controllable, every `(E_i, B(h))` controllable, and shared subsystem
/// eigenvalues not annihilated jointly. Necessary as well when every
/// `E_i` is nonsingular.
pub fn check_diagonalizable(
    ss: &SampledSystem,
    fam: &SubsystemFamily,
    tol: &Tolerance,
) -> Result<AnalysisReport> {
    diagonalizable_conditions(ss, fam, tol, true, Criterion::DiagonalizableTopology)
}

pub(crate) fn diagonalizable_conditions(
    ss: &SampledSystem,
    fam: &SubsystemFamily,
    tol: &Tolerance,
    test_topology: bool,
    criterion: Criterion,
) -> Result<AnalysisReport> {
    if !fam.jordan.is_diagonalizable() {
        return Err(Error::NotApplicable(
            "topology matrix has a nontrivial Jordan block".into(),
        ));
    }
    let mut report = AnalysisReport::new(Verdict::Inconclusive, criterion);
    let mut all = true;

    if test_topology {
        let sweep = pbh_sweep("rank [sI - W, Delta]", &fam.topo.w, &fam.topo.delta_matrix(), tol)?;
        report.condition("(W, Delta) controllable", sweep.full_rank, "");
        report.margin("(W, Delta)", sweep.margin);
        if let Some(w) = sweep.witness {
            all = false;
            report.witness(lift_topology_witness(fam, w));
        }
    } else {
        report.condition("(W, Delta) controllable", true, "structural: single driver on a cycle");
    }

    for entry in &fam.entries {
        let sweep = pbh_sweep("rank [sI - E_i, B(h)]", &entry.e, &ss.bh, tol)?;
        let name = format!("(E_i, B(h)) controllable for lambda = {}", fmt_complex(entry.lambda));
        report.condition(name, sweep.full_rank, "");
        report.margin(format!("(E_i, B(h)) at lambda = {}", fmt_complex(entry.lambda)), sweep.margin);
        if let Some(w) = sweep.witness {
            all = false;
            report.witness(lift_node_witness(&entry.w_chains[0].vectors[0], w));
        }
    }

    let mut shared_count = 0;
    for shared in fam.shared_eigenvalues() {
        let mut rows: Vec<CMatrix> = Vec::new();
        for &(i, j) in &shared.members {
            let entry = &fam.entries[i];
            let xi = &entry.spectrum[j].left_vectors;
            for chain in &entry.w_chains {
                for r in 0..xi.nrows() {
                    rows.push(kron(&chain.vectors[0], &xi.rows(r, 1).into_owned()));
                }
            }
        }
        let owners: usize = shared
            .members
            .iter()
            .map(|&(i, _)| fam.entries[i].w_chains.len())
            .sum();
        if owners < 2 {
            continue;
        }
        shared_count += 1;
        let mut stacked = CMatrix::zeros(rows.len(), rows[0].ncols());
        for (r, v) in rows.iter().enumerate() {
            stacked.row_mut(r).copy_from(&v.row(0));
        }
        let test = annihilation_test(&stacked, &ss.psi_s, tol);
        report.condition(
            format!("common eigenvalue {} not jointly annihilated", fmt_complex(shared.value)),
            test.holds,
            format!("rank {} of {}", test.rank, test.required),
        );
        report.margin(format!("common eigenvalue {}", fmt_complex(shared.value)), test.margin);
        if !test.holds {
            all = false;
            report.witness(Witness {
                check: "common eigenvalue annihilation".into(),
                eigenvalue: shared.value,
                rank: test.rank,
                required: test.required,
                vector: test.witness.as_ref().map(vector_of),
            });
        }
    }
    if shared_count == 0 {
        report.note("no common eigenvalues between subsystems");
    }

    report.verdict = if all {
        Verdict::Controllable
    } else if fam.is_nonsingular() {
        Verdict::Uncontrollable
    } else {
        report.note("some subsystem is singular; failed conditions are not conclusive");
        Verdict::Inconclusive
    };
    Ok(report)
}

/// `v (x) xi` from a node-level PBH null vector `xi` and an eigenvector `v`
/// of `W`.
fn lift_node_witness(v: &CMatrix, w: Witness) -> Witness {
    let vector = w.vector.as_ref().map(|xi| {
        let xi = CMatrix::from_row_slice(1, xi.len(), xi);
        vector_of(&kron(v, &xi))
    });
    Witness { vector, ..w }
}

/// `v (x) xi` from a topology PBH null vector `v` and an eigenvector `xi`
/// of the subsystem at the same eigenvalue of `W`.
fn lift_topology_witness(fam: &SubsystemFamily, w: Witness) -> Witness {
    let entry = fam
        .entries
        .iter()
        .min_by(|a, b| (a.lambda - w.eigenvalue).norm().total_cmp(&(b.lambda - w.eigenvalue).norm()));
    match (entry, w.vector.as_ref()) {
        (Some(entry), Some(v)) => {
            let v = CMatrix::from_row_slice(1, v.len(), v);
            let cluster = &entry.spectrum[0];
            let xi = cluster.left_vectors.rows(0, 1).into_owned();
            Witness {
                eigenvalue: cluster.value,
                vector: Some(vector_of(&kron(&v, &xi))),
                ..w
            }
        }
        _ => w,
    }
}

/// Necessary conditions. Only failures are informative: they prove
/// uncontrollability when every subsystem matrix is nonsingular.
pub fn check_necessary(ss: &SampledSystem, fam: &SubsystemFamily, tol: &Tolerance) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new(Verdict::Inconclusive, Criterion::NecessarySubsystems);
    if !fam.is_nonsingular() {
        report.note("some subsystem matrix is singular; necessary conditions do not apply");
        return Ok(report);
    }
    if fam.topology_is_singular() {
        let sweep = pbh_sweep("rank [sI - e^{Ah}, B(h)]", &ss.e_ah, &ss.bh, tol)?;
        report.condition("(e^{Ah}, B(h)) controllable (W singular)", sweep.full_rank, "");
        report.margin("(e^{Ah}, B(h))", sweep.margin);
        if let Some(w) = sweep.witness {
            let zero = fam
                .entries
                .iter()
                .min_by(|a, b| a.lambda.norm().total_cmp(&b.lambda.norm()))
                .expect("nonempty family");
            report.note(format!(
                "rank [sI - e^{{Ah}}, B(h)] = {} < {} at s = {}",
                w.rank,
                w.required,
                fmt_complex(w.eigenvalue)
            ));
            report.witness(lift_node_witness(&zero.w_chains[0].vectors[0], w));
            report.criterion = Criterion::NecessarySingularTopology;
            report.verdict = Verdict::Uncontrollable;
            return Ok(report);
        }
    }
    let sweep = pbh_sweep("rank [sI - W, Delta]", &fam.topo.w, &fam.topo.delta_matrix(), tol)?;
    report.condition("(W, Delta) controllable", sweep.full_rank, "");
    report.margin("(W, Delta)", sweep.margin);
    if let Some(w) = sweep.witness {
        report.witness(lift_topology_witness(fam, w));
        report.verdict = Verdict::Uncontrollable;
        return Ok(report);
    }
    for entry in &fam.entries {
        let sweep = pbh_sweep("rank [sI - E_i, B(h)]", &entry.e, &ss.bh, tol)?;
        report.condition(
            format!("(E_i, B(h)) controllable for lambda = {}", fmt_complex(entry.lambda)),
            sweep.full_rank,
            "",
        );
        report.margin(format!("(E_i, B(h)) at lambda = {}", fmt_complex(entry.lambda)), sweep.margin);
        if let Some(w) = sweep.witness {
            report.witness(lift_node_witness(&entry.w_chains[0].vectors[0], w));
            report.verdict = Verdict::Uncontrollable;
            return Ok(report);
        }
    }
    report.note("all necessary conditions hold");
    Ok(report)
}
