use std::f64::consts::PI;

use super::basic::{is_pathological, pbh_single_continuous};
use super::criteria::{annihilation_test, diagonalizable_conditions, vector_of};
use super::family::{decompose, multiset_deviation};
use super::report::{fmt_complex, AnalysisReport, Criterion, Verdict, Witness};
use crate::error::{Error, Result};
use crate::numkernel::{eig_left, eigenvalues, CMatrix, Tolerance, C64};
use crate::spectral::chain_basis;
use crate::sysmodel::{NetworkTopology, NetworkedSystem, SampledSystem};

/// Weights at or below this magnitude are structural zeros.
const STRUCTURAL_ZERO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyPattern {
    /// `w_{i,i-1} != 0`, everything else zero.
    Chain,
    /// `w_{i,1} != 0` for `i > 1`, everything else zero (`N >= 3`).
    Star,
    /// A chain closed by `w_{1,N} != 0`.
    Circle,
    Other,
}

fn nz(x: C64) -> bool {
    x.norm() > STRUCTURAL_ZERO
}

/// Support pattern of a topology matrix.
pub fn classify(w: &CMatrix) -> TopologyPattern {
    let n = w.nrows();
    if n < 2 || w.ncols() != n {
        return TopologyPattern::Other;
    }
    let support = |f: &dyn Fn(usize, usize) -> bool| {
        (0..n).all(|i| (0..n).all(|j| nz(w[(i, j)]) == f(i, j)))
    };
    if support(&|i, j| i >= 1 && j + 1 == i) {
        TopologyPattern::Chain
    } else if n >= 3 && support(&|i, j| i >= 1 && j == 0) {
        TopologyPattern::Star
    } else if support(&|i, j| (i >= 1 && j + 1 == i) || (i == 0 && j == n - 1)) {
        TopologyPattern::Circle
    } else {
        TopologyPattern::Other
    }
}

fn drivers_match(topo: &NetworkTopology, expected: impl Fn(usize) -> u8) -> bool {
    topo.delta.iter().enumerate().all(|(i, &d)| d == expected(i))
}

fn span_test(
    ss: &SampledSystem,
    cap: usize,
    criterion: Criterion,
    tol: &Tolerance,
) -> Result<(AnalysisReport, bool)> {
    let mut report = AnalysisReport::new(Verdict::Inconclusive, criterion);
    let mut all = true;
    let mut all_simple = true;
    for cluster in eig_left(&ss.e_ah, tol)? {
        let chains = chain_basis(&ss.e_ah, &ss.hh, cluster.value, cap, tol)?;
        let mut rows: Vec<CMatrix> = Vec::new();
        for ch in &chains {
            if ch.len() > 1 {
                all_simple = false;
            }
            rows.extend(ch.vectors.iter().take(cap).cloned());
        }
        let mut stacked = CMatrix::zeros(rows.len(), ss.e_ah.nrows());
        for (r, v) in rows.iter().enumerate() {
            stacked.row_mut(r).copy_from(&v.row(0));
        }
        let test = annihilation_test(&stacked, &ss.bh, tol);
        let at = fmt_complex(cluster.value);
        report.condition(
            format!("xi B(h) != 0 on chain span at {at}"),
            test.holds,
            format!("span dimension {}, rank {}", test.required, test.rank),
        );
        report.margin(format!("chain span at {at}"), test.margin);
        if !test.holds {
            all = false;
            report.witness(Witness {
                check: "chain span annihilates B(h)".into(),
                eigenvalue: cluster.value,
                rank: test.rank,
                required: test.required,
                vector: test.witness.as_ref().map(vector_of),
            });
        }
    }
    report.verdict = if all {
        Verdict::Controllable
    } else {
        Verdict::Inconclusive
    };
    Ok((report, all_simple))
}

/// Sufficient test for a directed chain driven at its first node.
pub fn check_chain(ss: &SampledSystem, topo: &NetworkTopology, tol: &Tolerance) -> Result<AnalysisReport> {
    if classify(&topo.w) != TopologyPattern::Chain || !drivers_match(topo, |i| (i == 0) as u8) {
        return Err(Error::NotApplicable(
            "requires a directed chain driven only at node 1".into(),
        ));
    }
    let (mut report, _) = span_test(ss, topo.nodes(), Criterion::ChainTopology, tol)?;
    if report.verdict != Verdict::Controllable {
        report.note("chain condition is sufficient only");
    }
    Ok(report)
}

/// Sufficient test for a directed star with every node but node 2 driven.
pub fn check_star(
    sys: &NetworkedSystem,
    ss: &SampledSystem,
    tol: &Tolerance,
) -> Result<AnalysisReport> {
    let topo = &sys.topo;
    if classify(&topo.w) != TopologyPattern::Star || !drivers_match(topo, |i| (i != 1) as u8) {
        return Err(Error::NotApplicable(
            "requires a directed star with node 2 undriven".into(),
        ));
    }
    let (span, all_simple) = span_test(ss, 2, Criterion::StarTopology, tol)?;
    if !all_simple {
        let mut report = span;
        if report.verdict != Verdict::Controllable {
            report.note("star condition is sufficient only");
        }
        return Ok(report);
    }
    let mut report = AnalysisReport::new(Verdict::Inconclusive, Criterion::StarNonPathological);
    report.note("all generalized chains have length 1");
    let pbh = pbh_single_continuous(&sys.node.a, &sys.node.b, tol)?;
    let controllable = pbh.verdict == Verdict::Controllable;
    report.condition("(A, B) controllable", controllable, "");
    report.margins.extend(pbh.margins);
    let path = is_pathological(&sys.node.a, sys.h, tol)?;
    report.condition(
        "sampling period non-pathological about A",
        !path.pathological,
        path.witnesses.first().map(|w| w.describe()).unwrap_or_default(),
    );
    if controllable && !path.pathological {
        report.verdict = Verdict::Controllable;
    } else {
        report.note("star condition is sufficient only");
    }
    Ok(report)
}

/// Closed-form spectrum of a weighted directed cycle.
pub fn circle_eigenvalues(w: &CMatrix, tol: &Tolerance) -> Result<Vec<C64>> {
    let n = w.nrows();
    if n < 2 || w.ncols() != n {
        return Err(Error::NotApplicable("cycle needs at least two nodes".into()));
    }
    let on_cycle = |i: usize, j: usize| (i >= 1 && j + 1 == i) || (i == 0 && j == n - 1);
    for i in 0..n {
        for j in 0..n {
            if !on_cycle(i, j) && nz(w[(i, j)]) {
                return Err(Error::NotApplicable("topology is not a directed cycle".into()));
            }
        }
    }
    let mut wbar = 1.0;
    for i in 0..n {
        let j = if i == 0 { n - 1 } else { i - 1 };
        let x = w[(i, j)];
        if !nz(x) {
            return Err(Error::ZeroWeight { index: i });
        }
        wbar *= x.re;
    }
    let r = wbar.abs().powf(1.0 / n as f64);
    let values: Vec<C64> = (1..=n)
        .map(|i| {
            let phase = if wbar > 0.0 {
                2.0 * i as f64 * PI / n as f64
            } else {
                (2.0 * i as f64 - 1.0) * PI / n as f64
            };
            C64::from_polar(r, phase)
        })
        .collect();
    let numeric = eigenvalues(w)?;
    let dev = multiset_deviation(&numeric, &values);
    if dev > (1e-8_f64).max(tol.eig_cluster) * (1.0 + r) {
        return Err(Error::InternalInconsistency(format!(
            "cycle spectrum deviates from eigensolver by {dev:.3e}"
        )));
    }
    Ok(values)
}

/// Cycle driven at node 1: the topology condition holds structurally, so
/// only the subsystem and common-eigenvalue conditions are tested.
pub fn check_circle(ss: &SampledSystem, topo: &NetworkTopology, tol: &Tolerance) -> Result<AnalysisReport> {
    if classify(&topo.w) != TopologyPattern::Circle || !drivers_match(topo, |i| (i == 0) as u8) {
        return Err(Error::NotApplicable(
            "requires a directed cycle driven only at node 1".into(),
        ));
    }
    let lambdas = circle_eigenvalues(&topo.w, tol)?;
    let fam = decompose(ss, topo, tol)?;
    let mut report = diagonalizable_conditions(ss, &fam, tol, false, Criterion::CircleTopology)?;
    report.note(format!(
        "cycle eigenvalues: {}",
        lambdas.iter().map(|z| fmt_complex(*z)).collect::<Vec<_>>().join(", ")
    ));
    Ok(report)
}
