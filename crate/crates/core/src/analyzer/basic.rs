use std::f64::consts::PI;

use serde::Serialize;

use super::report::{fmt_complex, AnalysisReport, Criterion, Verdict, Witness};
use crate::error::{Error, Result};
use crate::numkernel::{
    eig_left, fro, left_null_space, rank_info_scaled, spectral_radius, CMatrix, Tolerance, C64,
};

/// Result of a PBH sweep `rank [sI - S, G] == n` over the eigenvalues of `S`.
#[derive(Debug, Clone)]
pub(crate) struct PbhSweep {
    pub full_rank: bool,
    pub margin: f64,
    pub witness: Option<Witness>,
}

pub(crate) fn pbh_sweep(name: &str, square: &CMatrix, input: &CMatrix, tol: &Tolerance) -> Result<PbhSweep> {
    let n = crate::numkernel::ensure_square(square)?;
    if input.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "{name}: input has {} rows, expected {n}",
            input.nrows()
        )));
    }
    let scale = fro(square);
    let mut out = PbhSweep {
        full_rank: true,
        margin: f64::INFINITY,
        witness: None,
    };
    for cluster in eig_left(square, tol)? {
        let s = cluster.value;
        let mut m = CMatrix::zeros(n, n + input.ncols());
        m.view_mut((0, 0), (n, n))
            .copy_from(&(CMatrix::identity(n, n) * s - square));
        m.view_mut((0, n), input.shape()).copy_from(input);
        let info = rank_info_scaled(&m, scale, tol);
        out.margin = out.margin.min(info.margin());
        if info.rank < n {
            out.full_rank = false;
            if out.witness.is_none() {
                let null = left_null_space(&m, info.cutoff);
                let vector = (null.nrows() > 0).then(|| null.row(0).iter().copied().collect());
                out.witness = Some(Witness {
                    check: name.to_string(),
                    eigenvalue: s,
                    rank: info.rank,
                    required: n,
                    vector,
                });
            }
        }
    }
    Ok(out)
}

/// PBH test of a continuous-time pair, evaluated at the eigenvalues of `A`.
pub fn pbh_single_continuous(a: &CMatrix, b: &CMatrix, tol: &Tolerance) -> Result<AnalysisReport> {
    let sweep = pbh_sweep("rank [sI - A, B]", a, b, tol)?;
    let verdict = if sweep.full_rank {
        Verdict::Controllable
    } else {
        Verdict::Uncontrollable
    };
    let mut report = AnalysisReport::new(verdict, Criterion::ContinuousPbh);
    report.condition(
        "rank [sI - A, B] = n at every eigenvalue of A",
        sweep.full_rank,
        "",
    );
    report.margin("pbh", sweep.margin);
    if let Some(w) = sweep.witness {
        report.witness(w);
    }
    Ok(report)
}

/// Pair of eigenvalues of `A` whose difference is `2 k pi j / h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathologyWitness {
    pub lambda_a: C64,
    pub lambda_b: C64,
    pub k: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pathology {
    pub pathological: bool,
    pub witnesses: Vec<PathologyWitness>,
}

/// Detects sampling periods that fold two distinct modes of `A` onto the
/// same sampled eigenvalue.
pub fn is_pathological(a: &CMatrix, h: f64, tol: &Tolerance) -> Result<Pathology> {
    crate::numkernel::ensure_square(a)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::NonPositivePeriod(h));
    }
    let values: Vec<C64> = eig_left(a, tol)?.into_iter().map(|c| c.value).collect();
    let radius = tol.cluster_radius(spectral_radius(&values));
    let step = 2.0 * PI / h;
    let mut witnesses = Vec::new();
    for &la in &values {
        for &lb in &values {
            let d = la - lb;
            if d.re.abs() > radius || d.im <= 0.0 {
                continue;
            }
            let k = (d.im / step).round();
            if k >= 1.0 && (d.im - k * step).abs() <= radius {
                witnesses.push(PathologyWitness {
                    lambda_a: la,
                    lambda_b: lb,
                    k: k as i64,
                });
            }
        }
    }
    Ok(Pathology {
        pathological: !witnesses.is_empty(),
        witnesses,
    })
}

impl PathologyWitness {
    pub fn describe(&self) -> String {
        format!(
            "{} - {} = 2*{}*pi*j/h",
            fmt_complex(self.lambda_a),
            fmt_complex(self.lambda_b),
            self.k
        )
    }
}
