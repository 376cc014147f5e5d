//! Brute-force reference checks: Kalman reachability, a PBH sweep over the
//! full state matrix, the controllability-to-origin refinement, least-squares
//! steering, and sampling-period scans.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::analyzer::{analyze, is_pathological, Criterion, Verdict};
use crate::error::{Error, Result};
use crate::numkernel::{
    eig_left, ensure_square, fro, lstsq_min_norm, orth_rows, rank_info, singular_values, CMatrix,
    Tolerance, C64,
};
use crate::sysmodel::{NetworkedSystem, SampledSystem};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleVerdict {
    pub reachable: bool,
    pub controllable_to_origin: bool,
    pub rank: usize,
    pub dim: usize,
    pub deficient_eigenvalues: Vec<C64>,
}

/// Orthonormal columns spanning the column space of `m`, with the cutoff
/// anchored at 1 so small blocks are judged by their absolute size.
fn orth_cols(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    orth_rows(&m.adjoint(), 1.0, tol).adjoint()
}

fn unit_scale(m: &CMatrix) -> C64 {
    C64::new(1.0 / fro(m).max(f64::MIN_POSITIVE), 0.0)
}

fn hstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    m
}

/// Orthonormal basis of the reachable subspace `span{psi, phi psi, ...}`.
pub fn reachable_basis(phi: &CMatrix, psi: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let d = ensure_square(phi)?;
    if psi.nrows() != d {
        return Err(Error::DimensionMismatch(format!(
            "input matrix has {} rows, state dimension is {d}",
            psi.nrows()
        )));
    }
    let psi_n = psi * unit_scale(psi);
    let phi_n = phi * unit_scale(phi);
    if fro(psi) == 0.0 {
        return Ok(CMatrix::zeros(d, 0));
    }
    // Block Arnoldi: each new block is the part of phi * (last block) not
    // already spanned, found after two Gram-Schmidt passes.
    let mut q = orth_cols(&psi_n, tol);
    let mut last = q.clone();
    while last.ncols() > 0 && q.ncols() < d {
        let mut v = &phi_n * &last;
        for _ in 0..2 {
            v -= &q * (q.adjoint() * &v);
        }
        last = orth_cols(&v, tol);
        q = hstack(&q, &last);
    }
    Ok(q)
}

/// Kalman rank test with the controllability-to-origin refinement and a
/// PBH cross-check over the eigenvalues of `phi`.
pub fn kalman_rank(phi: &CMatrix, psi: &CMatrix, tol: &Tolerance) -> Result<OracleVerdict> {
    let d = ensure_square(phi)?;
    let r = reachable_basis(phi, psi, tol)?;
    let rank = r.ncols();
    let reachable = rank == d;

    // range(phi^d) must lie inside the reachable subspace.
    let controllable_to_origin = reachable || {
        let phi_n = phi * unit_scale(phi);
        let mut img = CMatrix::identity(d, d);
        for _ in 0..d {
            img = orth_cols(&(&phi_n * &img), tol);
            if img.ncols() == 0 {
                break;
            }
        }
        img.ncols() == 0 || orth_cols(&hstack(&r, &img), tol).ncols() == rank
    };

    let deficient = pbh_deficient(phi, psi, tol)?;
    if reachable == !deficient.is_empty() {
        return Err(Error::InternalInconsistency(format!(
            "Kalman rank {rank}/{d} disagrees with PBH sweep ({} deficient eigenvalues)",
            deficient.len()
        )));
    }
    Ok(OracleVerdict {
        reachable,
        controllable_to_origin,
        rank,
        dim: d,
        deficient_eigenvalues: deficient,
    })
}

fn pbh_deficient(phi: &CMatrix, psi: &CMatrix, tol: &Tolerance) -> Result<Vec<C64>> {
    let d = phi.nrows();
    let sphi = unit_scale(phi);
    let spsi = unit_scale(psi);
    let mut out = Vec::new();
    for cluster in eig_left(phi, tol)? {
        let shifted = (CMatrix::identity(d, d) * cluster.value - phi) * sphi;
        let m = hstack(&shifted, &(psi * spsi));
        let sv = singular_values(&m);
        let cutoff = tol.rank_rel * sv.first().copied().unwrap_or(0.0).max(1.0);
        if sv.iter().filter(|&&s| s > cutoff).count() < d {
            out.push(cluster.value);
        }
    }
    Ok(out)
}

/// Minimum-norm input sequence steering `x0` towards `xt` in `steps` steps.
#[derive(Debug, Clone)]
pub struct SteerResult {
    pub inputs: Vec<CMatrix>,
    /// `||x(steps) - xt||`.
    pub residual: f64,
}

pub fn steer(ss: &SampledSystem, x0: &CMatrix, xt: &CMatrix, steps: usize, tol: &Tolerance) -> Result<SteerResult> {
    let d = ss.phi_s.nrows();
    let p = ss.psi_s.ncols();
    if x0.shape() != (d, 1) || xt.shape() != (d, 1) {
        return Err(Error::DimensionMismatch(format!("states must be {d}x1")));
    }
    // columns [phi^{steps-1} psi, ..., phi psi, psi] act on u_0 .. u_{steps-1}
    let mut map = CMatrix::zeros(d, steps * p);
    let mut block = ss.psi_s.clone();
    for k in (0..steps).rev() {
        map.view_mut((0, k * p), (d, p)).copy_from(&block);
        block = &ss.phi_s * block;
    }
    let mut free = x0.clone();
    for _ in 0..steps {
        free = &ss.phi_s * free;
    }
    let target = xt - free;
    let cutoff = tol.rank_rel * singular_values(&map).first().copied().unwrap_or(0.0);
    let u = lstsq_min_norm(&map, &target, cutoff);
    let residual = fro(&(&map * &u - &target));
    let inputs = (0..steps).map(|k| u.rows(k * p, p).into_owned()).collect();
    Ok(SteerResult { inputs, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub h: f64,
    pub verdict: Verdict,
    pub criterion: Criterion,
    pub pathological_node: bool,
}

/// Analyzes the system on an evenly spaced grid of sampling periods.
pub fn scan_periods(
    sys: &NetworkedSystem,
    h_min: f64,
    h_max: f64,
    count: usize,
    tol: &Tolerance,
) -> Result<Vec<ScanRow>> {
    let valid = h_min > 0.0
        && h_min.is_finite()
        && h_max.is_finite()
        && count >= 1
        && (h_min < h_max || (count == 1 && h_min <= h_max));
    if !valid {
        return Err(Error::validation(
            "scan",
            "need 0 < h_min < h_max and count >= 2 (or count = 1)",
        ));
    }
    let grid: Vec<f64> = (0..count)
        .map(|i| {
            if count == 1 {
                h_min
            } else {
                h_min + (h_max - h_min) * i as f64 / (count - 1) as f64
            }
        })
        .collect();
    grid.par_iter()
        .map(|&h| {
            let s = sys.with_period(h)?;
            let report = analyze(&s, tol)?;
            let path = is_pathological(&s.node.a, h, tol)?;
            Ok(ScanRow {
                h,
                verdict: report.verdict,
                criterion: report.criterion,
                pathological_node: path.pathological,
            })
        })
        .collect()
}

/// `%.12g`-style formatting.
pub fn format_g12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-5..12).contains(&exp) {
        let s = format!("{x:.11e}");
        let (mant, e) = s.split_once('e').expect("exponent form");
        let e: i32 = e.parse().expect("integer exponent");
        format!("{}e{}{:02}", trim(mant.to_string()), if e < 0 { '-' } else { '+' }, e.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    }
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut s = String::from("h,verdict,criterion,pathological_node\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            format_g12(r.h),
            r.verdict.as_str(),
            r.criterion.as_str(),
            r.pathological_node
        );
    }
    s
}

/// Rank of the reachable subspace recomputed from the explicit Kalman
/// matrix, for diagnostics on small systems.
pub fn explicit_kalman_rank(phi: &CMatrix, psi: &CMatrix, tol: &Tolerance) -> usize {
    let d = phi.nrows();
    let p = psi.ncols();
    let mut k = CMatrix::zeros(d, d * p);
    let mut block = psi.clone();
    for i in 0..d {
        k.view_mut((0, i * p), (d, p)).copy_from(&block);
        block = phi * block;
    }
    rank_info(&k, tol).rank
}
