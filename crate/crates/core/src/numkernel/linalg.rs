use serde::Serialize;

use super::svd::svd;
use super::{CMatrix, Tolerance};

/// Outcome of a tolerance-based rank decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankInfo {
    pub rank: usize,
    /// Absolute singular-value cutoff that was applied.
    pub cutoff: f64,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
}

impl RankInfo {
    /// Distance of the decision from the threshold, as a ratio >= 1 when the
    /// decision is clear. Combines the smallest retained singular value and
    /// the largest discarded one.
    pub fn margin(&self) -> f64 {
        const CAP: f64 = 1e16;
        if self.cutoff <= 0.0 {
            return CAP;
        }
        let kept = if self.rank > 0 {
            self.singular_values[self.rank - 1] / self.cutoff
        } else {
            CAP
        };
        let dropped = match self.singular_values.get(self.rank) {
            Some(&s) if s > 0.0 => self.cutoff / s,
            _ => CAP,
        };
        kept.min(dropped).min(CAP)
    }
}


/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    svd(m).singular_values
}

/// Number of singular values exceeding `rank_rel * sigma_max`.
pub fn rank_tol(m: &CMatrix, tol: &Tolerance) -> usize {
    rank_info(m, tol).rank
}

pub fn rank_info(m: &CMatrix, tol: &Tolerance) -> RankInfo {
    rank_info_scaled(m, 0.0, tol)
}

/// Rank decision with cutoff `rank_rel * max(sigma_max, scale)`.
///
/// `scale` anchors the decision when the matrix itself may be numerically
/// zero, e.g. a product of an orthonormal basis with a fixed input matrix.
pub fn rank_info_scaled(m: &CMatrix, scale: f64, tol: &Tolerance) -> RankInfo {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_rel * smax.max(scale);
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    RankInfo {
        rank,
        cutoff,
        singular_values: sv,
    }
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Orthonormal row basis of `{ v : v * m = 0 }`; a direction counts as null
/// when its singular value is at most `cutoff`.
pub fn left_null_space(m: &CMatrix, cutoff: f64) -> CMatrix {
    let n = m.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.ncols() == 0 {
        return CMatrix::identity(n, n);
    }
    // v m = 0  <=>  m^H v^H = 0; pad so the SVD yields all n right vectors.
    let x = m.adjoint();
    let rows = x.nrows().max(n);
    let mut padded = CMatrix::zeros(rows, n);
    padded.view_mut((0, 0), x.shape()).copy_from(&x);
    let dec = svd(&padded);
    let vt = &dec.v_t;
    let picked: Vec<usize> = (0..dec.singular_values.len())
        .filter(|&i| dec.singular_values[i] <= cutoff)
        .collect();
    let mut out = CMatrix::zeros(picked.len(), n);
    for (r, &i) in picked.iter().enumerate() {
        out.row_mut(r).copy_from(&vt.row(i));
    }
    out
}

/// Orthonormal basis (as rows) of the row space of `m`, dropping directions
/// with singular value at or below `rank_rel * max(sigma_max, scale)`.
pub fn orth_rows(m: &CMatrix, scale: f64, tol: &Tolerance) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMatrix::zeros(0, m.ncols());
    }
    let dec = svd(m);
    let vt = &dec.v_t;
    let smax = dec.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.rank_rel * smax.max(scale);
    let mut idx: Vec<usize> = (0..dec.singular_values.len())
        .filter(|&i| dec.singular_values[i] > cutoff)
        .collect();
    idx.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let mut out = CMatrix::zeros(idx.len(), m.ncols());
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).copy_from(&vt.row(i));
    }
    out
}

/// Minimum-norm least-squares solution of `a x = b`, treating singular
/// values at or below `cutoff` as zero.
pub fn lstsq_min_norm(a: &CMatrix, b: &CMatrix, cutoff: f64) -> CMatrix {
    if a.nrows() == 0 || a.ncols() == 0 {
        return CMatrix::zeros(a.ncols(), b.ncols());
    }
    let dec = svd(a);
    let u = &dec.u;
    let vt = &dec.v_t;
    let utb = u.adjoint() * b;
    let mut scaled = utb.clone();
    for (i, s) in dec.singular_values.iter().enumerate() {
        let f = if *s > cutoff { 1.0 / s } else { 0.0 };
        scaled.row_mut(i).scale_mut(f);
    }
    vt.adjoint() * scaled
}

/// Ratio of extreme singular values; infinite for singular matrices.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}
