//! Dense complex linear algebra used by every other module.
//!
//! All matrices are carried as [`CMatrix`] (a dynamically sized complex
//! matrix), even when the inputs are real: topology matrices and the
//! subsystem matrices built from them routinely have complex spectra.

pub(crate) mod eig;
mod expm;
mod linalg;
mod svd;

pub use eig::{eig_left, eigenvalues, EigenCluster};
pub use expm::{expm, expm_with_integral};
pub use svd::{svd, Svd};
pub use linalg::{
    condition_number, kron, left_null_space, lstsq_min_norm, orth_rows, rank_info,
    rank_info_scaled, rank_tol, singular_values, RankInfo,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar.
pub type C64 = Complex64;

/// Dense complex matrix, row vectors are `1 x n` instances.
pub type CMatrix = DMatrix<C64>;

/// Numerical thresholds shared by all rank, clustering and chain decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Eigenvalue clustering radius, relative to `1 + spectral radius`.
    pub eig_cluster: f64,
    /// Residual bound accepted for eigenvectors and Jordan chains, relative
    /// to the matrix norm.
    pub chain_residual: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-9,
            eig_cluster: 1e-7,
            chain_residual: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, eig_cluster: f64, chain_residual: f64) -> Result<Self> {
        let tol = Tolerance {
            rank_rel,
            eig_cluster,
            chain_residual,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_rel", self.rank_rel),
            ("eig_cluster", self.eig_cluster),
            ("chain_residual", self.chain_residual),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if self.rank_rel >= 1.0 {
            return Err(Error::InvalidTolerance(format!(
                "rank_rel must be below 1, got {}",
                self.rank_rel
            )));
        }
        Ok(())
    }

    /// Absolute clustering radius for a matrix with the given spectral radius.
    pub fn cluster_radius(&self, spectral_radius: f64) -> f64 {
        self.eig_cluster * (1.0 + spectral_radius)
    }
}

/// Lifts a real row-major table into a complex matrix.
pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged rows".into()));
    }
    let m = CMatrix::from_fn(nrows, ncols, |i, j| C64::new(rows[i][j], 0.0));
    ensure_finite(&m)?;
    Ok(m)
}

/// Builds a complex matrix from real entries given in row-major order.
pub fn real_matrix(nrows: usize, ncols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), nrows * ncols, "entry count must equal rows x cols");
    CMatrix::from_fn(nrows, ncols, |i, j| C64::new(entries[i * ncols + j], 0.0))
}

/// Builds a complex row vector.
pub fn row_vector(entries: &[C64]) -> CMatrix {
    CMatrix::from_row_slice(1, entries.len(), entries)
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(
            "matrix contains non-finite entries".into(),
        ))
    }
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Largest modulus among the given values (0 for an empty list).
pub fn spectral_radius(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise deviation between two equally shaped matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Scales a row vector to unit norm with its first significant entry real
/// and positive. Zero vectors are returned unchanged.
pub fn normalize_row(v: &CMatrix) -> CMatrix {
    let norm = fro(v);
    if norm == 0.0 {
        return v.clone();
    }
    let lead = v
        .iter()
        .copied()
        .find(|z| z.norm() > 1e-10 * norm)
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    v.map(|z| z * phase / norm)
}
