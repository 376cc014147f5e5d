//! Left Jordan chains of a matrix and generalized left Jordan chains of a
//! matrix `E` about a coupling matrix `H`.
//!
//! Both are computed from the same primitive: the solution set of the
//! chain equations
//!
//! ```text
//! xi^1 (theta I - E) = 0,   xi^j (theta I - E) = xi^(j-1) H,  j = 2..k
//! ```
//!
//! is the left null space of a block upper-bidiagonal matrix, and its
//! projection onto the first block is the set of admissible top vectors for
//! chains of length at least `k`. An ordinary left Jordan chain of `W` at
//! `lambda` is the special case `E = W`, `H = -I`.


use crate::error::{Error, Result};
use crate::numkernel::{
    condition_number, eig_left, fro, left_null_space, lstsq_min_norm, max_abs_diff,
    normalize_row, orth_rows, CMatrix, Tolerance, C64,
};

/// Subspace membership threshold for unit vectors against orthonormal
/// bases produced by rank decisions.
const SUBSPACE_EPS: f64 = 1e-6;

/// Left Jordan chain `v^1, ..., v^alpha` with `v^1 (A - lambda I) = 0` and
/// `v^m (A - lambda I) = v^(m-1)`.
#[derive(Debug, Clone)]
pub struct JordanChain {
    pub eigenvalue: C64,
    pub vectors: Vec<CMatrix>,
}

impl JordanChain {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Generalized left Jordan chain of `E` about `coupling` at `eigenvalue`.
#[derive(Debug, Clone)]
pub struct GeneralizedJordanChain {
    pub eigenvalue: C64,
    pub vectors: Vec<CMatrix>,
    pub coupling: CMatrix,
    /// The chain reached the requested length cap and could be extended
    /// further.
    pub truncated: bool,
}

impl GeneralizedJordanChain {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest defining-equation residual, relative to `||E|| + ||H||`.
    pub fn residual(&self, e: &CMatrix) -> f64 {
        chain_residual(e, &self.coupling, self.eigenvalue, &self.vectors)
    }
}

/// All Jordan chains of one eigenvalue.
#[derive(Debug, Clone)]
pub struct JordanBlockGroup {
    pub eigenvalue: C64,
    pub chains: Vec<JordanChain>,
}

impl JordanBlockGroup {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.chains.iter().map(JordanChain::len).collect()
    }

    pub fn algebraic_multiplicity(&self) -> usize {
        self.block_sizes().iter().sum()
    }
}

/// Left Jordan decomposition `T W T^-1 = J`.
#[derive(Debug, Clone)]
pub struct JordanStructure {
    pub matrix_dim: usize,
    pub blocks: Vec<JordanBlockGroup>,
    /// Rows are the chain vectors, each chain listed as `v^alpha, ..., v^1`.
    pub transform: CMatrix,
    pub condition: f64,
}

impl JordanStructure {
    /// Block upper-bidiagonal Jordan matrix matching `transform`.
    pub fn jordan_matrix(&self) -> CMatrix {
        let n = self.matrix_dim;
        let mut j = CMatrix::zeros(n, n);
        let mut at = 0;
        for group in &self.blocks {
            for chain in &group.chains {
                for k in 0..chain.len() {
                    j[(at + k, at + k)] = group.eigenvalue;
                    if k + 1 < chain.len() {
                        j[(at + k, at + k + 1)] = C64::new(1.0, 0.0);
                    }
                }
                at += chain.len();
            }
        }
        j
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.blocks
            .iter()
            .all(|g| g.chains.iter().all(|c| c.len() == 1))
    }

    pub fn group_for(&self, lambda: C64, radius: f64) -> Option<&JordanBlockGroup> {
        self.blocks
            .iter()
            .find(|g| (g.eigenvalue - lambda).norm() <= radius)
    }
}

fn chain_residual(e: &CMatrix, hc: &CMatrix, theta: C64, vectors: &[CMatrix]) -> f64 {
    let n = e.nrows();
    let r = CMatrix::identity(n, n) * theta - e;
    let scale = (fro(e) + fro(hc)).max(f64::MIN_POSITIVE);
    let norm: f64 = vectors
        .iter()
        .map(|v| fro(v).powi(2))
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for (j, v) in vectors.iter().enumerate() {
        let lhs = v * &r;
        let res = if j == 0 {
            fro(&lhs)
        } else {
            fro(&(lhs - &vectors[j - 1] * hc))
        };
        worst = worst.max(res);
    }
    worst / (scale * norm)
}

/// Solution spaces of the chain equations for lengths `1..=levels.len()`.
struct ChainSpaces {
    n: usize,
    /// Orthonormal rows of length `k n` solving the length-`k` equations.
    solutions: Vec<CMatrix>,
    /// Orthonormal rows spanning the admissible tops for length `k`.
    tops: Vec<CMatrix>,
}

impl ChainSpaces {
    fn build(e: &CMatrix, hc: &CMatrix, theta: C64, max_len: usize, tol: &Tolerance) -> Self {
        let n = e.nrows();
        let r = CMatrix::identity(n, n) * theta - e;
        let scale = fro(e).max(fro(hc)).max(theta.norm()).max(f64::MIN_POSITIVE);
        let cutoff = tol.rank_rel * scale;
        let mut solutions = Vec::new();
        let mut tops = Vec::new();
        for k in 1..=max_len {
            let mut m = CMatrix::zeros(k * n, k * n);
            for j in 0..k {
                m.view_mut((j * n, j * n), (n, n)).copy_from(&r);
                if j + 1 < k {
                    m.view_mut((j * n, (j + 1) * n), (n, n)).copy_from(&(-hc));
                }
            }
            let z = left_null_space(&m, cutoff);
            let p = z.columns(0, n).into_owned();
            let s = orth_rows(&p, 1.0, &Tolerance { rank_rel: SUBSPACE_EPS, ..*tol });
            let empty = s.nrows() == 0;
            solutions.push(z);
            tops.push(s);
            if empty {
                break;
            }
        }
        ChainSpaces { n, solutions, tops }
    }

    fn top_dim(&self, k: usize) -> usize {
        self.tops.get(k - 1).map_or(0, CMatrix::nrows)
    }

    fn max_level(&self) -> usize {
        (1..=self.tops.len())
            .rev()
            .find(|&k| self.top_dim(k) > 0)
            .unwrap_or(0)
    }

    fn contains(&self, k: usize, v: &CMatrix) -> bool {
        match self.tops.get(k - 1) {
            Some(q) if q.nrows() > 0 => {
                let proj = v * q.adjoint() * q;
                fro(&(v - proj)) <= SUBSPACE_EPS * fro(v).max(f64::MIN_POSITIVE)
            }
            _ => false,
        }
    }

    /// Minimum-norm chain of length `k` on top of `top`.
    fn chain(&self, k: usize, top: &CMatrix) -> Vec<CMatrix> {
        let n = self.n;
        let z = &self.solutions[k - 1];
        let p = z.columns(0, n).into_owned();
        // c P = top  <=>  P^T c^T = top^T
        let coeff = lstsq_min_norm(&p.transpose(), &top.transpose(), 1e-12).transpose();
        let full = coeff * z;
        let mut blocks: Vec<CMatrix> = (0..k)
            .map(|j| full.columns(j * n, n).into_owned())
            .collect();
        // A vanishing block means the next equation is homogeneous and the
        // chain does not genuinely continue.
        let biggest = blocks.iter().map(fro).fold(0.0, f64::max);
        while blocks.len() > 1 && fro(blocks.last().unwrap()) <= 1e-8 * biggest {
            blocks.pop();
        }
        blocks
    }

    /// Longest non-degenerate chain on `top` within `cap`, and whether a
    /// longer one exists.
    fn longest(&self, top: &CMatrix, cap: usize) -> (Vec<CMatrix>, bool) {
        let mut vectors = vec![top.clone()];
        for k in (2..=cap).rev() {
            if self.contains(k, top) {
                let ch = self.chain(k, top);
                if ch.len() > 1 {
                    vectors = fix_top(ch, top);
                    break;
                }
            }
        }
        let truncated = vectors.len() == cap
            && self.contains(cap + 1, top)
            && self.chain(cap + 1, top).len() > cap;
        (vectors, truncated)
    }
}

/// Longest chain (up to `max_len`) on top of the given left eigenvector.
///
/// `max_len` caps chains that would otherwise continue indefinitely; the
/// `truncated` flag reports whether the cap was binding.
pub fn generalized_chain(
    e: &CMatrix,
    hc: &CMatrix,
    theta: C64,
    top: &CMatrix,
    max_len: usize,
    tol: &Tolerance,
) -> Result<GeneralizedJordanChain> {
    let n = crate::numkernel::ensure_square(e)?;
    if hc.shape() != (n, n) || top.shape() != (1, n) {
        return Err(Error::DimensionMismatch(format!(
            "chain of {n}x{n} matrix needs {n}x{n} coupling and 1x{n} top"
        )));
    }
    let top = normalize_row(top);
    let residual = chain_residual(e, hc, theta, std::slice::from_ref(&top));
    if !(residual <= tol.chain_residual) {
        return Err(Error::NotAnEigenvector { residual });
    }
    let cap = max_len.max(1);
    let spaces = ChainSpaces::build(e, hc, theta, cap + 1, tol);
    let (vectors, truncated) = spaces.longest(&top, cap);
    Ok(GeneralizedJordanChain {
        eigenvalue: theta,
        vectors,
        coupling: hc.clone(),
        truncated,
    })
}

fn fix_top(mut vectors: Vec<CMatrix>, top: &CMatrix) -> Vec<CMatrix> {
    vectors[0] = top.clone();
    vectors
}

/// A full set of maximal chains at `theta`: the tops form a basis of the
/// left eigenspace adapted to chain length, so the chain vectors together
/// span the generalized eigenspace reachable within `max_len` levels.
pub fn chain_basis(
    e: &CMatrix,
    hc: &CMatrix,
    theta: C64,
    max_len: usize,
    tol: &Tolerance,
) -> Result<Vec<GeneralizedJordanChain>> {
    let n = crate::numkernel::ensure_square(e)?;
    if hc.shape() != (n, n) {
        return Err(Error::DimensionMismatch("coupling must match E".into()));
    }
    let cap = max_len.max(1);
    let spaces = ChainSpaces::build(e, hc, theta, cap + 1, tol);
    let deepest = spaces.max_level().min(cap);
    let mut chosen = CMatrix::zeros(0, n);
    let mut chains: Vec<GeneralizedJordanChain> = Vec::new();
    for k in (1..=deepest).rev() {
        let want = spaces.top_dim(k).saturating_sub(chosen.nrows());
        if want == 0 {
            continue;
        }
        let cand = &spaces.tops[k - 1];
        let residual = if chosen.nrows() > 0 {
            cand - cand * chosen.adjoint() * &chosen
        } else {
            cand.clone()
        };
        let fresh = orth_rows(&residual, 1.0, &Tolerance { rank_rel: SUBSPACE_EPS, ..*tol });
        for r in 0..fresh.nrows().min(want) {
            let top = normalize_row(&fresh.rows(r, 1).into_owned());
            let (vectors, truncated) = spaces.longest(&top, k.max(1));
            let truncated = truncated && k == cap;
            let mut stacked = CMatrix::zeros(chosen.nrows() + 1, n);
            stacked.rows_mut(0, chosen.nrows()).copy_from(&chosen);
            stacked.row_mut(chosen.nrows()).copy_from(&top.row(0));
            chosen = orth_rows(&stacked, 1.0, tol);
            chains.push(GeneralizedJordanChain {
                eigenvalue: theta,
                vectors,
                coupling: hc.clone(),
                truncated,
            });
        }
    }
    Ok(chains)
}

/// Left Jordan structure of a (small) topology matrix.
pub fn jordan_structure(w: &CMatrix, tol: &Tolerance) -> Result<JordanStructure> {
    let n = crate::numkernel::ensure_square(w)?;
    let minus_id = -CMatrix::identity(n, n);
    let mut blocks = Vec::new();
    for cluster in eig_left(w, tol)? {
        let chains = chain_basis(w, &minus_id, cluster.value, cluster.multiplicity, tol)?;
        let mut chains: Vec<JordanChain> = chains
            .into_iter()
            .map(|c| JordanChain {
                eigenvalue: cluster.value,
                vectors: c.vectors,
            })
            .collect();
        chains.sort_by(|a, b| b.len().cmp(&a.len()));
        let total: usize = chains.iter().map(JordanChain::len).sum();
        if total != cluster.multiplicity {
            return Err(Error::IllConditioned {
                cond: f64::INFINITY,
            });
        }
        blocks.push(JordanBlockGroup {
            eigenvalue: cluster.value,
            chains,
        });
    }
    let mut transform = CMatrix::zeros(n, n);
    let mut row = 0;
    for group in &blocks {
        for chain in &group.chains {
            for v in chain.vectors.iter().rev() {
                transform.row_mut(row).copy_from(&v.row(0));
                row += 1;
            }
        }
    }
    let condition = condition_number(&transform);
    if !(condition <= 1e12) {
        return Err(Error::IllConditioned { cond: condition });
    }
    let out = JordanStructure {
        matrix_dim: n,
        blocks,
        transform,
        condition,
    };
    let t_inv = out
        .transform
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditioned { cond: condition })?;
    let rebuilt = &t_inv * out.jordan_matrix() * &out.transform;
    let scale = fro(w).max(1.0);
    if max_abs_diff(&rebuilt, w) > 1e-6 * scale {
        return Err(Error::IllConditioned { cond: condition });
    }
    Ok(out)
}
