//! Eigenvalues by complex shifted QR on the Hessenberg form, eigenvalue
//! clustering, and left eigenspaces.

use std::cmp::Ordering;


use super::{ensure_square, fro, left_null_space, CMatrix, Tolerance, C64};
use crate::error::{Error, Result};

/// One distinct eigenvalue with its multiplicities and left eigenspace.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    /// Cluster centroid.
    pub value: C64,
    /// Number of computed eigenvalues merged into this cluster.
    pub multiplicity: usize,
    /// Orthonormal rows `v` with `v (M - value I) ~ 0`.
    pub left_vectors: CMatrix,
}

impl EigenCluster {
    pub fn geometric_multiplicity(&self) -> usize {
        self.left_vectors.nrows()
    }
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let m1 = mid + disc;
    let m2 = mid - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// All eigenvalues (with repetition) of a square matrix.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let n = ensure_square(m)?;
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    let mut h = m.clone().hessenberg().h();
    let anorm = fro(&h).max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut vals = vec![C64::new(0.0, 0.0); n];
    let mut hi = n;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let last = hi - 1;
        let mut lo = last;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = anorm;
            }
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == last {
            vals[last] = h[(last, last)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 60 * n {
            return Err(Error::ConvergenceFailure(format!(
                "QR iteration exceeded {} sweeps on a {n}x{n} matrix",
                60 * n
            )));
        }
        let mu = if iter % 10 == 0 {
            // exceptional shift to break cycles
            h[(last, last)] + C64::new(0.75 * h[(last, last - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(last - 1, last - 1)],
                h[(last - 1, last)],
                h[(last, last - 1)],
                h[(last, last)],
            )
        };
        for i in lo..=last {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(last - lo);
        for k in lo..last {
            let (cs, sn) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=last {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * cs + sn * b;
                h[(k + 1, j)] = -sn.conj() * a + b * cs;
            }
            rots.push((cs, sn));
        }
        for (idx, k) in (lo..last).enumerate() {
            let (cs, sn) = rots[idx];
            for i in lo..=(k + 1).min(last) {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * cs + b * sn.conj();
                h[(i, k + 1)] = -a * sn + b * cs;
            }
        }
        for i in lo..=last {
            h[(i, i)] += mu;
        }
    }
    Ok(vals)
}

/// Single-linkage grouping of `values` at the given radius. Returns index
/// groups in order of first appearance.
pub(crate) fn link_groups(values: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_slot[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

fn centroid(values: &[C64], idx: &[usize]) -> C64 {
    idx.iter().map(|&i| values[i]).sum::<C64>() / idx.len() as f64
}

/// Dimension of the left generalized eigenspace of `m` at `mu`, explored
/// level by level up to `limit` and decided with `rank_rel`.
pub(crate) fn generalized_eigenspace_dim(
    m: &CMatrix,
    mu: C64,
    limit: usize,
    tol: &Tolerance,
) -> usize {
    let n = m.nrows();
    let scale = fro(m).max(mu.norm()).max(f64::MIN_POSITIVE);
    let shifted = (m - CMatrix::identity(n, n) * mu) / C64::new(scale, 0.0);
    let mut basis = left_null_space(&shifted, tol.rank_rel);
    let mut dim = basis.nrows();
    while dim > 0 && dim < limit {
        // rows v with v N in span(basis): [v, -c] [N; basis] = 0
        let mut stacked = CMatrix::zeros(n + basis.nrows(), n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&shifted);
        stacked
            .view_mut((n, 0), (basis.nrows(), n))
            .copy_from(&basis);
        let ns = left_null_space(&stacked, tol.rank_rel);
        let proj = ns.columns(0, n).into_owned();
        let next = super::orth_rows(&proj, 1.0, tol);
        if next.nrows() <= dim {
            break;
        }
        basis = next;
        dim = basis.nrows();
    }
    dim
}

/// Groups raw eigenvalues into distinct clusters: first by the clustering
/// radius, then by merging wider groups only when the generalized
/// eigenspace at the merged centroid has the full merged dimension (the
/// signature of a defective eigenvalue split by rounding).
pub(crate) fn cluster_spectrum(m: &CMatrix, raw: &[C64], tol: &Tolerance) -> Vec<(C64, usize)> {
    let rho = super::spectral_radius(raw);
    let r0 = tol.cluster_radius(rho);
    let mut groups = link_groups(raw, r0);
    let limit = 0.1 * (1.0 + rho);
    let mut radius = 2.0 * r0;
    while radius <= limit && groups.len() > 1 {
        // owner[i] = current group of raw index i
        let mut owner = vec![0usize; raw.len()];
        for (g, members) in groups.iter().enumerate() {
            for &i in members {
                owner[i] = g;
            }
        }
        let candidates = link_groups(raw, radius);
        let mut merged_any = false;
        let mut absorbed = vec![false; groups.len()];
        let mut new_groups: Vec<Vec<usize>> = Vec::new();
        for cand in candidates {
            let mut parts: Vec<usize> = cand.iter().map(|&i| owner[i]).collect();
            parts.sort_unstable();
            parts.dedup();
            if parts.len() < 2 {
                continue;
            }
            let mu = centroid(raw, &cand);
            if generalized_eigenspace_dim(m, mu, cand.len(), tol) >= cand.len() {
                for p in parts {
                    absorbed[p] = true;
                }
                new_groups.push(cand);
                merged_any = true;
            }
        }
        if merged_any {
            for (g, members) in groups.into_iter().enumerate() {
                if !absorbed[g] {
                    new_groups.push(members);
                }
            }
            groups = new_groups;
        }
        radius *= 2.0;
    }
    let mut out: Vec<(C64, usize)> = groups
        .iter()
        .map(|g| (centroid(raw, g), g.len()))
        .collect();
    sort_spectrum(&mut out, |x| x.0);
    out
}

/// Canonical ordering: descending modulus, ties broken by ascending
/// argument in (-pi, pi].
pub(crate) fn spectral_order(a: C64, b: C64) -> Ordering {
    let key = |z: C64| {
        let m = (z.norm() * 1e9).round();
        let mut arg = z.arg();
        if z.im.abs() <= 1e-12 * (1.0 + z.norm()) {
            arg = if z.re < 0.0 { std::f64::consts::PI } else { 0.0 };
        }
        (m, (arg * 1e9).round())
    };
    let (ma, aa) = key(a);
    let (mb, ab) = key(b);
    mb.total_cmp(&ma).then(aa.total_cmp(&ab))
}

pub(crate) fn sort_spectrum<T>(items: &mut [T], value: impl Fn(&T) -> C64) {
    items.sort_by(|x, y| spectral_order(value(x), value(y)));
}

/// Rows spanning the approximate left null space of `shifted`: those with
/// singular value below `cutoff`, at least one and at most `max_rows`.
fn left_eigvecs(shifted: &CMatrix, cutoff: f64, max_rows: usize) -> CMatrix {
    let n = shifted.nrows();
    let x = shifted.adjoint();
    let dec = super::svd::svd(&x);
    let vt = dec.v_t;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.singular_values[a].total_cmp(&dec.singular_values[b]));
    let null = order
        .iter()
        .filter(|&&i| dec.singular_values[i] <= cutoff)
        .count()
        .clamp(1, max_rows.max(1));
    let mut out = CMatrix::zeros(null, n);
    for (r, &i) in order.iter().take(null).enumerate() {
        out.row_mut(r).copy_from(&vt.row(i));
    }
    out
}

/// Distinct eigenvalues of `m` (clustered) with their left eigenspaces.
pub fn eig_left(m: &CMatrix, tol: &Tolerance) -> Result<Vec<EigenCluster>> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let raw = eigenvalues(m)?;
    let clusters = cluster_spectrum(m, &raw, tol);
    let cutoff = tol.rank_rel * fro(m);
    Ok(clusters
        .into_iter()
        .map(|(value, multiplicity)| {
            let shifted = m - CMatrix::identity(n, n) * value;
            EigenCluster {
                value,
                multiplicity,
                left_vectors: left_eigvecs(&shifted, cutoff, multiplicity),
            }
        })
        .collect())
}
