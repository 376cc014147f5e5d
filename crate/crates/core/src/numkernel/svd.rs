//! One-sided Jacobi singular value decomposition for complex matrices.

use super::{CMatrix, C64};

const MAX_SWEEPS: usize = 80;

/// `m = u * diag(singular_values) * v_t`, with `k = min(rows, cols)`
/// singular values in descending order. Columns of `u` belonging to zero
/// singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v_t: CMatrix,
}

pub fn svd(m: &CMatrix) -> Svd {
    if m.nrows() < m.ncols() {
        let t = tall_svd(&m.adjoint());
        return Svd {
            u: t.v_t.adjoint(),
            singular_values: t.singular_values,
            v_t: t.u.adjoint(),
        };
    }
    tall_svd(m)
}

fn tall_svd(m: &CMatrix) -> Svd {
    let n = m.ncols();
    let mut a = m.clone();
    let mut v = CMatrix::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, a.column(j).norm())).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));
    let mut u = CMatrix::zeros(m.nrows(), n);
    let mut v_t = CMatrix::zeros(n, n);
    let mut sv = Vec::with_capacity(n);
    for (k, &(j, s)) in order.iter().enumerate() {
        if s > 0.0 {
            u.set_column(k, &(a.column(j) / C64::new(s, 0.0)));
        }
        v_t.set_row(k, &v.column(j).adjoint());
        sv.push(s);
    }
    Svd {
        u,
        singular_values: sv,
        v_t,
    }
}

/// `[x_p, x_q] <- [x_p, x_q] * [[c, s], [-s conj(phase), c conj(phase)]]`.
fn rotate(x: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let back = phase.conj();
    for i in 0..x.nrows() {
        let xp = x[(i, p)];
        let xq = x[(i, q)] * back;
        x[(i, p)] = xp * c - xq * s;
        x[(i, q)] = xp * s + xq * c;
    }
}
