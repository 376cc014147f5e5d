//! Shared generators and reference computations for integration tests.
#![allow(dead_code)]

use netctrl::numkernel::{eigenvalues, CMatrix, Tolerance, C64};
use netctrl::spectral::jordan_structure;
use netctrl::sysmodel::{discretize, NetworkTopology, NetworkedSystem, NodeDynamics};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int_matrix(rng: &mut TestRng, r: usize, c: usize, lo: i32, hi: i32) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| C64::new(rng.gen_range(lo..=hi) as f64, 0.0))
}

pub fn random_matrix(rng: &mut TestRng, r: usize, c: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| C64::new(rng.gen_range(-scale..scale), 0.0))
}

/// Topology with zero diagonal and integer weights in `[-2, 2]`.
pub fn int_topology(rng: &mut TestRng, nodes: usize) -> CMatrix {
    let mut w = int_matrix(rng, nodes, nodes, -2, 2);
    for i in 0..nodes {
        w[(i, i)] = C64::new(0.0, 0.0);
    }
    w
}

pub fn random_delta(rng: &mut TestRng, nodes: usize) -> Vec<u8> {
    (0..nodes).map(|_| rng.gen_range(0..=1)).collect()
}

pub fn system(a: CMatrix, b: CMatrix, c: CMatrix, h_in: CMatrix, w: CMatrix, delta: Vec<u8>, h: f64) -> NetworkedSystem {
    let node = NodeDynamics::new(a, b, c, h_in).expect("valid node");
    let topo = NetworkTopology::new(w, delta).expect("valid topology");
    NetworkedSystem::new(node, topo, h).expect("valid system")
}

/// Random network with integer entries in `[-2, 2]` for every matrix.
pub fn integer_system(rng: &mut TestRng) -> NetworkedSystem {
    let nodes = rng.gen_range(2..=4);
    let n = rng.gen_range(1..=3);
    let p = rng.gen_range(1..=n);
    let hs = [0.1, 0.5, 1.0];
    let h = hs[rng.gen_range(0..hs.len())];
    system(
        int_matrix(rng, n, n, -2, 2),
        int_matrix(rng, n, p, -2, 2),
        int_matrix(rng, n, n, -2, 2),
        int_matrix(rng, n, n, -2, 2),
        int_topology(rng, nodes),
        random_delta(rng, nodes),
        h,
    )
}

pub fn phi_nonsingular(sys: &NetworkedSystem) -> bool {
    let ss = discretize(sys).expect("discretize");
    let theta = eigenvalues(&ss.phi_s).expect("eigenvalues");
    let rho = theta.iter().map(|z| z.norm()).fold(0.0, f64::max);
    theta.iter().all(|z| z.norm() > 1e-6 * (1.0 + rho))
}

pub fn topology_diagonalizable(w: &CMatrix) -> bool {
    jordan_structure(w, &Tolerance::default()).is_ok_and(|j| j.is_diagonalizable())
}

/// Draws systems until `count` satisfy `keep`.
pub fn population<F>(seed: u64, count: usize, mut draw: impl FnMut(&mut TestRng) -> NetworkedSystem, keep: F) -> Vec<NetworkedSystem>
where
    F: Fn(&NetworkedSystem) -> bool,
{
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        assert!(tries < 200 * count, "population filter too strict");
        let sys = draw(&mut r);
        if keep(&sys) {
            out.push(sys);
        }
    }
    out
}

/// Rank of the explicit Kalman matrix `[psi, phi psi, ..., phi^{d-1} psi]`
/// after scaling each block to unit norm.
pub fn kalman_matrix_rank(phi: &CMatrix, psi: &CMatrix, rel: f64) -> usize {
    let d = phi.nrows();
    let p = psi.ncols();
    let mut k = CMatrix::zeros(d, d * p);
    let mut block = psi.clone();
    for i in 0..d {
        let norm = block.norm();
        let scaled = if norm > 0.0 { &block / C64::new(norm, 0.0) } else { block.clone() };
        k.view_mut((0, i * p), (d, p)).copy_from(&scaled);
        block = phi * block;
    }
    let sv = netctrl::numkernel::singular_values(&k);
    let top = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > rel * top.max(1e-300)).count()
}

/// Greedy nearest matching distance between two multisets.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn close(m: &CMatrix, rows: &[&[f64]], tol: f64) -> bool {
    rows.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, &x)| (m[(i, j)] - C64::new(x, 0.0)).norm() <= tol)
    })
}
