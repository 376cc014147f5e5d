use crate::error::{Error, Result};
use crate::numkernel::eig::{cluster_spectrum, link_groups, sort_spectrum};
use crate::numkernel::{
    eig_left, eigenvalues, fro, kron, left_null_space, orth_rows, rank_tol, spectral_radius,
    CMatrix, EigenCluster, Tolerance, C64,
};
use crate::spectral::{chain_basis, jordan_structure, JordanChain, JordanStructure};
use crate::sysmodel::{NetworkTopology, SampledSystem};

/// Relative cutoff for counting the left eigenspace of the sampled state
/// matrix directly; looser than rank decisions because the eigenvalue used
/// is itself a cluster centroid.
pub(crate) const EIGENSPACE_REL: f64 = 1e-6;

/// `E = e^{Ah} + lambda H(h)` for one eigenvalue of the topology matrix.
#[derive(Debug, Clone)]
pub struct Subsystem {
    pub lambda: C64,
    pub e: CMatrix,
    /// Left Jordan chains of `W` at `lambda`.
    pub w_chains: Vec<JordanChain>,
    /// Eigenvalues of `E` with their left eigenspaces.
    pub spectrum: Vec<EigenCluster>,
}

impl Subsystem {
    pub fn algebraic_multiplicity(&self) -> usize {
        self.w_chains.iter().map(JordanChain::len).sum()
    }

    pub fn longest_w_chain(&self) -> usize {
        self.w_chains.iter().map(JordanChain::len).max().unwrap_or(1)
    }
}

/// An eigenvalue of the sampled state matrix together with the subsystem
/// eigenvalues that realise it.
#[derive(Debug, Clone)]
pub struct SharedEigenvalue {
    pub value: C64,
    /// `(entry index, spectrum index)` pairs.
    pub members: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct SubsystemFamily {
    pub entries: Vec<Subsystem>,
    pub jordan: JordanStructure,
    pub sampled: SampledSystem,
    pub topo: NetworkTopology,
    /// Clustering radius used for all eigenvalue identifications.
    pub radius: f64,
    /// Largest deviation between the direct spectrum of the sampled state
    /// matrix and the union of subsystem spectra, relative to `1 + rho`.
    pub union_deviation: f64,
}

impl SubsystemFamily {
    pub fn nodes(&self) -> usize {
        self.topo.nodes()
    }

    pub fn n(&self) -> usize {
        self.sampled.e_ah.nrows()
    }

    pub fn shared_eigenvalues(&self) -> Vec<SharedEigenvalue> {
        let mut values = Vec::new();
        let mut index = Vec::new();
        for (i, entry) in self.entries.iter().enumerate() {
            for (j, c) in entry.spectrum.iter().enumerate() {
                values.push(c.value);
                index.push((i, j));
            }
        }
        let mut out: Vec<SharedEigenvalue> = link_groups(&values, self.radius)
            .into_iter()
            .map(|g| SharedEigenvalue {
                value: g.iter().map(|&k| values[k]).sum::<C64>() / g.len() as f64,
                members: g.iter().map(|&k| index[k]).collect(),
            })
            .collect();
        sort_spectrum(&mut out, |s| s.value);
        out
    }

    /// True when no subsystem (equivalently the sampled state matrix) has a
    /// zero eigenvalue.
    pub fn is_nonsingular(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.spectrum.iter().all(|c| c.value.norm() > self.radius))
    }

    pub fn topology_is_singular(&self) -> bool {
        let rho = spectral_radius(&self.entries.iter().map(|e| e.lambda).collect::<Vec<_>>());
        let r = self.radius.min(1e-7 * (1.0 + rho)).max(1e-12 * (1.0 + rho));
        self.entries.iter().any(|e| e.lambda.norm() <= r)
    }
}

/// Splits the sampled system into one subsystem per eigenvalue of `W`.
pub fn decompose(ss: &SampledSystem, topo: &NetworkTopology, tol: &Tolerance) -> Result<SubsystemFamily> {
    let n = ss.e_ah.nrows();
    if ss.phi_s.nrows() != topo.nodes() * n {
        return Err(Error::DimensionMismatch(
            "sampled system does not match topology".into(),
        ));
    }
    let jordan = jordan_structure(&topo.w, tol)?;
    let mut entries = Vec::with_capacity(jordan.blocks.len());
    for group in &jordan.blocks {
        let e = &ss.e_ah + &ss.hh * group.eigenvalue;
        let spectrum = eig_left(&e, tol)?;
        entries.push(Subsystem {
            lambda: group.eigenvalue,
            e,
            w_chains: group.chains.clone(),
            spectrum,
        });
    }
    let rho = entries
        .iter()
        .flat_map(|e| e.spectrum.iter().map(|c| c.value.norm()))
        .fold(0.0, f64::max);
    let radius = tol.cluster_radius(rho);

    let raw = eigenvalues(&ss.phi_s)?;
    let direct = cluster_spectrum(&ss.phi_s, &raw, tol);
    let mut expected: Vec<C64> = Vec::new();
    for entry in &entries {
        let alg = entry.algebraic_multiplicity();
        for c in &entry.spectrum {
            expected.extend(std::iter::repeat_n(c.value, c.multiplicity * alg));
        }
    }
    let mut found: Vec<C64> = Vec::new();
    for (v, m) in direct {
        found.extend(std::iter::repeat_n(v, m));
    }
    let union_deviation = multiset_deviation(&found, &expected) / (1.0 + rho);

    Ok(SubsystemFamily {
        entries,
        jordan,
        sampled: ss.clone(),
        topo: topo.clone(),
        radius,
        union_deviation,
    })
}

/// Greedy nearest matching distance between two multisets (infinite when
/// their sizes differ).
pub(crate) fn multiset_deviation(a: &[C64], b: &[C64]) -> f64 {
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
            .expect("sizes match");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Provenance of one eigenspace vector: which chain of `W` was combined
/// with which generalized chain of `E`, and at which order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenspaceTerm {
    pub lambda: C64,
    pub theta: C64,
    pub w_chain: usize,
    pub xi_chain: usize,
    pub order: usize,
    pub beta: usize,
}

#[derive(Debug, Clone)]
pub struct EigenspaceBasis {
    pub theta: C64,
    pub basis: Vec<CMatrix>,
    pub construction: Vec<EigenspaceTerm>,
    /// Dimension of the left eigenspace found directly from the sampled
    /// state matrix.
    pub expected_dim: usize,
    /// Largest eigen-equation residual, relative to `||Phi_s|| ||eta||`.
    pub max_residual: f64,
    pub independent: bool,
}

impl EigenspaceBasis {
    pub fn stacked(&self) -> CMatrix {
        let cols = self.basis.first().map_or(0, CMatrix::ncols);
        let mut m = CMatrix::zeros(self.basis.len(), cols);
        for (r, v) in self.basis.iter().enumerate() {
            m.row_mut(r).copy_from(&v.row(0));
        }
        m
    }

    pub fn is_complete(&self) -> bool {
        self.independent && self.basis.len() == self.expected_dim
    }
}

/// Left eigenspace of the sampled state matrix at `theta`, assembled from
/// Jordan chains of `W` and generalized chains of the matching subsystems.
pub fn eigenspace_phis(fam: &SubsystemFamily, theta: C64, tol: &Tolerance) -> Result<EigenspaceBasis> {
    let ss = &fam.sampled;
    let mut basis = Vec::new();
    let mut construction = Vec::new();
    let mut matched = Vec::new();
    for entry in &fam.entries {
        let cap = entry.longest_w_chain();
        for c in entry.spectrum.iter().filter(|c| (c.value - theta).norm() <= fam.radius) {
            matched.push(c.value);
            let xi_chains = chain_basis(&entry.e, &ss.hh, c.value, cap, tol)?;
            for (a, v) in entry.w_chains.iter().enumerate() {
                for (b, xi) in xi_chains.iter().enumerate() {
                    let beta = v.len().min(xi.len());
                    for m in 1..=beta {
                        let mut eta = CMatrix::zeros(1, fam.nodes() * fam.n());
                        for k in 1..=m {
                            eta += kron(&v.vectors[k - 1], &xi.vectors[m - k]);
                        }
                        basis.push(eta);
                        construction.push(EigenspaceTerm {
                            lambda: entry.lambda,
                            theta: c.value,
                            w_chain: a,
                            xi_chain: b,
                            order: m,
                            beta,
                        });
                    }
                }
            }
        }
    }
    if matched.is_empty() {
        return Err(Error::UnknownEigenvalue(crate::analyzer::report::fmt_complex(theta)));
    }
    let centre = matched.iter().sum::<C64>() / matched.len() as f64;
    let phi = &ss.phi_s;
    let scale = fro(phi).max(f64::MIN_POSITIVE);
    let nn = phi.nrows();
    let expected_dim = left_null_space(
        &(phi - CMatrix::identity(nn, nn) * centre),
        tol.rank_rel.max(EIGENSPACE_REL) * scale,
    )
    .nrows();
    let mut max_residual: f64 = 0.0;
    for (eta, term) in basis.iter().zip(&construction) {
        let r = fro(&(eta * phi - eta * term.theta)) / (scale * fro(eta).max(f64::MIN_POSITIVE));
        max_residual = max_residual.max(r);
    }
    let out = EigenspaceBasis {
        theta: centre,
        basis,
        construction,
        expected_dim,
        max_residual,
        independent: true,
    };
    let stacked = out.stacked();
    let independent = rank_tol(&stacked, tol) == out.basis.len()
        && orth_rows(&stacked, 0.0, tol).nrows() == out.basis.len();
    Ok(EigenspaceBasis { independent, ..out })
}
