//! Networked system description, assembly of the continuous and sampled
//! composite matrices, JSON ingestion and the reference fixtures.

pub mod fixtures;
mod input;

pub use input::{parse_document, parse_system, serialize_document, InputDocument, Model, ParseOptions};

use crate::error::{Error, Result};
use crate::numkernel::{expm_with_integral, kron, max_abs_diff, CMatrix, C64};

const REAL_EPS: f64 = 1e-14;

fn ensure_real(m: &CMatrix, name: &str) -> Result<()> {
    if m.iter().all(|z| z.im.abs() <= REAL_EPS && z.re.is_finite()) {
        Ok(())
    } else {
        Err(Error::validation(name, "entries must be finite and real"))
    }
}

/// Identical node dynamics `x' = A x + H (sum of neighbour outputs) + B u`, `y = C x`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDynamics {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    /// Inner coupling `H` mapping neighbour outputs into the state.
    pub coupling: CMatrix,
}

impl NodeDynamics {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, coupling: CMatrix) -> Result<Self> {
        let node = NodeDynamics { a, b, c, coupling };
        node.validate()?;
        Ok(node)
    }

    pub fn validate(&self) -> Result<()> {
        for (m, name) in [(&self.a, "A"), (&self.b, "B"), (&self.c, "C"), (&self.coupling, "H")] {
            ensure_real(m, name)?;
        }
        let n = self.a.nrows();
        if n == 0 || self.a.ncols() != n {
            return Err(Error::validation("A", "must be a non-empty square matrix"));
        }
        if self.b.nrows() != n || self.b.ncols() == 0 {
            return Err(Error::validation("B", format!("must have {n} rows")));
        }
        if self.c.ncols() != n || self.c.nrows() == 0 {
            return Err(Error::validation("C", format!("must have {n} columns")));
        }
        if self.coupling.shape() != (n, self.c.nrows()) {
            return Err(Error::validation(
                "H",
                format!("must be {n}x{}", self.c.nrows()),
            ));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn p(&self) -> usize {
        self.b.ncols()
    }

    pub fn m(&self) -> usize {
        self.c.nrows()
    }

    /// The product `H C`.
    pub fn hc(&self) -> CMatrix {
        &self.coupling * &self.c
    }
}

/// Weighted topology `W` (zero diagonal) and the controlled-node indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    pub w: CMatrix,
    pub delta: Vec<u8>,
}

impl NetworkTopology {
    pub fn new(w: CMatrix, delta: Vec<u8>) -> Result<Self> {
        let topo = NetworkTopology { w, delta };
        topo.validate()?;
        Ok(topo)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_real(&self.w, "W")?;
        let n = self.w.nrows();
        if n == 0 || self.w.ncols() != n {
            return Err(Error::validation("W", "must be a non-empty square matrix"));
        }
        for i in 0..n {
            if self.w[(i, i)].norm() != 0.0 {
                return Err(Error::validation(format!("W[{i}][{i}]"), "w_ii must be 0"));
            }
        }
        if self.delta.len() != n {
            return Err(Error::validation("delta", format!("must have {n} entries")));
        }
        if let Some(i) = self.delta.iter().position(|&d| d > 1) {
            return Err(Error::validation(format!("delta[{i}]"), "must be 0 or 1"));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.w.nrows()
    }

    /// `diag(delta)`.
    pub fn delta_matrix(&self) -> CMatrix {
        let n = self.nodes();
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.delta[i] as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkedSystem {
    pub node: NodeDynamics,
    pub topo: NetworkTopology,
    /// Sampling period in seconds.
    pub h: f64,
}

impl NetworkedSystem {
    pub fn new(node: NodeDynamics, topo: NetworkTopology, h: f64) -> Result<Self> {
        let sys = NetworkedSystem { node, topo, h };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        self.node.validate()?;
        self.topo.validate()?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::NonPositivePeriod(self.h));
        }
        Ok(())
    }

    pub fn with_period(&self, h: f64) -> Result<Self> {
        let mut out = self.clone();
        out.h = h;
        out.validate()?;
        Ok(out)
    }

    /// Total state dimension `N n`.
    pub fn state_dim(&self) -> usize {
        self.topo.nodes() * self.node.n()
    }
}

/// Zero-order-hold discretization of a networked system.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSystem {
    pub phi_s: CMatrix,
    pub psi_s: CMatrix,
    pub e_ah: CMatrix,
    /// `H(h) = int_0^h e^{A t} dt H C`.
    pub hh: CMatrix,
    /// `B(h) = int_0^h e^{A t} dt B`.
    pub bh: CMatrix,
    pub h: f64,
}

impl SampledSystem {
    /// Largest deviation between the stored composite matrices and the ones
    /// rebuilt from the stored blocks.
    pub fn rebuild_error(&self, topo: &NetworkTopology) -> f64 {
        let (phi, psi) = compose(topo, &self.e_ah, &self.hh, &self.bh);
        max_abs_diff(&phi, &self.phi_s).max(max_abs_diff(&psi, &self.psi_s))
    }
}

/// `(I (x) E + W (x) Hh, Delta (x) Bh)`.
pub(crate) fn compose(
    topo: &NetworkTopology,
    e: &CMatrix,
    hh: &CMatrix,
    bh: &CMatrix,
) -> (CMatrix, CMatrix) {
    let nodes = topo.nodes();
    let phi = kron(&CMatrix::identity(nodes, nodes), e) + kron(&topo.w, hh);
    let psi = kron(&topo.delta_matrix(), bh);
    (phi, psi)
}

/// Continuous-time composite pair `(I (x) A + W (x) HC, Delta (x) B)`.
pub fn assemble_continuous(sys: &NetworkedSystem) -> Result<(CMatrix, CMatrix)> {
    sys.node.validate()?;
    sys.topo.validate()?;
    Ok(compose(&sys.topo, &sys.node.a, &sys.node.hc(), &sys.node.b))
}

/// `(e^{Ah}, H(h), B(h))` for period `h`.
pub fn sampled_blocks(node: &NodeDynamics, h: f64) -> Result<(CMatrix, CMatrix, CMatrix)> {
    node.validate()?;
    let (e_ah, integral) = expm_with_integral(&node.a, h)?;
    let hh = &integral * node.hc();
    let bh = &integral * &node.b;
    Ok((e_ah, hh, bh))
}

pub fn discretize(sys: &NetworkedSystem) -> Result<SampledSystem> {
    sys.validate()?;
    let (e_ah, hh, bh) = sampled_blocks(&sys.node, sys.h)?;
    let (phi_s, psi_s) = compose(&sys.topo, &e_ah, &hh, &bh);
    Ok(SampledSystem {
        phi_s,
        psi_s,
        e_ah,
        hh,
        bh,
        h: sys.h,
    })
}
