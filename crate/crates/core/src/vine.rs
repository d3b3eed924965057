//! D-vine structure bookkeeping: trees, edges, conditioning sets, and
//! per-edge Kendall tau values.
//!
//! Only the structure and the tau values are carried; full vine densities and
//! vine sampling are out of scope. The partial characterization is exactly
//! what the retention diagnostic consumes.

use crate::copula::CopulaFamily;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One edge of a D-vine: the conditioned pair `(first, second)` given the
/// variables in `conditioning` (indices are 0-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VineEdge {
    pub first: usize,
    pub second: usize,
    pub conditioning: Vec<usize>,
    /// Kendall's tau assigned to this edge, strictly inside (-1, 1).
    pub tau: f64,
    /// Optional bivariate family tag for the edge copula.
    pub family: Option<CopulaFamily>,
}

impl VineEdge {
    /// Tree index (1-based): edges of tree `j` condition on `j - 1` variables.
    pub fn tree(&self) -> usize {
        self.conditioning.len() + 1
    }

    /// Human-readable label with 1-based indices, e.g. `1,3|2`.
    pub fn label(&self) -> String {
        if self.conditioning.is_empty() {
            format!("{},{}|∅", self.first + 1, self.second + 1)
        } else {
            let cond: Vec<String> =
                self.conditioning.iter().map(|i| (i + 1).to_string()).collect();
            format!("{},{}|{}", self.first + 1, self.second + 1, cond.join(","))
        }
    }
}

/// A D-vine on `dim` variables carrying per-edge Kendall tau values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DVine {
    dim: usize,
    edges: Vec<VineEdge>,
}

/// Canonical D-vine edge order: tree `j` joins variables `i` and `i + j`
/// conditioning on the variables strictly between them, for `i = 1..d-j`.
pub fn enumerate_dvine_edges(dim: usize) -> Result<Vec<VineEdge>> {
    if dim < 2 {
        return Err(Error::argument(format!("a D-vine needs at least 2 variables, got {dim}")));
    }
    let mut edges = Vec::with_capacity(dim * (dim - 1) / 2);
    for tree in 1..dim {
        for i in 0..(dim - tree) {
            edges.push(VineEdge {
                first: i,
                second: i + tree,
                conditioning: ((i + 1)..(i + tree)).collect(),
                tau: 0.0,
                family: None,
            });
        }
    }
    Ok(edges)
}

impl DVine {
    /// Vine with all-zero edge taus.
    pub fn independent(dim: usize) -> Result<Self> {
        Ok(DVine { dim, edges: enumerate_dvine_edges(dim)? })
    }

    /// Vine with taus assigned in canonical edge order.
    pub fn with_taus(dim: usize, taus: &[f64]) -> Result<Self> {
        let mut edges = enumerate_dvine_edges(dim)?;
        if taus.len() != edges.len() {
            return Err(Error::argument(format!(
                "expected {} edge taus for dim {dim}, got {}",
                edges.len(),
                taus.len()
            )));
        }
        for (edge, &tau) in edges.iter_mut().zip(taus) {
            if !(tau > -1.0 && tau < 1.0) {
                return Err(Error::parameter(format!(
                    "edge tau must lie strictly inside (-1,1), got {tau} for {}",
                    edge.label()
                )));
            }
            edge.tau = tau;
        }
        Ok(DVine { dim, edges })
    }

    /// Bivariate vine with a single unconditional edge.
    pub fn bivariate(tau: f64) -> Result<Self> {
        Self::with_taus(2, &[tau])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[VineEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}
