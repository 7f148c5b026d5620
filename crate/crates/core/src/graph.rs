//! Directed weighted graphs in the column convention, absorption rates, and
//! absorption-scaled graphs.
//!
//! Entry `a[(i, j)]` of an adjacency matrix is the weight of the edge from
//! node `j` to node `i`, so out-degrees are column sums and every transition
//! matrix built from a graph is column-stochastic.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    adjacency: DMatrix<f64>,
    out_degrees: DVector<f64>,
}

impl WeightedDigraph {
    /// Builds a graph from a column-convention adjacency matrix. Self-edges
    /// (non-zero diagonal entries) are rejected.
    pub fn from_adjacency(adjacency: DMatrix<f64>) -> Result<Self> {
        Self::validate(&adjacency, false)?;
        Ok(Self::new_unchecked(adjacency))
    }

    /// Like [`from_adjacency`](Self::from_adjacency) but keeps self-edges.
    /// Used for graphs derived from transition matrices.
    pub(crate) fn with_self_edges(adjacency: DMatrix<f64>) -> Result<Self> {
        Self::validate(&adjacency, true)?;
        Ok(Self::new_unchecked(adjacency))
    }

    fn new_unchecked(adjacency: DMatrix<f64>) -> Self {
        let out_degrees = linalg::col_sums(&adjacency);
        Self {
            adjacency,
            out_degrees,
        }
    }

    fn validate(a: &DMatrix<f64>, allow_self: bool) -> Result<()> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        if a.nrows() == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        for ((i, j), &w) in a.iter().enumerate().map(|(k, w)| ((k % a.nrows(), k / a.nrows()), w)) {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {j}->{i} has invalid weight {w}"
                )));
            }
            if !allow_self && i == j && w != 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "self-edge at node {i} (ingested graphs must have a zero diagonal)"
                )));
            }
        }
        Ok(())
    }

    /// Builds a graph with `n` nodes from directed `(src, dst, weight)` edges.
    /// Repeated edges accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut a = DMatrix::zeros(n, n);
        for &(src, dst, w) in edges {
            if src >= n || dst >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {src}->{dst} out of range for {n} nodes"
                )));
            }
            a[(dst, src)] += w;
        }
        Self::from_adjacency(a)
    }

    /// Builds a graph in which every `(u, v, w)` pair is added in both directions.
    pub fn from_undirected_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let directed: Vec<_> = edges
            .iter()
            .flat_map(|&(u, v, w)| [(u, v, w), (v, u, w)])
            .collect();
        Self::from_edges(n, &directed)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Column sums `ω_j = Σ_i a_ij`.
    pub fn out_degrees(&self) -> &DVector<f64> {
        &self.out_degrees
    }

    pub fn weight(&self, src: usize, dst: usize) -> f64 {
        self.adjacency[(dst, src)]
    }

    /// Successors of `node` (targets of its out-edges).
    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency
            .column(node)
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
            .into_iter()
    }

    /// Unnormalized Laplacian `W - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        linalg::diag(&self.out_degrees) - &self.adjacency
    }

    /// The random-walk transition matrix `A W^-1`.
    pub fn random_walk_matrix(&self) -> Result<DMatrix<f64>> {
        self.require_no_dangling()?;
        Ok(linalg::scale_columns_inv(&self.adjacency, &self.out_degrees))
    }

    pub fn require_no_dangling(&self) -> Result<()> {
        match self.out_degrees.iter().position(|&w| w <= 0.0) {
            Some(j) => Err(Error::DanglingNode(j)),
            None => Ok(()),
        }
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n();
        let forward = reachable(n, 0, |j, i| self.adjacency[(i, j)] > 0.0);
        let backward = reachable(n, 0, |j, i| self.adjacency[(j, i)] > 0.0);
        forward.iter().all(|&r| r) && backward.iter().all(|&r| r)
    }
}

fn reachable(n: usize, start: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(j) = queue.pop_front() {
        for i in 0..n {
            if !seen[i] && edge(j, i) {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen
}

/// Node-absorption rates `δ` together with the diagonal scaling `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionConfig {
    delta: DVector<f64>,
    h: DVector<f64>,
}

impl AbsorptionConfig {
    pub fn new(delta: DVector<f64>, h: DVector<f64>) -> Result<Self> {
        if delta.len() != h.len() {
            return Err(Error::DimensionMismatch {
                expected: delta.len(),
                found: h.len(),
            });
        }
        if let Some(i) = delta.iter().position(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidAbsorption(format!(
                "node-absorption rate of node {i} must be strictly positive, got {}",
                delta[i]
            )));
        }
        if let Some(i) = h.iter().position(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidAbsorption(format!(
                "scaling h of node {i} must be non-negative, got {}",
                h[i]
            )));
        }
        Ok(Self { delta, h })
    }

    /// `H = 0`.
    pub fn unscaled(delta: DVector<f64>) -> Result<Self> {
        let n = delta.len();
        Self::new(delta, DVector::zeros(n))
    }

    /// `H = h I`.
    pub fn uniform_h(delta: DVector<f64>, h: f64) -> Result<Self> {
        let n = delta.len();
        Self::new(delta, DVector::from_element(n, h))
    }

    pub fn from_slices(delta: &[f64], h: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(delta), DVector::from_column_slice(h))
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn h(&self) -> &DVector<f64> {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.delta.len()
    }

    fn check_dims(&self, g: &WeightedDigraph) -> Result<()> {
        if self.n() != g.n() {
            return Err(Error::DimensionMismatch {
                expected: g.n(),
                found: self.n(),
            });
        }
        Ok(())
    }
}

/// The diagonal of `HW + D_δ`; every entry is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledRateVector(DVector<f64>);

impl ScaledRateVector {
    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }
}

pub fn out_degrees(g: &WeightedDigraph) -> DVector<f64> {
    g.out_degrees().clone()
}

/// `(d_s)_i = h_i ω_i + δ_i`.
pub fn scaled_rate_vector(g: &WeightedDigraph, cfg: &AbsorptionConfig) -> Result<ScaledRateVector> {
    cfg.check_dims(g)?;
    let d = cfg.h.component_mul(g.out_degrees()) + &cfg.delta;
    Ok(ScaledRateVector(d))
}

/// `L̃(D_δ, H) = (W - A)(HW + D_δ)^-1`.
pub fn scaled_laplacian(g: &WeightedDigraph, cfg: &AbsorptionConfig) -> Result<DMatrix<f64>> {
    let d = scaled_rate_vector(g, cfg)?;
    Ok(linalg::scale_columns_inv(&g.laplacian(), d.as_vector()))
}

/// Graph with adjacency `Ã = A D^-1` for a positive absorption-rate vector `d`.
#[derive(Debug, Clone)]
pub struct AbsorptionScaledGraph {
    base: WeightedDigraph,
    rates: DVector<f64>,
    scaled: WeightedDigraph,
}

impl AbsorptionScaledGraph {
    pub fn new(base: &WeightedDigraph, rates: &DVector<f64>) -> Result<Self> {
        if rates.len() != base.n() {
            return Err(Error::DimensionMismatch {
                expected: base.n(),
                found: rates.len(),
            });
        }
        if let Some(i) = rates.iter().position(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidAbsorption(format!(
                "absorption rate of node {i} must be strictly positive, got {}",
                rates[i]
            )));
        }
        let scaled = WeightedDigraph::with_self_edges(linalg::scale_columns_inv(
            base.adjacency(),
            rates,
        ))?;
        Ok(Self {
            base: base.clone(),
            rates: rates.clone(),
            scaled,
        })
    }

    pub fn from_config(base: &WeightedDigraph, cfg: &AbsorptionConfig) -> Result<Self> {
        let d = scaled_rate_vector(base, cfg)?;
        Self::new(base, d.as_vector())
    }

    pub fn base(&self) -> &WeightedDigraph {
        &self.base
    }

    pub fn rates(&self) -> &DVector<f64> {
        &self.rates
    }

    /// The scaled graph itself; its Laplacian is `(W - A) D^-1`.
    pub fn graph(&self) -> &WeightedDigraph {
        &self.scaled
    }

    pub fn scaled_adjacency(&self) -> &DMatrix<f64> {
        self.scaled.adjacency()
    }
}
