//! The small benchmark networks: a 3-node directed graph, four planted
//! cliques with alternating absorption rates, and a 6×6 grid split into
//! four quadrants.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::WeightedDigraph;
use crate::partition::Partition;

/// Directed 3-node graph: edges 1→0, 2→0, 0→2, 1→2. Node 1 has no in-edges.
pub fn three_node() -> WeightedDigraph {
    WeightedDigraph::from_adjacency(DMatrix::from_row_slice(
        3,
        3,
        &[0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0],
    ))
    .expect("valid adjacency")
}

/// Absorption rates `(0.1, δ₂, 0.1)` on the 3-node graph.
pub fn three_node_delta(delta2: f64) -> DVector<f64> {
    DVector::from_vec(vec![0.1, delta2, 0.1])
}

/// The partition that isolates the middle node, `{{1}, {0, 2}}` with 0-indexed ids.
pub fn three_node_middle_alone() -> Partition {
    Partition::new(&[0, 1, 0]).expect("non-empty")
}

pub const CLIQUE_SIZE: usize = 4;

/// Four 4-node cliques with unit weights. Bridges are undirected unit edges
/// between nodes of different cliques.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourCliqueSpec {
    pub bridges: Vec<(usize, usize)>,
    /// Node-absorption rate per clique.
    pub clique_delta: [f64; 4],
}

impl Default for FourCliqueSpec {
    /// Cliques 0, 1 and 2 each attach to clique 3 by one bridge, with every
    /// bridge on its own pair of nodes.
    fn default() -> Self {
        Self {
            bridges: vec![(3, 12), (7, 13), (11, 14)],
            clique_delta: [7.0, 1.0, 7.0, 1.0],
        }
    }
}

impl FourCliqueSpec {
    /// Cliques joined in a ring 0-1-2-3-0, one bridge per adjacent pair.
    pub fn ring() -> Self {
        Self {
            bridges: vec![(3, 4), (7, 8), (11, 12), (15, 0)],
            ..Self::default()
        }
    }

    pub fn graph(&self) -> Result<WeightedDigraph> {
        let mut edges = Vec::new();
        for c in 0..4 {
            for i in 0..CLIQUE_SIZE {
                for j in i + 1..CLIQUE_SIZE {
                    edges.push((c * CLIQUE_SIZE + i, c * CLIQUE_SIZE + j, 1.0));
                }
            }
        }
        for &(u, v) in &self.bridges {
            edges.push((u, v, 1.0));
        }
        WeightedDigraph::from_undirected_edges(4 * CLIQUE_SIZE, &edges)
    }

    pub fn delta(&self) -> DVector<f64> {
        DVector::from_fn(4 * CLIQUE_SIZE, |i, _| self.clique_delta[i / CLIQUE_SIZE])
    }

    /// The planted partition into the four cliques.
    pub fn planted() -> Partition {
        let labels: Vec<usize> = (0..4 * CLIQUE_SIZE).map(|i| i / CLIQUE_SIZE).collect();
        Partition::new(&labels).expect("non-empty")
    }

    /// Fast-absorbing cliques split into singletons; the other two intact.
    pub fn split_fast_cliques(&self) -> Partition {
        let fast = |c: usize| self.clique_delta[c] > self.clique_delta.iter().cloned().fold(f64::INFINITY, f64::min);
        let labels: Vec<usize> = (0..4 * CLIQUE_SIZE)
            .map(|i| {
                let c = i / CLIQUE_SIZE;
                if fast(c) {
                    4 + i
                } else {
                    c
                }
            })
            .collect();
        Partition::new(&labels).expect("non-empty")
    }
}

pub const GRID_SIDE: usize = 6;

/// 6×6 lattice grid (row-major ids) with four 3×3 quadrants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Rates of the top-left, top-right, bottom-left and bottom-right quadrants.
    pub quadrant_delta: [f64; 4],
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            quadrant_delta: [0.2, 0.7, 1.5, 1.7],
        }
    }
}

impl GridSpec {
    pub fn graph(&self) -> Result<WeightedDigraph> {
        let id = |r: usize, c: usize| r * GRID_SIDE + c;
        let mut edges = Vec::new();
        for r in 0..GRID_SIDE {
            for c in 0..GRID_SIDE {
                if c + 1 < GRID_SIDE {
                    edges.push((id(r, c), id(r, c + 1), 1.0));
                }
                if r + 1 < GRID_SIDE {
                    edges.push((id(r, c), id(r + 1, c), 1.0));
                }
            }
        }
        WeightedDigraph::from_undirected_edges(GRID_SIDE * GRID_SIDE, &edges)
    }

    pub fn quadrant(node: usize) -> usize {
        let half = GRID_SIDE / 2;
        let (r, c) = (node / GRID_SIDE, node % GRID_SIDE);
        2 * (r / half) + c / half
    }

    pub fn delta(&self) -> DVector<f64> {
        DVector::from_fn(GRID_SIDE * GRID_SIDE, |i, _| self.quadrant_delta[Self::quadrant(i)])
    }

    pub fn quadrants() -> Partition {
        let labels: Vec<usize> = (0..GRID_SIDE * GRID_SIDE).map(Self::quadrant).collect();
        Partition::new(&labels).expect("non-empty")
    }

    /// The top-left quadrant as one community and every other node alone.
    pub fn first_quadrant_only() -> Partition {
        let labels: Vec<usize> = (0..GRID_SIDE * GRID_SIDE)
            .map(|i| if Self::quadrant(i) == 0 { usize::MAX } else { i })
            .collect();
        Partition::new(&labels).expect("non-empty")
    }
}
