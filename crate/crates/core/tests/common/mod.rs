#![allow(dead_code)]

use absorbmap::graph::WeightedDigraph;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Random digraph on `3..=max_n` nodes. A directed ring of weight-½ edges
/// keeps it strongly connected; other edges appear with probability 0.4.
pub fn digraph(max_n: usize) -> impl Strategy<Value = WeightedDigraph> {
    (3..=max_n)
        .prop_flat_map(|n| proptest::collection::vec(proptest::option::weighted(0.4, 0.05f64..1.0), n * n).prop_map(move |w| (n, w)))
        .prop_map(|(n, w)| {
            let mut a = DMatrix::zeros(n, n);
            for (k, x) in w.into_iter().enumerate() {
                let (i, j) = (k % n, k / n);
                if i != j {
                    a[(i, j)] = x.unwrap_or(0.0);
                }
            }
            for j in 0..n {
                a[((j + 1) % n, j)] += 0.5;
            }
            WeightedDigraph::from_adjacency(a).unwrap()
        })
}

/// Graph plus absorption rates log-uniform in [1e-3, 10].
pub fn instance(max_n: usize) -> impl Strategy<Value = (WeightedDigraph, DVector<f64>)> {
    digraph(max_n).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), proptest::collection::vec(-3.0f64..1.0, n).prop_map(|e| DVector::from_iterator(e.len(), e.into_iter().map(|x| 10f64.powf(x)))))
    })
}

pub fn norm1(m: &DMatrix<f64>) -> f64 {
    absorbmap::linalg::norm1(m)
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
