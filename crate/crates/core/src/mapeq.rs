//! The map function: the two-level codelength of a random walk on a partition.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::markov::{
    absorbing_chain, fundamental, p_delta, pi_delta_abs, random_walk, stationary,
    StationaryDistribution, TransitionMatrix,
};
use crate::partition::Partition;

/// `x log2 x` with the `0 log 0 = 0` convention.
pub fn plogp(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits. Zero entries contribute nothing.
pub fn entropy(p: &[f64]) -> Result<f64> {
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::InvalidProbability(format!("negative entry {x}")));
    }
    let s: f64 = p.iter().sum();
    if s > 1.0 + 1e-12 {
        return Err(Error::InvalidProbability(format!("entries sum to {s} > 1")));
    }
    Ok(-p.iter().map(|&x| plogp(x)).sum::<f64>())
}

/// Entropy of a non-negative vector after normalizing it by `total`.
fn normalized_entropy(weights: &[f64], total: f64) -> Result<f64> {
    if total <= 0.0 {
        return Ok(0.0);
    }
    let mut p: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let s: f64 = p.iter().sum();
    // absorb roundoff leaks
    if s > 1.0 && s <= 1.0 + 1e-12 {
        p.iter_mut().for_each(|x| *x /= s);
    }
    entropy(&p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodelengthBreakdown {
    pub q_exit: Vec<f64>,
    pub q_enter: Vec<f64>,
    pub q_enter_total: f64,
    pub p_circ: Vec<f64>,
    pub index_entropy: f64,
    pub module_entropies: Vec<f64>,
    pub total: f64,
}

impl CodelengthBreakdown {
    pub fn index_term(&self) -> f64 {
        self.q_enter_total * self.index_entropy
    }

    pub fn module_term(&self) -> f64 {
        self.p_circ
            .iter()
            .zip(&self.module_entropies)
            .map(|(p, h)| p * h)
            .sum()
    }
}

fn check_dims(m: &Partition, p: &TransitionMatrix, pi: &StationaryDistribution) -> Result<()> {
    for found in [p.n(), pi.len()] {
        if found != m.n() {
            return Err(Error::DimensionMismatch {
                expected: m.n(),
                found,
            });
        }
    }
    Ok(())
}

/// `L(M, P, π)`. `π` may be any distribution; it need not be stationary for `P`.
pub fn map_function(
    m: &Partition,
    p: &TransitionMatrix,
    pi: &StationaryDistribution,
) -> Result<CodelengthBreakdown> {
    check_dims(m, p, pi)?;
    let k = m.num_communities();
    let pi = pi.as_vector();
    let pm = p.matrix();
    let mut q_exit = vec![0.0; k];
    let mut q_enter = vec![0.0; k];
    let mut mass = vec![0.0; k];
    for j in 0..m.n() {
        let cj = m.label(j);
        mass[cj] += pi[j];
        for i in 0..m.n() {
            let ci = m.label(i);
            if ci != cj {
                let flow = pi[j] * pm[(i, j)];
                q_exit[cj] += flow;
                q_enter[ci] += flow;
            }
        }
    }
    let q_enter_total: f64 = q_enter.iter().sum();
    let index_entropy = normalized_entropy(&q_enter, q_enter_total)?;

    let p_circ: Vec<f64> = q_exit.iter().zip(&mass).map(|(q, s)| q + s).collect();
    let mut module_entropies = Vec::with_capacity(k);
    for (c, members) in m.communities().iter().enumerate() {
        let mut weights = Vec::with_capacity(members.len() + 1);
        weights.push(q_exit[c]);
        weights.extend(members.iter().map(|&v| pi[v]));
        module_entropies.push(normalized_entropy(&weights, p_circ[c])?);
    }

    let mut out = CodelengthBreakdown {
        q_exit,
        q_enter,
        q_enter_total,
        p_circ,
        index_entropy,
        module_entropies,
        total: 0.0,
    };
    out.total = out.index_term() + out.module_term();
    Ok(out)
}

/// `L(M, P)`: the map function at the stationary distribution of `P`.
pub fn standard_map(m: &Partition, p: &TransitionMatrix) -> Result<CodelengthBreakdown> {
    map_function(m, p, &stationary(p)?)
}

/// `L(M)` for a graph: the standard map of the walk `A W^-1`.
pub fn adjacency_map(m: &Partition, g: &WeightedDigraph) -> Result<CodelengthBreakdown> {
    standard_map(m, &random_walk(g)?)
}

/// `L^(a)(M, A, δ, π₀) = L(M, P_δ, N̂ π₀)`. `π₀` defaults to uniform.
pub fn absorbing_map(
    m: &Partition,
    g: &WeightedDigraph,
    delta: &DVector<f64>,
    pi0: Option<&StationaryDistribution>,
) -> Result<CodelengthBreakdown> {
    let pd = p_delta(g, delta)?;
    let fund = fundamental(&absorbing_chain(g, delta)?)?;
    let uniform = StationaryDistribution::uniform(g.n());
    let last = pi_delta_abs(&fund, pi0.unwrap_or(&uniform))?;
    map_function(m, &pd, &last)
}

/// The initial distribution that makes `L^(a)` coincide with the standard map
/// of `P_δ`: entry `i` is `π_i t_i δ_i / (ω_i + δ_i)` with `π` stationary for `P_δ`.
pub fn pi0_for_equivalence(
    g: &WeightedDigraph,
    delta: &DVector<f64>,
) -> Result<StationaryDistribution> {
    let chain = absorbing_chain(g, delta)?;
    let fund = fundamental(&chain)?;
    let pi_na = stationary(&p_delta(g, delta)?)?;
    let pi0 = pi_na
        .as_vector()
        .component_mul(fund.t())
        .component_mul(chain.r());
    StationaryDistribution::normalized(pi0)
}
