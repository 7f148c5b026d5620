//! Greedy two-level minimization of the map function, the linear and
//! exponential absorbing-walk wrappers around it, and Markov-time sweeps.
//!
//! The optimizer works on the flow network `F[k, j] = π_j p_kj`. Moving a
//! node only changes the exit and enter flows of two communities, so every
//! candidate move is scored in constant time once the flows between the
//! node and its neighbouring communities are known.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AbsorptionConfig, WeightedDigraph};
use crate::mapeq::plogp;
use crate::markov::{
    stationary, transition_exponential, transition_linear, StationaryDistribution,
    TransitionMatrix,
};
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub rng_seed: u64,
    pub max_outer_passes: usize,
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            rng_seed: 0,
            max_outer_passes: 100,
            tolerance: 1e-12,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        if self.max_outer_passes == 0 {
            return Err(Error::InvalidParameter("max_outer_passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// Best partition over all restarts, with the restart that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOutcome {
    pub partition: Partition,
    pub codelength: f64,
    /// Index of the winning restart, or `None` when a trivial candidate
    /// (all-in-one or singletons) won.
    pub restart: Option<usize>,
    /// Codelength of the winning run after each accepted pass, starting
    /// from singletons. Trivial winners have a single entry.
    pub passes: Vec<f64>,
}

/// Flow network between (super-)nodes. Self-flow is dropped because it never
/// crosses a community boundary.
struct FlowNet {
    flow: DMatrix<f64>,
    mass: Vec<f64>,
    out: Vec<f64>,
    inn: Vec<f64>,
}

impl FlowNet {
    fn from_transition(p: &TransitionMatrix, pi: &StationaryDistribution) -> Self {
        let n = p.n();
        let pi = pi.as_vector();
        let mut flow = DMatrix::from_fn(n, n, |k, j| p.matrix()[(k, j)] * pi[j]);
        flow.fill_diagonal(0.0);
        Self::new(flow, pi.iter().copied().collect())
    }

    fn new(flow: DMatrix<f64>, mass: Vec<f64>) -> Self {
        let out = flow.column_iter().map(|c| c.sum()).collect();
        let inn = flow.row_iter().map(|r| r.sum()).collect();
        Self {
            flow,
            mass,
            out,
            inn,
        }
    }

    fn n(&self) -> usize {
        self.mass.len()
    }

    fn aggregate(&self, labels: &[usize], k: usize) -> Self {
        let mut flow = DMatrix::zeros(k, k);
        let mut mass = vec![0.0; k];
        for j in 0..self.n() {
            mass[labels[j]] += self.mass[j];
            for i in 0..self.n() {
                let f = self.flow[(i, j)];
                if f != 0.0 && labels[i] != labels[j] {
                    flow[(labels[i], labels[j])] += f;
                }
            }
        }
        Self::new(flow, mass)
    }
}

#[derive(Clone)]
struct CommunityStats {
    exit: Vec<f64>,
    enter: Vec<f64>,
    mass: Vec<f64>,
    size: Vec<usize>,
}

impl CommunityStats {
    fn compute(net: &FlowNet, labels: &[usize]) -> Self {
        let n = net.n();
        let mut s = Self {
            exit: vec![0.0; n],
            enter: vec![0.0; n],
            mass: vec![0.0; n],
            size: vec![0; n],
        };
        for j in 0..n {
            let cj = labels[j];
            s.mass[cj] += net.mass[j];
            s.size[cj] += 1;
            for i in 0..n {
                let f = net.flow[(i, j)];
                if f != 0.0 && labels[i] != cj {
                    s.exit[cj] += f;
                    s.enter[labels[i]] += f;
                }
            }
        }
        s
    }

    /// Codelength without the node-entropy constant `-Σ plogp(π_j)`.
    fn codelength_part(&self) -> f64 {
        let q: f64 = self.enter.iter().sum();
        let mut l = plogp(q);
        for c in 0..self.exit.len() {
            if self.size[c] > 0 {
                l += plogp(self.exit[c] + self.mass[c]) - plogp(self.exit[c]) - plogp(self.enter[c]);
            }
        }
        l
    }
}

fn node_entropy_term(pi: &StationaryDistribution) -> f64 {
    -pi.as_vector().iter().map(|&x| plogp(x)).sum::<f64>()
}

/// Repeated passes of best single-node moves. Returns whether any move was made.
fn local_moving(
    net: &FlowNet,
    labels: &mut [usize],
    rng: &mut ChaCha8Rng,
    cfg: &OptimizerConfig,
) -> bool {
    let n = net.n();
    let mut stats = CommunityStats::compute(net, labels);
    let mut order: Vec<usize> = (0..n).collect();
    let mut w_out = vec![0.0; n];
    let mut w_in = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::with_capacity(n);
    let mut moved_any = false;

    for _ in 0..cfg.max_outer_passes {
        order.shuffle(rng);
        let mut moved = false;
        for &s in &order {
            let a = labels[s];
            touched.clear();
            for t in 0..n {
                if t == s {
                    continue;
                }
                let (fo, fi) = (net.flow[(t, s)], net.flow[(s, t)]);
                if fo == 0.0 && fi == 0.0 {
                    continue;
                }
                let c = labels[t];
                if w_out[c] == 0.0 && w_in[c] == 0.0 && !touched.contains(&c) {
                    touched.push(c);
                }
                w_out[c] += fo;
                w_in[c] += fi;
            }

            let q: f64 = stats.enter.iter().sum();
            let a_link = w_out[a] + w_in[a];
            let exit_a = stats.exit[a] - net.out[s] + a_link;
            let enter_a = stats.enter[a] - net.inn[s] + a_link;
            let mass_a = stats.mass[a] - net.mass[s];
            let old_a = plogp(stats.exit[a] + stats.mass[a]) - plogp(stats.exit[a]) - plogp(stats.enter[a]);
            let new_a = if stats.size[a] > 1 {
                plogp(exit_a + mass_a) - plogp(exit_a) - plogp(enter_a)
            } else {
                0.0
            };

            let mut candidates: Vec<usize> = touched.iter().copied().filter(|&c| c != a).collect();
            if stats.size[a] > 1 {
                if let Some(empty) = stats.size.iter().position(|&z| z == 0) {
                    candidates.push(empty);
                }
            }
            candidates.sort_unstable();

            let mut best: Option<(f64, usize, f64, f64)> = None;
            for &b in &candidates {
                let b_link = w_out[b] + w_in[b];
                let exit_b = stats.exit[b] + net.out[s] - b_link;
                let enter_b = stats.enter[b] + net.inn[s] - b_link;
                let mass_b = stats.mass[b] + net.mass[s];
                let old_b = if stats.size[b] > 0 {
                    plogp(stats.exit[b] + stats.mass[b]) - plogp(stats.exit[b]) - plogp(stats.enter[b])
                } else {
                    0.0
                };
                let new_b = plogp(exit_b + mass_b) - plogp(exit_b) - plogp(enter_b);
                let q_new = q - stats.enter[a] - stats.enter[b] + enter_a.max(0.0) + enter_b.max(0.0);
                let delta = plogp(q_new) - plogp(q) + new_a + new_b - old_a - old_b;
                if best.is_none_or(|(d, ..)| delta < d) {
                    best = Some((delta, b, exit_b, enter_b));
                }
            }

            if let Some((delta, b, exit_b, enter_b)) = best {
                if delta < -cfg.tolerance {
                    stats.exit[a] = exit_a.max(0.0);
                    stats.enter[a] = enter_a.max(0.0);
                    stats.mass[a] = mass_a.max(0.0);
                    stats.size[a] -= 1;
                    if stats.size[a] == 0 {
                        stats.exit[a] = 0.0;
                        stats.enter[a] = 0.0;
                        stats.mass[a] = 0.0;
                    }
                    stats.exit[b] = exit_b.max(0.0);
                    stats.enter[b] = enter_b.max(0.0);
                    stats.mass[b] += net.mass[s];
                    stats.size[b] += 1;
                    labels[s] = b;
                    moved = true;
                    moved_any = true;
                }
            }
            for &c in &touched {
                w_out[c] = 0.0;
                w_in[c] = 0.0;
            }
        }
        if !moved {
            break;
        }
        // refresh to keep incremental updates from drifting
        stats = CommunityStats::compute(net, labels);
    }
    moved_any
}

fn compact(labels: &mut [usize]) -> usize {
    let p = Partition::new(labels).expect("non-empty labels");
    labels.copy_from_slice(p.labels());
    p.num_communities()
}

/// Local moving on nodes from `labels`, then repeated aggregation and moving
/// of communities until nothing moves.
fn multilevel(net: &FlowNet, labels: &mut [usize], rng: &mut ChaCha8Rng, cfg: &OptimizerConfig) {
    local_moving(net, labels, rng, cfg);
    let mut k = compact(labels);
    let mut level = net.aggregate(labels, k);
    loop {
        let mut super_labels: Vec<usize> = (0..k).collect();
        if !local_moving(&level, &mut super_labels, rng, cfg) {
            break;
        }
        let k_new = compact(&mut super_labels);
        for l in labels.iter_mut() {
            *l = super_labels[*l];
        }
        if k_new == k {
            break;
        }
        level = level.aggregate(&super_labels, k_new);
        k = k_new;
    }
}

fn single_run(net: &FlowNet, rng: &mut ChaCha8Rng, cfg: &OptimizerConfig) -> (Vec<usize>, f64, Vec<f64>) {
    let mut labels: Vec<usize> = (0..net.n()).collect();
    let mut best = CommunityStats::compute(net, &labels).codelength_part();
    let mut history = vec![best];
    for _ in 0..cfg.max_outer_passes {
        let mut trial = labels.clone();
        multilevel(net, &mut trial, rng, cfg);
        let l = CommunityStats::compute(net, &trial).codelength_part();
        if l < best - cfg.tolerance {
            best = l;
            labels = trial;
            history.push(l);
        } else {
            break;
        }
    }
    (labels, best, history)
}

fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Best-of-restarts greedy minimization of `L(M, P, π)`. The all-in-one and
/// all-singletons partitions are always considered as candidates.
pub fn minimize_map_detailed(
    p: &TransitionMatrix,
    pi: &StationaryDistribution,
    cfg: &OptimizerConfig,
) -> Result<OptimizerOutcome> {
    cfg.validate()?;
    if pi.len() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            found: pi.len(),
        });
    }
    let n = p.n();
    let net = FlowNet::from_transition(p, pi);
    let constant = node_entropy_term(pi);

    let runs: Vec<(Vec<usize>, f64, Vec<f64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| single_run(&net, &mut restart_rng(cfg.rng_seed, r), cfg))
        .collect();

    let mut best_labels: Vec<usize> = vec![0; n];
    let mut best_len = CommunityStats::compute(&net, &best_labels).codelength_part();
    let mut best_restart = None;
    let mut passes = vec![best_len];
    let singles: Vec<usize> = (0..n).collect();
    let single_len = CommunityStats::compute(&net, &singles).codelength_part();
    if single_len < best_len - cfg.tolerance {
        best_labels = singles;
        best_len = single_len;
        passes = vec![single_len];
    }
    for (r, (labels, len, history)) in runs.into_iter().enumerate() {
        if len < best_len - cfg.tolerance {
            best_labels = labels;
            best_len = len;
            best_restart = Some(r);
            passes = history;
        }
    }
    Ok(OptimizerOutcome {
        partition: Partition::new(&best_labels)?,
        codelength: best_len + constant,
        restart: best_restart,
        passes: passes.into_iter().map(|l| l + constant).collect(),
    })
}

pub fn minimize_map(
    p: &TransitionMatrix,
    pi: &StationaryDistribution,
    cfg: &OptimizerConfig,
) -> Result<Partition> {
    Ok(minimize_map_detailed(p, pi, cfg)?.partition)
}

/// Minimizes the map function of `P_l(D_δ, H, t)` at its stationary distribution.
pub fn algorithm1(
    g: &WeightedDigraph,
    cfg: &AbsorptionConfig,
    t: f64,
    opt: &OptimizerConfig,
) -> Result<Partition> {
    Ok(solve_at(g, cfg, InputKind::Linear, t, opt)?.partition)
}

/// Minimizes the map function of `P_e(D_δ, H, t)` at its stationary distribution.
pub fn algorithm2(
    g: &WeightedDigraph,
    cfg: &AbsorptionConfig,
    t: f64,
    opt: &OptimizerConfig,
) -> Result<Partition> {
    Ok(solve_at(g, cfg, InputKind::Exponential, t, opt)?.partition)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Linear,
    Exponential,
}

impl std::str::FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "exponential" => Ok(Self::Exponential),
            other => Err(Error::InvalidParameter(format!(
                "unknown input kind {other:?} (expected linear or exponential)"
            ))),
        }
    }
}

pub fn transition_for(
    g: &WeightedDigraph,
    cfg: &AbsorptionConfig,
    kind: InputKind,
    t: f64,
) -> Result<TransitionMatrix> {
    match kind {
        InputKind::Linear => transition_linear(g, cfg, t),
        InputKind::Exponential => transition_exponential(g, cfg, t),
    }
}

pub fn solve_at(
    g: &WeightedDigraph,
    cfg: &AbsorptionConfig,
    kind: InputKind,
    t: f64,
    opt: &OptimizerConfig,
) -> Result<OptimizerOutcome> {
    let p = transition_for(g, cfg, kind, t)?;
    let pi = stationary(&p)?;
    minimize_map_detailed(&p, &pi, opt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub times: Vec<f64>,
    pub community_counts: Vec<Option<usize>>,
    pub partitions: Vec<Option<Partition>>,
    pub codelengths: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,num_communities,codelength\n");
        for i in 0..self.times.len() {
            let count = self.community_counts[i].map(|c| c.to_string()).unwrap_or_default();
            let len = self.codelengths[i].map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{count},{len}\n", self.times[i]));
        }
        out
    }

    /// Intervals of consecutive sample times whose partition satisfies
    /// `pred`. Interior boundaries sit midway between adjacent samples.
    pub fn plateaus(&self, pred: impl Fn(&Partition) -> bool) -> Vec<(f64, f64)> {
        let flags: Vec<bool> = self
            .partitions
            .iter()
            .map(|p| p.as_ref().is_some_and(&pred))
            .collect();
        plateaus(&self.times, &flags)
    }
}

pub fn plateaus(times: &[f64], flags: &[bool]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < flags.len() && flags[i + 1] {
            i += 1;
        }
        let lo = if start == 0 {
            times[0]
        } else {
            (times[start - 1] + times[start]) / 2.0
        };
        let hi = if i + 1 == flags.len() {
            times[i]
        } else {
            (times[i] + times[i + 1]) / 2.0
        };
        out.push((lo, hi));
        i += 1;
    }
    out
}

/// Runs the optimizer at every Markov time. Failures at individual times are
/// recorded and the sweep continues.
pub fn markov_time_sweep(
    g: &WeightedDigraph,
    cfg: &AbsorptionConfig,
    kind: InputKind,
    times: &[f64],
    opt: &OptimizerConfig,
) -> SweepResult {
    let outcomes: Vec<Result<OptimizerOutcome>> = times
        .par_iter()
        .map(|&t| solve_at(g, cfg, kind, t, opt))
        .collect();
    let mut res = SweepResult {
        times: times.to_vec(),
        community_counts: Vec::new(),
        partitions: Vec::new(),
        codelengths: Vec::new(),
        errors: Vec::new(),
    };
    for o in outcomes {
        match o {
            Ok(o) => {
                res.community_counts.push(Some(o.partition.num_communities()));
                res.codelengths.push(Some(o.codelength));
                res.partitions.push(Some(o.partition));
                res.errors.push(None);
            }
            Err(e) => {
                res.community_counts.push(None);
                res.codelengths.push(None);
                res.partitions.push(None);
                res.errors.push(Some(e.to_string()));
            }
        }
    }
    res
}

/// Non-empty intersections of the communities of `m` with a planted node set.
pub fn subcommunities(m: &Partition, planted: &[usize]) -> Vec<Vec<usize>> {
    let mut planted = planted.to_vec();
    planted.sort_unstable();
    planted.dedup();
    m.communities()
        .into_iter()
        .map(|c| c.into_iter().filter(|v| planted.binary_search(v).is_ok()).collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect()
}
