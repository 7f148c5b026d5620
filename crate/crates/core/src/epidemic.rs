//! SIR outbreaks on ring lattices joined by random bridges, where bridge
//! endpoints are progressively given a higher recovery rate and nearby
//! "balancing" nodes a higher transmission rate.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AbsorptionConfig, WeightedDigraph};

// Stream ids reserved for the network and schedule draws. Simulation streams
// are `stage << 32 | replicate` with stage ≥ 1, so they never collide.
const NETWORK_STREAM: u64 = u64::MAX;
const SCHEDULE_STREAM: u64 = u64::MAX - 1;

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingLatticeSpec {
    /// Nodes per lattice.
    pub lattice_size: usize,
    pub lattices: usize,
    /// Even number of lattice neighbours per node.
    pub neighbors: usize,
    pub seed: u64,
}

impl Default for RingLatticeSpec {
    fn default() -> Self {
        Self {
            lattice_size: 12,
            lattices: 20,
            neighbors: 6,
            seed: 0,
        }
    }
}

impl RingLatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.neighbors.is_multiple_of(2) || self.neighbors >= self.lattice_size || self.lattices == 0 {
            return Err(Error::InvalidParameter(format!(
                "ring lattice needs an even neighbour count below the lattice size, got k={} n={}",
                self.neighbors, self.lattice_size
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.lattice_size * self.lattices
    }

    pub fn lattice_of(&self, node: usize) -> usize {
        node / self.lattice_size
    }

    pub fn lattice_nodes(&self, lattice: usize) -> std::ops::Range<usize> {
        lattice * self.lattice_size..(lattice + 1) * self.lattice_size
    }

    /// Neighbours `i ± j (mod n)` for `j ≤ k/2`, in global ids.
    pub fn lattice_neighbors(&self, node: usize) -> Vec<usize> {
        let n = self.lattice_size;
        let base = node - node % n;
        let i = node % n;
        let mut out: Vec<usize> = (1..=self.neighbors / 2)
            .flat_map(|j| [base + (i + j) % n, base + (i + n - j) % n])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_lattice_edge(&self, a: usize, b: usize) -> bool {
        if self.lattice_of(a) != self.lattice_of(b) || a == b {
            return false;
        }
        let n = self.lattice_size;
        let d = (a % n).abs_diff(b % n);
        d.min(n - d) <= self.neighbors / 2
    }
}

#[derive(Debug, Clone)]
pub struct RingNetwork {
    pub spec: RingLatticeSpec,
    pub graph: WeightedDigraph,
    /// Random bridges as `(min, max)` pairs in draw order.
    pub bridges: Vec<(usize, usize)>,
}

impl RingNetwork {
    /// Bridges whose endpoints sit in different lattices.
    pub fn community_bridges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bridges
            .iter()
            .copied()
            .filter(|&(a, b)| self.spec.lattice_of(a) != self.spec.lattice_of(b))
    }
}

/// Lattices plus `lattice_size · lattices` bridges between uniformly drawn
/// node pairs. Self pairs, repeated pairs and pairs that are already lattice
/// edges are redrawn, so every edge has weight 1.
pub fn build_network(spec: &RingLatticeSpec) -> Result<RingNetwork> {
    spec.validate()?;
    let n = spec.n();
    let n_bridges = n;
    let mut edges = Vec::new();
    for v in 0..n {
        for u in spec.lattice_neighbors(v) {
            if v < u {
                edges.push((v, u, 1.0));
            }
        }
    }
    let free_pairs = n * (n - 1) / 2 - edges.len();
    if free_pairs < n_bridges {
        return Err(Error::InvalidParameter(format!(
            "only {free_pairs} node pairs available for {n_bridges} bridges"
        )));
    }
    let mut rng = seeded(spec.seed, NETWORK_STREAM);
    let mut seen = HashSet::new();
    let mut bridges = Vec::with_capacity(n_bridges);
    while bridges.len() < n_bridges {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let pair = (a.min(b), a.max(b));
        if a == b || spec.is_lattice_edge(a, b) || !seen.insert(pair) {
            continue;
        }
        bridges.push(pair);
    }
    edges.extend(bridges.iter().map(|&(a, b)| (a, b, 1.0)));
    Ok(RingNetwork {
        spec: *spec,
        graph: WeightedDigraph::from_undirected_edges(n, &edges)?,
        bridges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirParams {
    pub beta_star: f64,
    pub delta_star: f64,
    pub delta_sstar: f64,
    pub alpha: f64,
}

impl Default for SirParams {
    fn default() -> Self {
        Self {
            beta_star: 0.125,
            delta_star: 0.2,
            delta_sstar: 1.0,
            alpha: 0.1,
        }
    }
}

impl SirParams {
    pub fn beta_sstar(&self) -> f64 {
        beta_balancing(self.beta_star, self.delta_star, self.delta_sstar, self.alpha)
    }
}

/// Transmission rate that offsets the lost infections of a bridge endpoint
/// whose recovery rate rises from `δ*` to `δ**`.
pub fn beta_balancing(beta_star: f64, delta_star: f64, delta_sstar: f64, alpha: f64) -> f64 {
    beta_star + alpha * delta_star * beta_star * (1.0 / delta_star - 1.0 / delta_sstar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeUpgrade {
    pub bridge: (usize, usize),
    /// Balancing node for each endpoint, in the same order.
    pub balancing: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    /// 1-based.
    pub stage_index: usize,
    pub beta: Vec<f64>,
    pub delta: Vec<f64>,
    pub bridge_log: Vec<BridgeUpgrade>,
}

impl StageConfig {
    pub fn n(&self) -> usize {
        self.delta.len()
    }

    /// Recovery rates as node-absorption rates with `H = 0`.
    pub fn absorption(&self) -> Result<AbsorptionConfig> {
        AbsorptionConfig::unscaled(DVector::from_vec(self.delta.clone()))
    }
}

/// Stage 1 is uniform. Each later stage raises the recovery rate of both
/// endpoints of a random community bridge whose endpoints are still at `δ*`,
/// and raises the transmission rate of one balancing node per endpoint.
pub fn stage_schedule(
    net: &RingNetwork,
    params: &SirParams,
    n_stages: usize,
    seed: u64,
) -> Result<Vec<StageConfig>> {
    let n = net.spec.n();
    let beta_sstar = params.beta_sstar();
    let mut rng = seeded(seed, SCHEDULE_STREAM);
    let mut current = StageConfig {
        stage_index: 1,
        beta: vec![params.beta_star; n],
        delta: vec![params.delta_star; n],
        bridge_log: Vec::new(),
    };
    let mut out = Vec::with_capacity(n_stages);
    for stage in 2..=n_stages {
        out.push(current.clone());
        let eligible: Vec<(usize, usize)> = net
            .community_bridges()
            .filter(|&(a, b)| current.delta[a] == params.delta_star && current.delta[b] == params.delta_star)
            .collect();
        if eligible.is_empty() {
            return Err(Error::ExhaustedBridges { stage });
        }
        let (a, b) = eligible[rng.random_range(0..eligible.len())];
        let mut pick_balancing = |node: usize| {
            let near = net.spec.lattice_neighbors(node);
            let pool: Vec<usize> = net
                .spec
                .lattice_nodes(net.spec.lattice_of(node))
                .filter(|&l| l != node && !near.contains(&l))
                .collect();
            pool[rng.random_range(0..pool.len())]
        };
        let (la, lb) = (pick_balancing(a), pick_balancing(b));
        current.stage_index = stage;
        current.delta[a] = params.delta_sstar;
        current.delta[b] = params.delta_sstar;
        current.beta[la] = beta_sstar;
        current.beta[lb] = beta_sstar;
        current.bridge_log.push(BridgeUpgrade {
            bridge: (a, b),
            balancing: (la, lb),
        });
    }
    if n_stages > 0 {
        out.push(current);
    }
    Ok(out)
}

/// Neighbour lists with edge weights for fast event updates.
#[derive(Debug, Clone)]
pub struct ContactNetwork {
    // out[i] holds (k, a_ki); into[k] holds (i, a_ki)
    out: Vec<Vec<(usize, f64)>>,
    into: Vec<Vec<(usize, f64)>>,
}

impl ContactNetwork {
    pub fn new(g: &WeightedDigraph) -> Self {
        let out: Vec<Vec<(usize, f64)>> = (0..g.n())
            .map(|i| g.successors(i).map(|k| (k, g.weight(i, k))).collect())
            .collect();
        let mut into = vec![Vec::new(); g.n()];
        for (src, list) in out.iter().enumerate() {
            for &(dst, w) in list {
                into[dst].push((src, w));
            }
        }
        Self { out, into }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum EventKind {
    Infection { source: usize, target: usize },
    Recovery { node: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirEvent {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
    pub susceptible: usize,
    pub infected: usize,
    pub recovered: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutbreakStats {
    pub duration: f64,
    pub final_size: usize,
    pub peak: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outbreak {
    pub stats: OutbreakStats,
    /// Present when logging was requested.
    pub events: Option<Vec<SirEvent>>,
}

#[derive(Clone, Copy, PartialEq)]
enum Status {
    S,
    I,
    R,
}

/// Direct-method Gillespie SIR from one infected node. An infectious node
/// `i` recovers at rate `δ_i` and infects a susceptible `k` at rate `β_i a_ki`.
pub fn simulate_sir(
    net: &ContactNetwork,
    beta: &[f64],
    delta: &[f64],
    initial: usize,
    rng: &mut impl Rng,
    log: bool,
) -> Result<Outbreak> {
    let n = net.n();
    if beta.len() != n || delta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if beta.len() != n { beta.len() } else { delta.len() },
        });
    }
    if initial >= n {
        return Err(Error::InvalidParameter(format!("initial node {initial} out of range")));
    }
    if delta.iter().any(|&d| !(d > 0.0)) || beta.iter().any(|&b| !(b >= 0.0)) {
        return Err(Error::InvalidParameter("need δ > 0 and β ≥ 0 everywhere".into()));
    }

    let mut status = vec![Status::S; n];
    // total weight of edges from each infectious node to susceptible nodes
    let mut pressure = vec![0.0; n];
    let mut infected: Vec<usize> = Vec::new();
    let mut events = log.then(Vec::new);
    let (mut s, mut i, mut r) = (n, 0, 0);

    let infect = |v: usize, status: &mut [Status], pressure: &mut [f64], infected: &mut Vec<usize>| {
        for &(src, w) in &net.into[v] {
            if status[src] == Status::I {
                pressure[src] -= w;
            }
        }
        status[v] = Status::I;
        infected.push(v);
        pressure[v] = net.out[v]
            .iter()
            .filter(|(k, _)| status[*k] == Status::S)
            .map(|(_, w)| w)
            .sum();
    };

    infect(initial, &mut status, &mut pressure, &mut infected);
    s -= 1;
    i += 1;
    let mut peak = 1;
    let mut time = 0.0;

    while !infected.is_empty() {
        let rate = |v: usize| delta[v] + beta[v] * pressure[v];
        let total: f64 = infected.iter().map(|&v| rate(v)).sum();
        let u: f64 = rng.random();
        time += -(1.0 - u).ln() / total;

        let mut x = rng.random::<f64>() * total;
        let mut pos = infected.len() - 1;
        for (p, &v) in infected.iter().enumerate() {
            let rv = rate(v);
            if x < rv {
                pos = p;
                break;
            }
            x -= rv;
        }
        let v = infected[pos];
        let x = x.min(rate(v));

        let kind = if x < delta[v] || pressure[v] <= 0.0 {
            infected.swap_remove(pos);
            status[v] = Status::R;
            i -= 1;
            r += 1;
            EventKind::Recovery { node: v }
        } else {
            let mut y = (x - delta[v]) / beta[v].max(f64::MIN_POSITIVE);
            let candidates: Vec<(usize, f64)> = net.out[v]
                .iter()
                .copied()
                .filter(|(k, _)| status[*k] == Status::S)
                .collect();
            let mut target = candidates[candidates.len() - 1].0;
            for &(k, w) in &candidates {
                if y < w {
                    target = k;
                    break;
                }
                y -= w;
            }
            infect(target, &mut status, &mut pressure, &mut infected);
            s -= 1;
            i += 1;
            peak = peak.max(i);
            EventKind::Infection { source: v, target }
        };
        if let Some(ev) = events.as_mut() {
            ev.push(SirEvent {
                time,
                kind,
                susceptible: s,
                infected: i,
                recovered: r,
            });
        }
    }

    Ok(Outbreak {
        stats: OutbreakStats {
            duration: time,
            final_size: r,
            peak,
        },
        events,
    })
}

/// Single outbreak for a stage with a seed-determined generator.
pub fn gillespie_sir(
    net: &ContactNetwork,
    stage: &StageConfig,
    seed: u64,
    initial: usize,
    log: bool,
) -> Result<Outbreak> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_sir(net, &stage.beta, &stage.delta, initial, &mut rng, log)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirExperiment {
    pub network: RingLatticeSpec,
    pub params: SirParams,
    pub stages: usize,
    pub simulations: usize,
    pub seed: u64,
}

impl Default for SirExperiment {
    fn default() -> Self {
        Self {
            network: RingLatticeSpec::default(),
            params: SirParams::default(),
            stages: 68,
            simulations: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: usize,
    pub mean_duration: f64,
    pub mean_final_size: f64,
    pub mean_peak: f64,
    pub n_sim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub stage: usize,
    pub replicate: usize,
    pub initial: usize,
    pub stats: OutbreakStats,
}

#[derive(Debug, Clone)]
pub struct SirExperimentResult {
    pub network: RingNetwork,
    pub schedule: Vec<StageConfig>,
    pub summaries: Vec<StageSummary>,
    pub runs: Vec<RunRecord>,
}

impl SirExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,mean_duration,mean_final_size,mean_peak,n_sim\n");
        for s in &self.summaries {
            writeln!(
                out,
                "{},{},{},{},{}",
                s.stage, s.mean_duration, s.mean_final_size, s.mean_peak, s.n_sim
            )
            .unwrap();
        }
        out
    }

    pub fn runs_csv(&self) -> String {
        let mut out = String::from("stage,replicate,duration,final_size,peak\n");
        for r in &self.runs {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.stage, r.replicate, r.stats.duration, r.stats.final_size, r.stats.peak
            )
            .unwrap();
        }
        out
    }
}

/// Network, stage schedule and `simulations` outbreaks per stage, each
/// started from a uniformly drawn node. Replicate `r` of stage `k` uses its
/// own stream, so results do not depend on scheduling.
pub fn run_experiment(exp: &SirExperiment) -> Result<SirExperimentResult> {
    if exp.simulations == 0 || exp.stages == 0 {
        return Err(Error::InvalidParameter("need at least one stage and one simulation".into()));
    }
    let network = build_network(&exp.network)?;
    let schedule = stage_schedule(&network, &exp.params, exp.stages, exp.seed)?;
    let contacts = ContactNetwork::new(&network.graph);
    let n = contacts.n();

    let jobs: Vec<(usize, usize)> = (0..exp.stages)
        .flat_map(|s| (0..exp.simulations).map(move |r| (s, r)))
        .collect();
    let runs = jobs
        .into_par_iter()
        .map(|(s, r)| {
            let stage = &schedule[s];
            let mut rng = seeded(exp.seed, ((stage.stage_index as u64) << 32) | r as u64);
            let initial = rng.random_range(0..n);
            let o = simulate_sir(&contacts, &stage.beta, &stage.delta, initial, &mut rng, false)?;
            Ok(RunRecord {
                stage: stage.stage_index,
                replicate: r,
                initial,
                stats: o.stats,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summaries = runs
        .chunks(exp.simulations)
        .map(|chunk| {
            let m = chunk.len() as f64;
            StageSummary {
                stage: chunk[0].stage,
                mean_duration: chunk.iter().map(|r| r.stats.duration).sum::<f64>() / m,
                mean_final_size: chunk.iter().map(|r| r.stats.final_size as f64).sum::<f64>() / m,
                mean_peak: chunk.iter().map(|r| r.stats.peak as f64).sum::<f64>() / m,
                n_sim: chunk.len(),
            }
        })
        .collect();
    Ok(SirExperimentResult {
        network,
        schedule,
        summaries,
        runs,
    })
}

/// Centered moving average with window `w`, shrinking at the ends.
pub fn moving_average(x: &[f64], w: usize) -> Vec<f64> {
    let h = w / 2;
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(x.len());
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}
