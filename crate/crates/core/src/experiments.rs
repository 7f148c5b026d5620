//! Named experiment runners. Each writes CSV tables plus a JSON sidecar that
//! holds the full descriptor, so a run can be repeated from the sidecar alone.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::absinv::random_identity_suite;
use crate::epidemic::{run_experiment, SirExperiment};
use crate::error::{Error, Result};
use crate::graph::{AbsorptionConfig, WeightedDigraph};
use crate::io::{read_edge_list, read_node_attributes, write_edge_list};
use crate::mapeq::{absorbing_map, standard_map};
use crate::markov::{linear_time_bound, transition_linear};
use crate::networks::{three_node, three_node_delta, FourCliqueSpec, GridSpec};
use crate::optimizer::{markov_time_sweep, solve_at, InputKind, OptimizerConfig, SweepResult};
use crate::partition::{enumerate_partitions, Partition};

pub const EXPERIMENT_NAMES: [&str; 8] = [
    "threenode-la",
    "threenode-l",
    "fourclique-sweep",
    "grid-sweep",
    "grid-partition",
    "sir-stages",
    "identities",
    "custom",
];

/// Evenly spaced sample times `start, start + step, …` up to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn times(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.start],
            k => (0..k)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (k - 1) as f64)
                .collect(),
        }
    }
}

/// One Markov-time sweep. Linear sweeps take times as fractions of the
/// feasibility bound when `relative_to_bound` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: InputKind,
    pub h: f64,
    pub grid: TimeGrid,
    #[serde(default)]
    pub relative_to_bound: bool,
}

impl SweepSpec {
    fn times(&self, g: &WeightedDigraph, cfg: &AbsorptionConfig) -> Result<Vec<f64>> {
        let mut ts = self.grid.times();
        if self.relative_to_bound {
            let bound = linear_time_bound(g, cfg)?;
            ts.iter_mut().for_each(|t| *t *= bound);
        }
        Ok(ts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeNodeParams {
    pub delta2: TimeGrid,
    /// Markov time of the linear input; unused by `threenode-la`.
    pub t: f64,
    pub delta_outer: f64,
}

impl Default for ThreeNodeParams {
    fn default() -> Self {
        Self {
            delta2: TimeGrid::new(0.1, 10.0, 50),
            t: 1.0 / 20.0,
            delta_outer: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourCliqueParams {
    pub network: FourCliqueSpec,
    pub sweeps: Vec<SweepSpec>,
    pub restarts: usize,
}

impl Default for FourCliqueParams {
    fn default() -> Self {
        Self {
            network: FourCliqueSpec::default(),
            sweeps: vec![
                SweepSpec {
                    kind: InputKind::Exponential,
                    h: 0.0,
                    grid: TimeGrid::new(0.01, 6.0, 600),
                    relative_to_bound: false,
                },
                SweepSpec {
                    kind: InputKind::Linear,
                    h: 0.0,
                    grid: TimeGrid::new(0.01, 1.0, 100),
                    relative_to_bound: true,
                },
                SweepSpec {
                    kind: InputKind::Exponential,
                    h: 1.5,
                    grid: TimeGrid::new(0.05, 16.0, 320),
                    relative_to_bound: false,
                },
                SweepSpec {
                    kind: InputKind::Linear,
                    h: 1.5,
                    grid: TimeGrid::new(0.01, 1.0, 100),
                    relative_to_bound: true,
                },
            ],
            restarts: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSweepParams {
    pub network: GridSpec,
    pub sweeps: Vec<SweepSpec>,
    pub restarts: usize,
}

impl Default for GridSweepParams {
    fn default() -> Self {
        Self {
            network: GridSpec::default(),
            sweeps: vec![
                SweepSpec {
                    kind: InputKind::Linear,
                    h: 0.0,
                    grid: TimeGrid::new(0.01, 1.0, 100),
                    relative_to_bound: true,
                },
                SweepSpec {
                    kind: InputKind::Exponential,
                    h: 1.0,
                    grid: TimeGrid::new(0.25, 10.0, 40),
                    relative_to_bound: false,
                },
            ],
            restarts: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionPoint {
    pub kind: InputKind,
    pub h: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPartitionParams {
    pub network: GridSpec,
    pub points: Vec<PartitionPoint>,
    pub restarts: usize,
}

impl Default for GridPartitionParams {
    fn default() -> Self {
        Self {
            network: GridSpec::default(),
            points: vec![
                PartitionPoint {
                    kind: InputKind::Linear,
                    h: 0.0,
                    t: 0.04,
                },
                PartitionPoint {
                    kind: InputKind::Exponential,
                    h: 1.0,
                    t: 5.25,
                },
            ],
            restarts: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SirStagesParams {
    pub experiment: SirExperiment,
    /// Also write one row per simulation.
    pub per_run: bool,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityParams {
    pub trials: usize,
}

impl Default for IdentityParams {
    fn default() -> Self {
        Self { trials: 100 }
    }
}

/// Sweep on a user-supplied edge list. Without an attribute file every node
/// gets rate `delta` and scale `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomParams {
    pub input: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub delta: f64,
    pub sweep: SweepSpec,
    pub restarts: usize,
}

impl Default for CustomParams {
    fn default() -> Self {
        Self {
            input: None,
            attributes: None,
            delta: 1.0,
            sweep: SweepSpec {
                kind: InputKind::Exponential,
                h: 0.0,
                grid: TimeGrid::new(0.1, 10.0, 100),
                relative_to_bound: false,
            },
            restarts: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "kebab-case")]
pub enum Experiment {
    ThreenodeLa(ThreeNodeParams),
    ThreenodeL(ThreeNodeParams),
    FourcliqueSweep(FourCliqueParams),
    GridSweep(GridSweepParams),
    GridPartition(GridPartitionParams),
    SirStages(SirStagesParams),
    Identities(IdentityParams),
    Custom(CustomParams),
}

impl Experiment {
    /// Default parameters for a named experiment.
    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "threenode-la" => Self::ThreenodeLa(Default::default()),
            "threenode-l" => Self::ThreenodeL(Default::default()),
            "fourclique-sweep" => Self::FourcliqueSweep(Default::default()),
            "grid-sweep" => Self::GridSweep(Default::default()),
            "grid-partition" => Self::GridPartition(Default::default()),
            "sir-stages" => Self::SirStages(Default::default()),
            "identities" => Self::Identities(Default::default()),
            "custom" => Self::Custom(Default::default()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ThreenodeLa(_) => "threenode-la",
            Self::ThreenodeL(_) => "threenode-l",
            Self::FourcliqueSweep(_) => "fourclique-sweep",
            Self::GridSweep(_) => "grid-sweep",
            Self::GridPartition(_) => "grid-partition",
            Self::SirStages(_) => "sir-stages",
            Self::Identities(_) => "identities",
            Self::Custom(_) => "custom",
        }
    }

    /// Overrides one parameter by dotted path, e.g. `experiment.simulations`
    /// or `sweeps.0.grid.points`. The value is parsed as JSON, falling back
    /// to a plain string.
    pub fn set(&mut self, path: &str, raw: &str) -> Result<()> {
        let mut doc = serde_json::to_value(&*self)?;
        let mut slot = &mut doc["params"];
        for key in path.split('.') {
            slot = match slot {
                Value::Object(map) => map
                    .get_mut(key)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown parameter {path:?}")))?,
                Value::Array(items) => key
                    .parse::<usize>()
                    .ok()
                    .and_then(|i| items.get_mut(i))
                    .ok_or_else(|| Error::InvalidParameter(format!("bad index in {path:?}")))?,
                _ => return Err(Error::InvalidParameter(format!("unknown parameter {path:?}"))),
            };
        }
        *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        *self = serde_json::from_value(doc)
            .map_err(|e| Error::InvalidParameter(format!("{path}={raw}: {e}")))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub experiment: Experiment,
    pub seed: u64,
}

/// What gets written next to the tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub descriptor: Descriptor,
    pub artifacts: Vec<String>,
    pub summary: Value,
}

impl Sidecar {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Tracks written files so a failed run leaves nothing behind.
struct Artifacts<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, contents)?;
        Ok(())
    }

    fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }

    fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub sidecar: Sidecar,
    pub sidecar_path: PathBuf,
}

/// Runs the descriptor and writes its artifacts into `out_dir`. On error any
/// file already written by this run is removed.
pub fn run(desc: &Descriptor, out_dir: &Path) -> Result<RunReport> {
    fs::create_dir_all(out_dir)?;
    let mut art = Artifacts {
        dir: out_dir,
        written: Vec::new(),
    };
    let stem = desc.experiment.name().replace('-', "_");
    let result = dispatch(desc, &stem, &mut art).and_then(|summary| {
        let sidecar_name = format!("{stem}.json");
        let mut artifacts = art.names();
        artifacts.push(sidecar_name.clone());
        let sidecar = Sidecar {
            descriptor: desc.clone(),
            artifacts,
            summary,
        };
        art.write(&sidecar_name, &serde_json::to_string_pretty(&sidecar)?)?;
        Ok(RunReport {
            sidecar,
            sidecar_path: out_dir.join(sidecar_name),
        })
    });
    if result.is_err() {
        art.discard();
    }
    result
}

fn dispatch(desc: &Descriptor, stem: &str, art: &mut Artifacts) -> Result<Value> {
    let seed = desc.seed;
    match &desc.experiment {
        Experiment::ThreenodeLa(p) => {
            let table = three_node_table(p, true)?;
            art.write(&format!("{stem}.csv"), &table.to_csv())?;
            Ok(table.summary())
        }
        Experiment::ThreenodeL(p) => {
            let table = three_node_table(p, false)?;
            art.write(&format!("{stem}.csv"), &table.to_csv())?;
            Ok(table.summary())
        }
        Experiment::FourcliqueSweep(p) => {
            let g = p.network.graph()?;
            let planted = FourCliqueSpec::planted();
            let opt = OptimizerConfig {
                restarts: p.restarts,
                ..OptimizerConfig::with_seed(seed)
            };
            let sweeps = run_sweeps(&g, &p.network.delta(), &p.sweeps, &opt)?;
            art.write(&format!("{stem}.csv"), &sweeps_csv(&sweeps, Some(&planted)))?;
            Ok(sweeps_summary(&sweeps, &planted))
        }
        Experiment::GridSweep(p) => {
            let g = p.network.graph()?;
            let opt = OptimizerConfig {
                restarts: p.restarts,
                ..OptimizerConfig::with_seed(seed)
            };
            let sweeps = run_sweeps(&g, &p.network.delta(), &p.sweeps, &opt)?;
            art.write(&format!("{stem}.csv"), &sweeps_csv(&sweeps, None))?;
            Ok(sweeps_summary(&sweeps, &GridSpec::quadrants()))
        }
        Experiment::GridPartition(p) => {
            let g = p.network.graph()?;
            let opt = OptimizerConfig {
                restarts: p.restarts,
                ..OptimizerConfig::with_seed(seed)
            };
            let mut summary = Vec::new();
            for (i, pt) in p.points.iter().enumerate() {
                let cfg = AbsorptionConfig::uniform_h(p.network.delta(), pt.h)?;
                let o = solve_at(&g, &cfg, pt.kind, pt.t, &opt)?;
                let name = format!("{stem}_{i}.csv");
                art.write(&name, &o.partition.to_csv())?;
                summary.push(json!({
                    "file": name,
                    "kind": pt.kind,
                    "h": pt.h,
                    "t": pt.t,
                    "num_communities": o.partition.num_communities(),
                    "codelength": o.codelength,
                    "is_quadrants": o.partition == GridSpec::quadrants(),
                    "is_first_quadrant_only": o.partition == GridSpec::first_quadrant_only(),
                }));
            }
            Ok(Value::Array(summary))
        }
        Experiment::SirStages(p) => {
            let exp = SirExperiment {
                seed,
                network: crate::epidemic::RingLatticeSpec {
                    seed,
                    ..p.experiment.network
                },
                ..p.experiment
            };
            let res = run_experiment(&exp)?;
            art.write(&format!("{stem}.csv"), &res.to_csv())?;
            if p.per_run {
                art.write(&format!("{stem}_runs.csv"), &res.runs_csv())?;
            }
            art.write(&format!("{stem}_network.txt"), &write_edge_list(&res.network.graph))?;
            art.write(
                &format!("{stem}_schedule.json"),
                &serde_json::to_string(&json!({
                    "bridges": res.network.bridges,
                    "stages": res.schedule,
                }))?,
            )?;
            let first = res.summaries[0];
            let last = res.summaries[res.summaries.len() - 1];
            Ok(json!({ "first_stage": first, "last_stage": last }))
        }
        Experiment::Identities(p) => {
            let reports = random_identity_suite(p.trials, seed);
            let mut csv = String::from("trial,n,identity,residual\n");
            let mut worst: f64 = 0.0;
            for (k, r) in reports.iter().enumerate() {
                let r = r.as_ref().map_err(|e| Error::NonConvergent(format!("trial {k}: {e}")))?;
                for (name, v) in r.entries() {
                    writeln!(csv, "{k},{},{name},{v:e}", r.n).unwrap();
                }
                worst = worst.max(r.max_residual());
            }
            art.write(&format!("{stem}.csv"), &csv)?;
            Ok(json!({ "trials": p.trials, "max_residual": worst }))
        }
        Experiment::Custom(p) => {
            let input = p
                .input
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("custom needs an input edge list".into()))?;
            let g = read_edge_list(input)?;
            let cfg = match &p.attributes {
                Some(path) => read_node_attributes(path, g.n())?,
                None => AbsorptionConfig::uniform_h(DVector::from_element(g.n(), p.delta), p.sweep.h)?,
            };
            let opt = OptimizerConfig {
                restarts: p.restarts,
                ..OptimizerConfig::with_seed(seed)
            };
            let ts = p.sweep.times(&g, &cfg)?;
            let sweep = markov_time_sweep(&g, &cfg, p.sweep.kind, &ts, &opt);
            art.write(&format!("{stem}.csv"), &sweep.to_csv())?;
            let failures = sweep.errors.iter().flatten().count();
            Ok(json!({ "nodes": g.n(), "times": ts.len(), "failures": failures }))
        }
    }
}

/// Codelength of every partition of the 3-node graph against `δ₂`.
#[derive(Debug, Clone)]
pub struct ThreeNodeTable {
    pub delta2: Vec<f64>,
    pub partitions: Vec<Partition>,
    /// `values[i][k]`: partition `k` at `delta2[i]`.
    pub values: Vec<Vec<f64>>,
}

impl ThreeNodeTable {
    pub fn argmin(&self, row: usize) -> usize {
        self.values[row]
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap()
    }

    /// Column names: blocks joined by `|`, node ids inside a block.
    pub fn column_names(&self) -> Vec<String> {
        self.partitions.iter().map(partition_label).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("delta2,{},argmin\n", self.column_names().join(","));
        let names = self.column_names();
        for (i, d) in self.delta2.iter().enumerate() {
            let vals: Vec<String> = self.values[i].iter().map(|v| v.to_string()).collect();
            writeln!(out, "{d},{},{}", vals.join(","), names[self.argmin(i)]).unwrap();
        }
        out
    }

    fn summary(&self) -> Value {
        let names = self.column_names();
        let winners: Vec<&String> = (0..self.delta2.len()).map(|i| &names[self.argmin(i)]).collect();
        json!({ "partitions": names, "argmin": winners })
    }
}

pub fn partition_label(p: &Partition) -> String {
    p.communities()
        .iter()
        .map(|c| c.iter().map(|v| v.to_string()).collect::<String>())
        .collect::<Vec<_>>()
        .join("|")
}

/// `L^(a)` (when `absorbing`) or the linear-input map function over the `δ₂` grid.
pub fn three_node_table(p: &ThreeNodeParams, absorbing: bool) -> Result<ThreeNodeTable> {
    let g = three_node();
    let partitions = enumerate_partitions(3);
    let delta2 = p.delta2.times();
    let mut values = Vec::with_capacity(delta2.len());
    for &d2 in &delta2 {
        let mut delta = three_node_delta(d2);
        delta[0] = p.delta_outer;
        delta[2] = p.delta_outer;
        let row = if absorbing {
            partitions
                .iter()
                .map(|m| absorbing_map(m, &g, &delta, None).map(|b| b.total))
                .collect::<Result<Vec<_>>>()?
        } else {
            let pl = transition_linear(&g, &AbsorptionConfig::unscaled(delta)?, p.t)?;
            partitions
                .iter()
                .map(|m| standard_map(m, &pl).map(|b| b.total))
                .collect::<Result<Vec<_>>>()?
        };
        values.push(row);
    }
    Ok(ThreeNodeTable {
        delta2,
        partitions,
        values,
    })
}

#[derive(Debug, Clone)]
pub struct LabeledSweep {
    pub spec: SweepSpec,
    pub result: SweepResult,
}

pub fn run_sweeps(
    g: &WeightedDigraph,
    delta: &DVector<f64>,
    specs: &[SweepSpec],
    opt: &OptimizerConfig,
) -> Result<Vec<LabeledSweep>> {
    specs
        .iter()
        .map(|s| {
            let cfg = AbsorptionConfig::uniform_h(delta.clone(), s.h)?;
            let ts = s.times(g, &cfg)?;
            Ok(LabeledSweep {
                spec: *s,
                result: markov_time_sweep(g, &cfg, s.kind, &ts, opt),
            })
        })
        .collect()
}

fn kind_name(k: InputKind) -> &'static str {
    match k {
        InputKind::Linear => "linear",
        InputKind::Exponential => "exponential",
    }
}

fn sweeps_csv(sweeps: &[LabeledSweep], target: Option<&Partition>) -> String {
    let mut out = String::from("input,h,t,num_communities,codelength");
    if target.is_some() {
        out.push_str(",planted");
    }
    out.push('\n');
    for s in sweeps {
        let r = &s.result;
        for i in 0..r.times.len() {
            let count = r.community_counts[i].map(|c| c.to_string()).unwrap_or_default();
            let len = r.codelengths[i].map(|c| c.to_string()).unwrap_or_default();
            write!(out, "{},{},{},{count},{len}", kind_name(s.spec.kind), s.spec.h, r.times[i]).unwrap();
            if let Some(t) = target {
                let hit = r.partitions[i].as_ref().is_some_and(|p| p == t);
                write!(out, ",{}", hit as u8).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

fn sweeps_summary(sweeps: &[LabeledSweep], target: &Partition) -> Value {
    Value::Array(
        sweeps
            .iter()
            .map(|s| {
                json!({
                    "input": kind_name(s.spec.kind),
                    "h": s.spec.h,
                    "target_intervals": s.result.plateaus(|p| p == target),
                    "failures": s.result.errors.iter().flatten().count(),
                })
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in EXPERIMENT_NAMES {
            assert_eq!(Experiment::by_name(name).unwrap().name(), name);
        }
        assert!(Experiment::by_name("nope").is_none());
    }

    #[test]
    fn dotted_overrides() {
        let mut e = Experiment::by_name("sir-stages").unwrap();
        e.set("experiment.simulations", "7").unwrap();
        e.set("per_run", "true").unwrap();
        let Experiment::SirStages(p) = &e else { panic!() };
        assert_eq!(p.experiment.simulations, 7);
        assert!(p.per_run);
        let mut f = Experiment::by_name("fourclique-sweep").unwrap();
        f.set("sweeps.2.h", "1.0").unwrap();
        assert!(f.set("sweeps.9.h", "1.0").is_err());
        assert!(f.set("bogus", "1").is_err());
        assert!(f.set("restarts", "\"many\"").is_err());
    }

    #[test]
    fn time_grid_endpoints() {
        let g = TimeGrid::new(0.1, 10.0, 50);
        let ts = g.times();
        assert_eq!(ts.len(), 50);
        assert_eq!(ts[0], 0.1);
        assert!((ts[49] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn partition_labels() {
        assert_eq!(partition_label(&Partition::new(&[0, 1, 0]).unwrap()), "02|1");
    }
}
