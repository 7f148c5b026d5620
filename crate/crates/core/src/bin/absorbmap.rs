use std::path::{Path, PathBuf};
use std::process::ExitCode;

use absorbmap::absinv::identity_report;
use absorbmap::experiments::{run, Descriptor, Experiment, Sidecar, EXPERIMENT_NAMES};
use absorbmap::graph::{AbsorptionConfig, WeightedDigraph};
use absorbmap::io::{read_edge_list, read_node_attributes};
use absorbmap::optimizer::{solve_at, InputKind, OptimizerConfig};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

const SEED_VAR: &str = "ABSORBMAP_SEED";

#[derive(Parser)]
#[command(name = "absorbmap", version, about = "Community detection for absorbing random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment and write CSV tables plus a JSON sidecar.
    Run(RunArgs),
    /// Optimize the map function for one Markov time and print the partition as CSV.
    Partition(PartitionArgs),
    /// Print identity residuals for one graph.
    Identities(IdentityArgs),
    /// List experiment names.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name; may be omitted with --config.
    name: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Rerun from a sidecar written by an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter override as dotted.path=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Edge list for the custom experiment.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Node attribute file for the custom experiment.
    #[arg(long)]
    attributes: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list: `src dst weight` per line.
    #[arg(long)]
    input: PathBuf,
    /// Node attributes: `node delta [h]` per line.
    #[arg(long, conflicts_with = "delta")]
    attributes: Option<PathBuf>,
    /// Uniform absorption rate when no attribute file is given.
    #[arg(long)]
    delta: Option<f64>,
    /// Uniform scale H used with --delta.
    #[arg(long, default_value_t = 0.0)]
    h: f64,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    kind: InputKind,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IdentityArgs {
    #[command(flatten)]
    graph: GraphArgs,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<absorbmap::error::Error> for Failure {
    fn from(e: absorbmap::error::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("{SEED_VAR} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

// explicit flag, then environment, then whatever the descriptor carried
fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64, Failure> {
    Ok(flag.or(env_seed()?).unwrap_or(fallback))
}

fn load_graph(args: &GraphArgs) -> Result<(WeightedDigraph, AbsorptionConfig), Failure> {
    let g = read_edge_list(&args.input)?;
    let cfg = match (&args.attributes, args.delta) {
        (Some(path), _) => read_node_attributes(path, g.n())?,
        (None, Some(d)) => AbsorptionConfig::uniform_h(DVector::from_element(g.n(), d), args.h)?,
        (None, None) => return Err(Failure::Usage("give --attributes or --delta".into())),
    };
    Ok((g, cfg))
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let (mut experiment, base_seed) = match (&args.config, &args.name) {
        (Some(path), name) => {
            let sc = Sidecar::read(path)?;
            if let Some(n) = name {
                if n != sc.descriptor.experiment.name() {
                    return Err(Failure::Usage(format!(
                        "{n} does not match the sidecar experiment {}",
                        sc.descriptor.experiment.name()
                    )));
                }
            }
            (sc.descriptor.experiment, sc.descriptor.seed)
        }
        (None, Some(name)) => {
            let e = Experiment::by_name(name).ok_or_else(|| {
                Failure::Usage(format!(
                    "unknown experiment {name:?}; expected one of {}",
                    EXPERIMENT_NAMES.join(", ")
                ))
            })?;
            (e, 0)
        }
        (None, None) => return Err(Failure::Usage("give an experiment name or --config".into())),
    };
    let mut sets = args.sets.clone();
    for (key, path) in [("input", &args.input), ("attributes", &args.attributes)] {
        if let Some(p) = path {
            if !matches!(experiment, Experiment::Custom(_)) {
                return Err(Failure::Usage(format!("--{key} only applies to the custom experiment")));
            }
            sets.push(format!("{key}={}", serde_json::to_string(p).unwrap()));
        }
    }
    for s in &sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got {s:?}")))?;
        experiment.set(k, v).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Experiment::Custom(p) = &experiment {
        if p.input.is_none() {
            return Err(Failure::Usage("custom needs --input".into()));
        }
    }
    let desc = Descriptor {
        experiment,
        seed: resolve_seed(args.seed, base_seed)?,
    };
    let report = run(&desc, &args.out)?;
    for a in &report.sidecar.artifacts {
        println!("{}", args.out.join(a).display());
    }
    Ok(())
}

fn cmd_partition(args: PartitionArgs) -> Result<(), Failure> {
    let (g, cfg) = load_graph(&args.graph)?;
    let opt = OptimizerConfig {
        restarts: args.restarts,
        ..OptimizerConfig::with_seed(resolve_seed(args.seed, 0)?)
    };
    let o = solve_at(&g, &cfg, args.kind, args.t, &opt)?;
    let csv = o.partition.to_csv();
    match &args.output {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    eprintln!(
        "{} communities, codelength {:.6} bits",
        o.partition.num_communities(),
        o.codelength
    );
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn cmd_identities(args: IdentityArgs) -> Result<(), Failure> {
    let (g, cfg) = load_graph(&args.graph)?;
    let report = identity_report(&g, cfg.delta())?;
    println!("identity,residual");
    for (name, v) in report.entries() {
        println!("{name},{v:e}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Identities(a) => cmd_identities(a),
        Command::List => {
            EXPERIMENT_NAMES.iter().for_each(|n| println!("{n}"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
