// Community structure inside one planted lattice at the first, a middle and
// the last stage, using recovery rates as absorption rates with H = 0.
use absorbmap::epidemic::{build_network, stage_schedule, RingLatticeSpec, SirParams};
use absorbmap::optimizer::{solve_at, subcommunities, InputKind, OptimizerConfig};

fn main() -> absorbmap::error::Result<()> {
    let spec = RingLatticeSpec::default();
    let net = build_network(&spec)?;
    let schedule = stage_schedule(&net, &SirParams::default(), 68, 0)?;
    let lattice = 4;
    let planted: Vec<usize> = spec.lattice_nodes(lattice).collect();
    let opt = OptimizerConfig {
        restarts: 4,
        ..OptimizerConfig::with_seed(0)
    };
    for stage in [1, 29, 68] {
        let cfg = schedule[stage - 1].absorption()?;
        let o = solve_at(&net.graph, &cfg, InputKind::Exponential, 0.025, &opt)?;
        let fast: Vec<usize> = planted.iter().copied().filter(|&v| cfg.delta()[v] > 0.2).collect();
        println!("stage {stage}: {} communities overall; fast nodes here {fast:?}", o.partition.num_communities());
        println!("  pieces of lattice {lattice}: {:?}", subcommunities(&o.partition, &planted));
    }
    Ok(())
}
