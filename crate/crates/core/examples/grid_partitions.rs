// 6x6 grid whose quadrants absorb at different rates. The linear input keeps
// only the slowest quadrant together; the exponential one with H = I finds
// all four.
use absorbmap::graph::AbsorptionConfig;
use absorbmap::networks::{GridSpec, GRID_SIDE};
use absorbmap::optimizer::{solve_at, InputKind, OptimizerConfig};

fn main() -> absorbmap::error::Result<()> {
    let spec = GridSpec::default();
    let g = spec.graph()?;
    let opt = OptimizerConfig::with_seed(3);
    for (kind, h, t) in [(InputKind::Linear, 0.0, 0.04), (InputKind::Exponential, 1.0, 5.25)] {
        let cfg = AbsorptionConfig::uniform_h(spec.delta(), h)?;
        let o = solve_at(&g, &cfg, kind, t, &opt)?;
        println!("{kind:?} H={h} t={t}: {} communities, L = {:.4}", o.partition.num_communities(), o.codelength);
        for r in 0..GRID_SIDE {
            let row: Vec<String> = (0..GRID_SIDE)
                .map(|c| format!("{:>3}", o.partition.label(r * GRID_SIDE + c)))
                .collect();
            println!("  {}", row.join(""));
        }
    }
    Ok(())
}
