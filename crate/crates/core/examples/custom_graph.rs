// Reading a graph and node attributes from text, then partitioning it.
use absorbmap::io::{parse_edge_list, parse_node_attributes};
use absorbmap::optimizer::{solve_at, InputKind, OptimizerConfig};

const EDGES: &str = "\
# src dst weight
0 1 1
1 0 1
1 2 1
2 0 1
2 3 0.2
3 4 1
4 5 1
5 3 1
4 3 1
5 2 0.2
";

const ATTRS: &str = "\
# node delta h
0 0.1 1
1 0.1 1
2 0.1 1
3 2.0 1
4 2.0 1
5 2.0 1
";

fn main() -> absorbmap::error::Result<()> {
    let g = parse_edge_list(EDGES, None)?;
    let cfg = parse_node_attributes(ATTRS, g.n())?;
    for t in [0.5, 2.0, 8.0] {
        let o = solve_at(&g, &cfg, InputKind::Exponential, t, &OptimizerConfig::with_seed(0))?;
        print!("t = {t}: L = {:.4}\n{}", o.codelength, o.partition.to_csv());
    }
    Ok(())
}
