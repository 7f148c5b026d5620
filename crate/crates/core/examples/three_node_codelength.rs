// Codelength of every partition of the 3-node graph as the middle node's
// absorption rate grows. Isolating the middle node always wins.
use absorbmap::experiments::{partition_label, three_node_table, ThreeNodeParams, TimeGrid};
use absorbmap::mapeq::{absorbing_map, pi0_for_equivalence, standard_map};
use absorbmap::markov::p_delta;
use absorbmap::networks::{three_node, three_node_delta};
use absorbmap::partition::enumerate_partitions;

fn main() -> absorbmap::error::Result<()> {
    let params = ThreeNodeParams {
        delta2: TimeGrid::new(0.1, 10.0, 8),
        ..Default::default()
    };
    let table = three_node_table(&params, true)?;
    println!("{:>8} {}", "delta2", table.column_names().iter().map(|c| format!("{c:>8}")).collect::<String>());
    for (i, d) in table.delta2.iter().enumerate() {
        let row: String = table.values[i].iter().map(|v| format!("{v:8.4}")).collect();
        println!("{d:8.3} {row}   best {}", partition_label(&table.partitions[table.argmin(i)]));
    }

    // with the right initial distribution the absorbing codelength equals
    // the ordinary map function of P_delta
    let g = three_node();
    let delta = three_node_delta(1.0);
    let pi0 = pi0_for_equivalence(&g, &delta)?;
    let pd = p_delta(&g, &delta)?;
    for m in enumerate_partitions(3) {
        let a = absorbing_map(&m, &g, &delta, Some(&pi0))?.total;
        let b = standard_map(&m, &pd)?.total;
        println!("{:>6}: {a:.12} vs {b:.12}", partition_label(&m));
    }
    Ok(())
}
