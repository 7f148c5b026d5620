// Absorbing chain on a small directed graph: expected visits, times to
// absorption, and where the walk tends to be just before it is absorbed.
use absorbmap::graph::WeightedDigraph;
use absorbmap::markov::{absorbing_chain, fundamental, p_delta, pi_delta_abs, self_transition_times, StationaryDistribution};
use nalgebra::DVector;

fn main() -> absorbmap::error::Result<()> {
    let g = WeightedDigraph::from_edges(
        4,
        &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.0), (2, 3, 0.5), (3, 0, 1.0), (1, 3, 1.0)],
    )?;
    let delta = DVector::from_vec(vec![0.05, 0.2, 0.05, 1.0]);
    let chain = absorbing_chain(&g, &delta)?;
    let f = fundamental(&chain)?;
    println!("N (expected visits to i starting from j):{}", f.n());
    println!("expected steps before absorption: {}", f.t().transpose());

    let last = pi_delta_abs(&f, &StationaryDistribution::uniform(4))?;
    println!("last node before absorption, uniform start: {}", last.as_vector().transpose());

    // P_delta folds absorption back in as a self-loop; these are the mean
    // numbers of steps until that self-loop fires
    let theta = self_transition_times(&p_delta(&g, &delta)?)?;
    println!("mean steps to first self-transition: {}", theta.transpose());
    Ok(())
}
