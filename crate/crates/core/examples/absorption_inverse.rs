// Absorption inverse of a random digraph and the identities tying it to the
// group inverse and to the fundamental matrix (L + D)^-1.
use absorbmap::absinv::{absorption_inverse, absinv_first_order_error, identity_report, random_instance};
use absorbmap::graph::WeightedDigraph;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> absorbmap::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (g, delta) = random_instance(6, &mut rng);
    let ld = absorption_inverse(&g, &delta)?;
    println!("absorption inverse:{}", ld.matrix());
    for (name, r) in identity_report(&g, &delta)?.entries() {
        println!("{name:>34}  {r:.2e}");
    }

    // as rates shrink, (L + D)^-1 minus the projector approaches L^delta
    let ring = WeightedDigraph::from_undirected_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 0, 1.0)])?;
    for eps in [1e-1, 1e-2, 1e-3] {
        let e = absinv_first_order_error(&ring, &DVector::from_element(5, eps))?;
        println!("epsilon {:.1e}: error {:.3e}", e.epsilon, e.error);
    }
    Ok(())
}
