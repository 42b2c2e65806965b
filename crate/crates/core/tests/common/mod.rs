//! Shared helpers for the integration suites: seeded random models.

use perispec::{PeriodicGraph, Potential, Theta};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random admissible quotient graph with d <= 2 and at most 8 cell vertices:
/// every unordered pair carries at most one offset and self-pairs are never
/// produced.
pub fn random_admissible_graph(rng: &mut ChaCha8Rng) -> PeriodicGraph {
    let d = rng.random_range(1..=2usize);
    let nu = rng.random_range(1..=8u32);
    let mut edges = Vec::new();
    for u in 0..nu {
        for v in (u + 1)..nu {
            if rng.random_bool(0.4) {
                let offset: Vec<i64> = (0..d).map(|_| rng.random_range(-2..=2i64)).collect();
                edges.push((u, v, offset));
            }
        }
    }
    PeriodicGraph::new(d, nu, edges).expect("generator produces valid graphs")
}

/// Potential drawing each vertex value from {0, 1, 2}.
pub fn random_three_valued_potential(rng: &mut ChaCha8Rng, nu: usize) -> Potential {
    let values = (0..nu)
        .map(|_| rng.random_range(0..3) as f64)
        .collect();
    Potential::new(values).unwrap()
}

pub fn random_theta(rng: &mut ChaCha8Rng, d: usize) -> Theta {
    Theta::new((0..d).map(|_| rng.random::<f64>()).collect())
}
