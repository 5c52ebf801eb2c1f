//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvlab_core::doubling::{FiniteMetricSpace, MFunction};

/// `n` random points in the unit square with `M = 1/(1e-3 + |x - c|²)`,
/// `D` = all points.
pub fn peaked_space(n: usize, seed: u64) -> (FiniteMetricSpace, MFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    let c: (f64, f64) = (rng.gen(), rng.gen());
    let dist = pts.iter().map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect()).collect();
    let all: Vec<usize> = (0..n).collect();
    let space = FiniteMetricSpace::new(dist, &all).expect("euclidean points form a metric space");
    let m = MFunction::from_fn(&space, |i| 1.0 / (1e-3 + (pts[i].0 - c.0).powi(2) + (pts[i].1 - c.1).powi(2))).expect("positive");
    (space, m)
}
