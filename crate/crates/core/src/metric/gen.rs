//! Random instances for tests, suites and sweeps.

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::{FiniteMetric, Norm, PointCloud};
use crate::rng::rng_for;

/// Shortest-path closure of uniform `[0.5, 2]` edge weights on `K_n`.
pub fn random_metric(n: usize, seed: u64) -> FiniteMetric {
    let mut rng = rng_for(seed, 0x6d65);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.random_range(0.5..2.0);
            d[(i, j)] = w;
            d[(j, i)] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[(i, k)] + d[(k, j)];
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
    FiniteMetric::new(d).expect("shortest-path closure is a metric")
}

/// `n` standard Gaussian points in `ℝ^dim`.
pub fn random_cloud(n: usize, dim: usize, norm: Norm, seed: u64) -> PointCloud {
    let mut rng = rng_for(seed, 0x636c);
    let coords = DMatrix::from_fn(n, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    PointCloud::new(coords, norm).expect("valid norm")
}
