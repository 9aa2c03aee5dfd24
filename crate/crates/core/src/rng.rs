//! Seed derivation and deterministic parallel Monte Carlo.
//!
//! Every randomized routine draws from a `ChaCha8Rng` seeded by
//! [`derive_seed`]`(seed, stream)`. Monte Carlo work is split into fixed-size
//! chunks whose seeds depend only on the chunk index, and chunk results are
//! reduced in index order, so estimates are bit-identical for any rayon pool
//! size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type Rng = ChaCha8Rng;

/// Default seed used by the CLI and by examples when none is given.
pub const DEFAULT_SEED: u64 = 0x6d64_726c_6162_0001;

/// Samples per Monte Carlo chunk. Changing this changes every estimate.
const CHUNK: usize = 4096;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a stream index into an independent 64-bit seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(stream.wrapping_mul(0xd6e8_feb8_6659_fd93)))
}

pub fn rng_for(seed: u64, stream: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, stream))
}

/// Mean and standard error of a scalar Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Runs `samples` independent draws of `draw` and returns mean and standard
/// error. Each chunk of draws gets its own derived RNG.
pub fn monte_carlo<F>(samples: usize, seed: u64, draw: F) -> McEstimate
where
    F: Fn(&mut Rng) -> f64 + Sync,
{
    let sums = monte_carlo_vec(samples, seed, 1, |rng, out| out[0] = draw(rng));
    sums.into_iter().next().expect("one component")
}

/// Vector-valued variant of [`monte_carlo`]: `draw` fills `dim` components
/// per sample and every component is averaged separately.
pub fn monte_carlo_vec<F>(samples: usize, seed: u64, dim: usize, draw: F) -> Vec<McEstimate>
where
    F: Fn(&mut Rng, &mut [f64]) + Sync,
{
    assert!(samples > 0, "monte carlo needs at least one sample");
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut sum = vec![0.0; dim];
            let mut sum_sq = vec![0.0; dim];
            let mut buf = vec![0.0; dim];
            for _ in 0..count {
                buf.iter_mut().for_each(|b| *b = 0.0);
                draw(&mut rng, &mut buf);
                for i in 0..dim {
                    sum[i] += buf[i];
                    sum_sq[i] += buf[i] * buf[i];
                }
            }
            (sum, sum_sq)
        })
        .collect();
    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    for (s, q) in &partial {
        for i in 0..dim {
            sum[i] += s[i];
            sum_sq[i] += q[i];
        }
    }
    let n = samples as f64;
    (0..dim)
        .map(|i| {
            let mean = sum[i] / n;
            let var = if samples > 1 {
                ((sum_sq[i] - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            McEstimate {
                mean,
                std_error: (var / n).sqrt(),
                samples,
            }
        })
        .collect()
}
