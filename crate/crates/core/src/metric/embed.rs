use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{FiniteMetric, MetricError, Norm, PointCloud};
use crate::rng::rng_for;

/// Bi-Lipschitz summary of a map between finite metric spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub distortion: f64,
    pub scale: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub avg_ratio: f64,
}

/// Distortion of `i -> map[i]` from `source` into `target`.
pub fn distortion(
    source: &FiniteMetric,
    target: &FiniteMetric,
    map: &[usize],
) -> Result<EmbeddingReport, MetricError> {
    let n = source.len();
    if map.len() != n {
        return Err(MetricError::MapLength {
            expected: n,
            got: map.len(),
        });
    }
    if let Some(&index) = map.iter().find(|&&f| f >= target.len()) {
        return Err(MetricError::MapOutOfRange {
            index,
            len: target.len(),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if map[i] == map[j] {
                return Err(MetricError::NonInjectiveMap(i, j));
            }
        }
    }
    report(n, |i, j| source.d(i, j), |i, j| target.d(map[i], map[j]))
}

/// Distortion of `i -> row i of cloud` under the cloud's host norm.
pub fn distortion_to_cloud(
    source: &FiniteMetric,
    cloud: &PointCloud,
) -> Result<EmbeddingReport, MetricError> {
    if cloud.len() != source.len() {
        return Err(MetricError::MapLength {
            expected: source.len(),
            got: cloud.len(),
        });
    }
    report(source.len(), |i, j| source.d(i, j), |i, j| cloud.distance(i, j))
}

pub(crate) fn report<S, T>(n: usize, src: S, tgt: T) -> Result<EmbeddingReport, MetricError>
where
    S: Fn(usize, usize) -> f64,
    T: Fn(usize, usize) -> f64,
{
    if n < 2 {
        return Err(MetricError::DegenerateSource);
    }
    let mut expansion = 0.0f64;
    let mut contraction = f64::INFINITY;
    let (mut sum_src, mut sum_tgt) = (0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let (ds, dt) = (src(i, j), tgt(i, j));
            if dt <= 0.0 {
                return Err(MetricError::CollapsedPair(i, j));
            }
            let r = dt / ds;
            expansion = expansion.max(r);
            contraction = contraction.min(r);
            sum_src += ds;
            sum_tgt += dt;
        }
    }
    Ok(EmbeddingReport {
        distortion: (expansion / contraction).max(1.0),
        scale: contraction,
        expansion,
        contraction,
        avg_ratio: sum_tgt / sum_src,
    })
}

/// Isometric embedding into `ℓ∞^n`: point `i` goes to its row of distances.
pub fn frechet_embed(m: &FiniteMetric) -> PointCloud {
    PointCloud::new(m.matrix().clone(), Norm::Linf).expect("linf is a valid norm")
}

/// Number of random subsets drawn at each density scale.
pub fn bourgain_subsets_per_scale(n: usize) -> usize {
    ((24.0 * (n as f64).log2()).ceil() as usize).max(1)
}

/// Randomized Bourgain embedding into `ℓ₂`.
///
/// For each scale `j = 1..=⌈log₂ n⌉` draws subsets that contain each point
/// independently with probability `2^-j` (empty draws are redrawn); the
/// coordinate of `x` is `d(x, S)`. Coordinates are divided by `√D` so the map
/// is 1-Lipschitz.
pub fn bourgain_embed(m: &FiniteMetric, seed: u64) -> Result<PointCloud, MetricError> {
    let n = m.len();
    if n < 2 {
        return Err(MetricError::TooFewPoints { need: 2, got: n });
    }
    let scales = (n as f64).log2().ceil() as usize;
    let per = bourgain_subsets_per_scale(n);
    let dims = scales * per;
    let norm = 1.0 / (dims as f64).sqrt();
    let mut rng = rng_for(seed, 0);
    let mut coords = DMatrix::zeros(n, dims);
    let mut member = vec![false; n];
    for j in 1..=scales {
        let p = 0.5f64.powi(j as i32);
        for s in 0..per {
            loop {
                for b in member.iter_mut() {
                    *b = rng.random::<f64>() < p;
                }
                if member.iter().any(|&b| b) {
                    break;
                }
            }
            let col = (j - 1) * per + s;
            for x in 0..n {
                let d = (0..n)
                    .filter(|&y| member[y])
                    .map(|y| m.d(x, y))
                    .fold(f64::INFINITY, f64::min);
                coords[(x, col)] = d * norm;
            }
        }
    }
    PointCloud::new(coords, Norm::L2)
}

/// The `θ`-snowflake `d^θ`.
pub fn snowflake(m: &FiniteMetric, theta: f64) -> Result<FiniteMetric, MetricError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(MetricError::ThetaOutOfRange(theta));
    }
    if theta == 1.0 {
        return Ok(m.clone());
    }
    FiniteMetric::new(m.matrix().map(|d| d.powf(theta)))
}
