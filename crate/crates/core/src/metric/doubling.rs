use super::{FiniteMetric, MetricError};

/// Largest metric accepted by the exact set-cover estimator.
pub const MAX_EXACT_POINTS: usize = 16;

/// Strategy for covering a ball by balls of half its radius.
pub trait DoublingEstimator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Number of half-radius balls used to cover `ball`, given the
    /// half-radius balls available as bitmasks over the points.
    fn cover(&self, ball: u64, candidates: &[u64]) -> usize;

    fn max_points(&self) -> usize {
        usize::MAX
    }
}

/// Minimum set cover by iterative deepening.
pub struct ExactCover;

/// Greedy set cover; an upper bound on the exact value.
pub struct GreedyCover;

impl DoublingEstimator for ExactCover {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn cover(&self, ball: u64, candidates: &[u64]) -> usize {
        let useful: Vec<u64> = candidates
            .iter()
            .map(|c| c & ball)
            .filter(|&c| c != 0)
            .collect();
        let mut limit = 1;
        loop {
            if covers_within(ball, &useful, limit) {
                return limit;
            }
            limit += 1;
        }
    }

    fn max_points(&self) -> usize {
        MAX_EXACT_POINTS
    }
}

fn covers_within(uncovered: u64, sets: &[u64], limit: usize) -> bool {
    if uncovered == 0 {
        return true;
    }
    if limit == 0 {
        return false;
    }
    let low = uncovered & uncovered.wrapping_neg();
    sets.iter()
        .filter(|&&s| s & low != 0)
        .any(|&s| covers_within(uncovered & !s, sets, limit - 1))
}

impl DoublingEstimator for GreedyCover {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn cover(&self, ball: u64, candidates: &[u64]) -> usize {
        let mut left = ball;
        let mut used = 0;
        while left != 0 {
            let best = candidates
                .iter()
                .max_by_key(|&&c| (c & left).count_ones())
                .expect("every point is in its own ball");
            left &= !best;
            used += 1;
        }
        used
    }
}

pub fn doubling_estimators() -> Vec<Box<dyn DoublingEstimator>> {
    vec![Box::new(ExactCover), Box::new(GreedyCover)]
}

pub fn doubling_estimator(name: &str) -> Result<Box<dyn DoublingEstimator>, MetricError> {
    doubling_estimators()
        .into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| MetricError::UnknownEstimator(name.to_string()))
}

/// Doubling constant: the largest number of half-radius balls needed to cover
/// a ball `B(x, r)`, over every center `x` and every radius `r` in the row of
/// distances from `x`.
pub fn doubling_constant(
    m: &FiniteMetric,
    estimator: &dyn DoublingEstimator,
) -> Result<f64, MetricError> {
    let n = m.len();
    if n > estimator.max_points() {
        return Err(MetricError::TooLargeForExact {
            n,
            max: estimator.max_points(),
        });
    }
    if n > 64 {
        return Err(MetricError::TooLargeForExact { n, max: 64 });
    }
    let mut worst = 1;
    let mut radii: Vec<f64> = Vec::with_capacity(n);
    for x in 0..n {
        radii.clear();
        radii.extend((0..n).filter(|&y| y != x).map(|y| m.d(x, y)));
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        for &r in &radii {
            let ball = (0..n)
                .filter(|&y| m.d(x, y) <= r)
                .fold(0u64, |acc, y| acc | 1 << y);
            let half: Vec<u64> = (0..n)
                .map(|z| {
                    (0..n)
                        .filter(|&y| m.d(z, y) <= 0.5 * r)
                        .fold(0u64, |acc, y| acc | 1 << y)
                })
                .collect();
            worst = worst.max(estimator.cover(ball, &half));
        }
    }
    Ok(worst as f64)
}

/// Lower bound on the dimension of any normed space receiving `m` with
/// distortion `alpha`: `ln K / ln(4α + 1)`, where `K` is the size of a set
/// inside some ball `B(x, r)` whose points are pairwise more than `r/2`
/// apart. Sets are built greedily from each center outward.
pub fn doubling_dim_lower_bound(m: &FiniteMetric, alpha: f64) -> Result<f64, MetricError> {
    let n = m.len();
    if n < 2 {
        return Err(MetricError::TooFewPoints { need: 2, got: n });
    }
    if !(alpha >= 1.0) {
        return Err(MetricError::AlphaBelowOne(alpha));
    }
    let mut best = 1usize;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for x in 0..n {
        order.clear();
        order.extend(0..n);
        order.sort_by(|&a, &b| m.d(x, a).total_cmp(&m.d(x, b)));
        let mut radii: Vec<f64> = order.iter().skip(1).map(|&y| m.d(x, y)).collect();
        radii.dedup();
        for &r in &radii {
            chosen.clear();
            for &y in order.iter().take_while(|&&y| m.d(x, y) <= r) {
                if chosen.iter().all(|&z| m.d(y, z) > 0.5 * r) {
                    chosen.push(y);
                }
            }
            best = best.max(chosen.len());
        }
    }
    Ok((best as f64).ln() / (4.0 * alpha + 1.0).ln())
}

/// `ln n / ln(α + 1)`: the dimension forced by `n` points at mutual distance 1.
pub fn volumetric_lower_bound(n: u64, alpha: f64) -> Result<f64, MetricError> {
    if n < 2 {
        return Err(MetricError::TooFewPoints {
            need: 2,
            got: n as usize,
        });
    }
    if !(alpha >= 1.0) {
        return Err(MetricError::AlphaBelowOne(alpha));
    }
    Ok((n as f64).ln() / (alpha + 1.0).ln())
}
