use mdrlab::jl::{jl_transform, JlMode, TransformOptions};
use mdrlab::metric::{bourgain_embed, distortion_to_cloud, FiniteMetric};
use mdrlab::rng::derive_seed;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub n: usize,
    pub alpha_total: f64,
    /// Measured distortion of the Bourgain embedding.
    pub bourgain_distortion: f64,
    pub bourgain_dim: usize,
    pub span_dim: usize,
    /// Distortion left for the JL step: `alpha_total / bourgain_distortion`.
    pub jl_budget: f64,
    /// Target dimension of the JL step; absent when it would not reduce.
    pub jl_k: Option<u64>,
    pub jl_attempts: usize,
    pub final_dim: usize,
    /// Measured end-to-end distortion from the input metric.
    pub distortion: f64,
}

/// Bourgain-embeds `m` into ℓ₂, drops to the span of the image, and
/// JL-reduces with the remaining distortion budget.
pub fn embed_reduce(
    m: &FiniteMetric,
    alpha_total: f64,
    mode: &dyn JlMode,
    seed: u64,
    max_retries: usize,
) -> Result<PipelineReport, CliError> {
    let n = m.len();
    let embedded = bourgain_embed(m, derive_seed(seed, 0))?;
    let alpha1 = distortion_to_cloud(m, &embedded)?.distortion;
    if !(alpha_total > alpha1) {
        return Err(CliError::new(
            "BudgetInfeasible",
            format!("alpha_total = {alpha_total} does not exceed the measured Bourgain distortion {alpha1}"),
        ));
    }
    let budget = alpha_total / alpha1;
    let span = embedded.reduce_to_span(0);
    let k = if n >= 5 {
        Some(mode.min_dim(n as u64, budget)?).filter(|&k| (k as usize) < span.dim())
    } else {
        None
    };
    let (cloud, attempts) = match k {
        Some(k) => {
            let opts = TransformOptions {
                alpha: budget,
                seed: derive_seed(seed, 1),
                max_retries,
                k: Some(k),
            };
            let out = jl_transform(&span, mode, &opts)?;
            (out.cloud, out.attempts)
        }
        None => (span.clone(), 0),
    };
    Ok(PipelineReport {
        n,
        alpha_total,
        bourgain_distortion: alpha1,
        bourgain_dim: embedded.dim(),
        span_dim: span.dim(),
        jl_budget: budget,
        jl_k: k,
        jl_attempts: attempts,
        final_dim: cloud.dim(),
        distortion: distortion_to_cloud(m, &cloud)?.distortion,
    })
}
