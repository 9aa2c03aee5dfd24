//! Johnson–Lindenstrauss dimension calculators and random transforms.

mod gaussian;
mod haar;
mod modes;
mod psi;
mod transform;

pub use gaussian::{
    gaussian_failure_cdf, gaussian_failure_quadrature, gaussian_scaling, gaussian_success_prob,
    jl_min_dim_gaussian,
};
pub use haar::{sample_haar_orthogonal, sample_haar_with};
pub use modes::{jl_mode, jl_modes, HaarProjection, JlMode, ScaledGaussian};
pub use psi::{
    jl_min_dim_projection, ln_psi_failure, ln_sigma_max, projection_feasible, psi,
    psi_with_constant, sigma_max, PsiConstant,
};
pub use transform::{
    gaussian_monte_carlo, jl_plan, jl_transform, psi_monte_carlo, JlOutcome, JlPlan,
    TransformOptions,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::MetricError;
use crate::special::QuadError;

#[derive(Debug, Error)]
pub enum JlError {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),
    #[error("scaling overflows f64: ln sigma = {ln_sigma}")]
    Overflow { ln_sigma: f64 },
    #[error("no feasible target dimension; the trivial bound is {fallback}")]
    NoFeasibleK { fallback: u64 },
    #[error("closed-form estimate invalid at this alpha: denominator {0:e} is not positive")]
    DenominatorNonpositive(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("quadrature {quadrature} and chi-square cdf {cdf} disagree")]
    CrossCheck { quadrature: f64, cdf: f64 },
    #[error("no attempt met the distortion bound; best measured distortion {}", .0.measured.distortion)]
    RetriesExhausted(Box<JlOutcome>),
    #[error("points {0} and {1} coincide")]
    ZeroDistancePair(usize, usize),
    #[error("random projections need an l2 point cloud")]
    NotEuclidean,
    #[error("unknown JL mode {0:?}")]
    UnknownMode(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// How a probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ChiSquareCdf,
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
}

impl ProbabilityEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        ProbabilityEstimate {
            value,
            std_error: 0.0,
            method,
        }
    }

    /// Whether `other` lies within `z` combined standard errors of `self`.
    ///
    /// A Monte Carlo side whose sample frequency is 0 or 1 reports a zero
    /// standard error; its error is then taken as the binomial one at the
    /// other side's value.
    pub fn agrees_with(&self, other: &ProbabilityEstimate, z: f64) -> bool {
        let se = (self.binomial_floor(other.value).powi(2) + other.binomial_floor(self.value).powi(2)).sqrt();
        (self.value - other.value).abs() <= z * se
    }

    fn binomial_floor(&self, p: f64) -> f64 {
        match self.method {
            Method::MonteCarlo { samples } if samples > 0 => {
                let p = p.clamp(0.0, 1.0);
                self.std_error.max((p * (1.0 - p) / samples as f64).sqrt())
            }
            _ => self.std_error,
        }
    }
}
