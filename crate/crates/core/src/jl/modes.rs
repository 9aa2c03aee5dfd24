use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use super::{
    gaussian_failure_cdf, gaussian_scaling, gaussian_success_prob, jl_min_dim_gaussian,
    jl_min_dim_projection, ln_psi_failure, psi, sample_haar_with, sigma_max, JlError,
    ProbabilityEstimate,
};
use crate::rng::Rng;

/// A family of random linear maps `ℝ^D → ℝ^k` used for JL reductions.
///
/// `ambient` is `D + 1`: the point count of a simplex spanning `ℝ^D`.
pub trait JlMode: Send + Sync {
    fn name(&self) -> &'static str;

    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }

    /// Smallest target dimension for `n` points by the union bound.
    fn min_dim(&self, n: u64, alpha: f64) -> Result<u64, JlError>;

    /// Largest usable target dimension for the given ambient size.
    fn max_dim(&self, ambient: u64) -> u64;

    fn scaling(&self, ambient: u64, k: u64, alpha: f64) -> Result<f64, JlError>;

    fn pair_success(
        &self,
        ambient: u64,
        k: u64,
        alpha: f64,
        sigma: f64,
    ) -> Result<ProbabilityEstimate, JlError>;

    fn ln_pair_failure(&self, ambient: u64, k: u64, alpha: f64, sigma: f64)
        -> Result<f64, JlError>;

    /// Draws a `k × dim` matrix.
    fn sample(&self, k: usize, dim: usize, sigma: f64, rng: &mut Rng) -> DMatrix<f64>;
}

/// `σ_max` times the first `k` rows of a Haar orthogonal matrix.
pub struct HaarProjection;

/// `σ_g` times an i.i.d. standard Gaussian matrix.
pub struct ScaledGaussian;

impl JlMode for HaarProjection {
    fn name(&self) -> &'static str {
        "haar_projection"
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["haar", "projection"]
    }

    fn min_dim(&self, n: u64, alpha: f64) -> Result<u64, JlError> {
        jl_min_dim_projection(n, alpha)
    }

    fn max_dim(&self, ambient: u64) -> u64 {
        ambient.saturating_sub(4)
    }

    fn scaling(&self, ambient: u64, k: u64, alpha: f64) -> Result<f64, JlError> {
        sigma_max(ambient, k, alpha)
    }

    fn pair_success(
        &self,
        ambient: u64,
        k: u64,
        alpha: f64,
        sigma: f64,
    ) -> Result<ProbabilityEstimate, JlError> {
        psi(ambient, k, alpha, sigma)
    }

    fn ln_pair_failure(
        &self,
        ambient: u64,
        k: u64,
        alpha: f64,
        sigma: f64,
    ) -> Result<f64, JlError> {
        ln_psi_failure(ambient, k, alpha, sigma)
    }

    fn sample(&self, k: usize, dim: usize, sigma: f64, rng: &mut Rng) -> DMatrix<f64> {
        sample_haar_with(dim, rng).rows(0, k) * sigma
    }
}

impl JlMode for ScaledGaussian {
    fn name(&self) -> &'static str {
        "scaled_gaussian"
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["gaussian"]
    }

    fn min_dim(&self, n: u64, alpha: f64) -> Result<u64, JlError> {
        jl_min_dim_gaussian(n, alpha)
    }

    fn max_dim(&self, _ambient: u64) -> u64 {
        u64::MAX
    }

    fn scaling(&self, _ambient: u64, k: u64, alpha: f64) -> Result<f64, JlError> {
        gaussian_scaling(k, alpha)
    }

    fn pair_success(
        &self,
        _ambient: u64,
        k: u64,
        alpha: f64,
        sigma: f64,
    ) -> Result<ProbabilityEstimate, JlError> {
        check_optimal(k, alpha, sigma)?;
        gaussian_success_prob(k, alpha)
    }

    fn ln_pair_failure(
        &self,
        _ambient: u64,
        k: u64,
        alpha: f64,
        sigma: f64,
    ) -> Result<f64, JlError> {
        check_optimal(k, alpha, sigma)?;
        Ok(gaussian_failure_cdf(k, alpha)?.ln())
    }

    fn sample(&self, k: usize, dim: usize, sigma: f64, rng: &mut Rng) -> DMatrix<f64> {
        DMatrix::from_fn(k, dim, |_, _| {
            sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
        })
    }
}

fn check_optimal(k: u64, alpha: f64, sigma: f64) -> Result<(), JlError> {
    let s = gaussian_scaling(k, alpha)?;
    if (sigma - s).abs() > 1e-12 * s {
        return Err(JlError::ParameterDomain(format!(
            "gaussian probabilities are tabulated at the optimal scaling {s}, got {sigma}"
        )));
    }
    Ok(())
}

pub fn jl_modes() -> Vec<Box<dyn JlMode>> {
    vec![Box::new(HaarProjection), Box::new(ScaledGaussian)]
}

pub fn jl_mode(name: &str) -> Result<Box<dyn JlMode>, JlError> {
    jl_modes()
        .into_iter()
        .find(|m| m.name() == name || m.aliases().contains(&name))
        .ok_or_else(|| JlError::UnknownMode(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_names_and_aliases() {
        assert_eq!(jl_mode("haar").unwrap().name(), "haar_projection");
        assert_eq!(jl_mode("scaled_gaussian").unwrap().name(), "scaled_gaussian");
        assert_eq!(jl_mode("gaussian").unwrap().name(), "scaled_gaussian");
        assert!(matches!(jl_mode("sparse"), Err(JlError::UnknownMode(_))));
    }

    #[test]
    fn samples_have_requested_shape() {
        let mut rng = crate::rng::rng_for(1, 2);
        for mode in jl_modes() {
            let m = mode.sample(3, 9, 2.0, &mut rng);
            assert_eq!(m.shape(), (3, 9));
        }
        // rows of the projection are orthogonal with norm σ
        let p = HaarProjection.sample(3, 9, 2.0, &mut rng);
        let g = &p * p.transpose();
        assert!((g - DMatrix::identity(3, 3) * 4.0).amax() < 1e-12);
    }
}
