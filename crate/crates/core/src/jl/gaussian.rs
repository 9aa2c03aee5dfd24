//! Rescaled Gaussian matrices `G = σ_g · (i.i.d. N(0,1))`.
//!
//! For a unit vector `z`, `|Gz|²/σ_g²` is `χ²_k`, so the pair survives iff
//! `χ²_k` lands in `[1/σ_g², α²/σ_g²]`.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

use super::{JlError, Method, ProbabilityEstimate};
use crate::special::ln_integrate_unimodal;

const CROSS_CHECK_TOL: f64 = 1e-9;

fn check(k: u64, alpha: f64) -> Result<(), JlError> {
    if k < 1 {
        return Err(JlError::ParameterDomain("k must be >= 1".into()));
    }
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(JlError::ParameterDomain(format!(
            "alpha must be a finite value > 1, got {alpha}"
        )));
    }
    Ok(())
}

/// `σ_g = √((α² - 1) / (2k ln α))`, the scaling maximizing the success
/// probability of a Gaussian matrix.
pub fn gaussian_scaling(k: u64, alpha: f64) -> Result<f64, JlError> {
    check(k, alpha)?;
    Ok(((alpha * alpha - 1.0) / (2.0 * k as f64 * alpha.ln())).sqrt())
}

/// Failure probability as a single integral over `β ≥ ln α`:
/// `(2k^{k/2}/Γ(k/2)) ∫ (β/(e^{2β}-1))^{k/2} exp(-kβ/(e^{2β}-1)) dβ`.
pub fn gaussian_failure_quadrature(k: u64, alpha: f64) -> Result<f64, JlError> {
    check(k, alpha)?;
    let kf = k as f64;
    let ln_const = std::f64::consts::LN_2 + 0.5 * kf * kf.ln() - ln_gamma(0.5 * kf);
    let g = |b: f64| {
        let y = b / (2.0 * b).exp_m1();
        if y == 0.0 {
            return f64::NEG_INFINITY;
        }
        0.5 * kf * y.ln() - kf * y
    };
    let a = alpha.ln();
    // the integrand is decreasing and falls by e^{-k} per unit of β
    let mut b = a + 1.0;
    while g(b) > g(a) - 80.0 {
        b = a + 2.0 * (b - a);
    }
    let ln_i = ln_integrate_unimodal(g, a, b, a, 1e-13)?;
    Ok((ln_i + ln_const).exp().min(1.0))
}

/// Failure probability from the χ² CDF at the two thresholds.
pub fn gaussian_failure_cdf(k: u64, alpha: f64) -> Result<f64, JlError> {
    check(k, alpha)?;
    let chi = ChiSquared::new(k as f64).expect("positive degrees of freedom");
    let c = 2.0 * k as f64 * alpha.ln() / (alpha * alpha - 1.0);
    Ok(chi.cdf(c) + chi.sf(alpha * alpha * c))
}

/// Per-pair success probability of the rescaled Gaussian matrix.
///
/// Computed by quadrature and verified against the χ² CDF expression; a
/// disagreement beyond `1e-9` is an error.
pub fn gaussian_success_prob(k: u64, alpha: f64) -> Result<ProbabilityEstimate, JlError> {
    let quad = 1.0 - gaussian_failure_quadrature(k, alpha)?;
    let cdf = 1.0 - gaussian_failure_cdf(k, alpha)?;
    if (quad - cdf).abs() > CROSS_CHECK_TOL {
        return Err(JlError::CrossCheck {
            quadrature: quad,
            cdf,
        });
    }
    Ok(ProbabilityEstimate::exact(quad.clamp(0.0, 1.0), Method::Quadrature))
}

/// Smallest `k ≥ 1` meeting the closed-form sufficient condition for a
/// Gaussian JL embedding of `n` points:
/// `Γ(k/2)/k^{k/2-1} · ((α²-1)/ln α · α^{2/(α²-1)})^{k/2} ≥ 2n²(α²-1)² ln α / D(α)`
/// with `D(α) = 2α⁴ ln α + 2α² - α⁴ - 4α² ln²α - 2 ln α - 1`.
pub fn jl_min_dim_gaussian(n: u64, alpha: f64) -> Result<u64, JlError> {
    if n < 2 {
        return Err(JlError::ParameterDomain(format!("need n >= 2, got {n}")));
    }
    check(1, alpha)?;
    let la = alpha.ln();
    let a2 = alpha * alpha;
    let terms = [
        2.0 * a2 * a2 * la,
        2.0 * a2,
        -a2 * a2,
        -4.0 * a2 * la * la,
        -2.0 * la,
        -1.0,
    ];
    let den: f64 = terms.iter().sum();
    // near α = 1 the sum is pure cancellation noise
    let noise = 1e-13 * terms.iter().map(|t| t.abs()).sum::<f64>();
    if !(den > noise) {
        return Err(JlError::DenominatorNonpositive(den));
    }
    let nf = n as f64;
    let ln_rhs = std::f64::consts::LN_2 + 2.0 * nf.ln() + 2.0 * (a2 - 1.0).ln() + la.ln()
        - den.ln();
    let ln_base = (a2 - 1.0).ln() - la.ln() + 2.0 * la / (a2 - 1.0);
    let ln_lhs = |k: f64| ln_gamma(0.5 * k) - (0.5 * k - 1.0) * k.ln() + 0.5 * k * ln_base;
    const CAP: u64 = 100_000_000;
    (1..=CAP)
        .find(|&k| ln_lhs(k as f64) >= ln_rhs)
        .ok_or(JlError::NoFeasibleK { fallback: n - 1 })
}
