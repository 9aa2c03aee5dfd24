//! Success probability of a rescaled random orthogonal projection.
//!
//! For a uniform unit vector `z ∈ S^{N-2}` and `u` its first `k`
//! coordinates, `|u|²` is `Beta(k/2, (N-1-k)/2)`. With `r = |u|` the pair
//! survives the scaling `σ` iff `1/σ ≤ r ≤ α/σ`, so
//! `ψ = C ∫ r^{k-1} (1-r²)^e dr` over `[1/σ, α/σ] ∩ [0, 1]`, where
//! `e = (N-k-3)/2` and `C = 2Γ((N-1)/2) / (Γ(k/2) Γ((N-1-k)/2))`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use super::{JlError, Method, ProbabilityEstimate};
use crate::special::{ln_expm1, ln_integrate_unimodal, ln_gamma_ratio};

const REL_TOL: f64 = 1e-12;

/// Which leading constant multiplies the radial integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiConstant {
    /// The constant that makes `ψ` a probability.
    #[default]
    Normalized,
    /// `2π^{k/2}/Γ(k/2)`, kept only to exercise the fault-detection suite.
    Printed,
}

impl PsiConstant {
    fn ln_value(self, n: f64, k: f64) -> f64 {
        match self {
            PsiConstant::Normalized => {
                let b = (n - 1.0 - k) / 2.0;
                std::f64::consts::LN_2 + ln_gamma_ratio(b, k / 2.0) - ln_gamma(k / 2.0)
            }
            PsiConstant::Printed => {
                std::f64::consts::LN_2 + (k / 2.0) * PI.ln() - ln_gamma(k / 2.0)
            }
        }
    }
}

fn check_psi_domain(n: u64, k: u64, alpha: f64) -> Result<(), JlError> {
    if n < 4 || k < 1 || k + 3 > n {
        return Err(JlError::ParameterDomain(format!(
            "need n >= 4 and 1 <= k <= n - 3, got n = {n}, k = {k}"
        )));
    }
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(JlError::ParameterDomain(format!(
            "alpha must be a finite value > 1, got {alpha}"
        )));
    }
    Ok(())
}

fn check_sigma_domain(n: u64, k: u64, alpha: f64) -> Result<(), JlError> {
    check_psi_domain(n, k, alpha)?;
    if k + 4 > n {
        return Err(JlError::ParameterDomain(format!(
            "optimal scaling needs k <= n - 4, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

struct Radial {
    ln_c: f64,
    k: f64,
    e: f64,
}

impl Radial {
    fn new(n: u64, k: u64, constant: PsiConstant) -> Self {
        let (n, k) = (n as f64, k as f64);
        Radial {
            ln_c: constant.ln_value(n, k),
            k,
            e: (n - k - 3.0) / 2.0,
        }
    }

    fn ln_density(&self, r: f64) -> f64 {
        let mut g = 0.0;
        if self.k != 1.0 {
            g += (self.k - 1.0) * r.ln();
        }
        if self.e != 0.0 {
            g += self.e * (-r * r).ln_1p();
        }
        g
    }

    fn mode(&self) -> f64 {
        if self.k <= 1.0 {
            0.0
        } else if self.e <= 0.0 {
            1.0
        } else {
            ((self.k - 1.0) / (self.k - 1.0 + 2.0 * self.e)).sqrt()
        }
    }

    /// `ln ∫_a^b` of the normalized density.
    fn ln_mass(&self, a: f64, b: f64) -> Result<f64, JlError> {
        let (a, b) = (a.clamp(0.0, 1.0), b.clamp(0.0, 1.0));
        if b <= a {
            return Ok(f64::NEG_INFINITY);
        }
        let v = ln_integrate_unimodal(|r| self.ln_density(r), a, b, self.mode(), REL_TOL)?;
        Ok(v + self.ln_c)
    }
}

/// `ψ(σ)` for `N = n`, target dimension `k` and distortion `α`.
pub fn psi(n: u64, k: u64, alpha: f64, sigma: f64) -> Result<ProbabilityEstimate, JlError> {
    psi_with_constant(n, k, alpha, sigma, PsiConstant::Normalized)
}

pub fn psi_with_constant(
    n: u64,
    k: u64,
    alpha: f64,
    sigma: f64,
    constant: PsiConstant,
) -> Result<ProbabilityEstimate, JlError> {
    check_psi_domain(n, k, alpha)?;
    if !(sigma >= 0.0) {
        return Err(JlError::ParameterDomain(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma <= 1.0 {
        return Ok(ProbabilityEstimate::exact(0.0, Method::Quadrature));
    }
    let rad = Radial::new(n, k, constant);
    let v = rad.ln_mass(1.0 / sigma, alpha / sigma)?.exp();
    let v = match constant {
        PsiConstant::Normalized => v.min(1.0),
        PsiConstant::Printed => v,
    };
    Ok(ProbabilityEstimate::exact(v, Method::Quadrature))
}

/// `ln(1 - ψ(σ))`, computed from the two tails directly so that failure
/// probabilities far below machine epsilon stay accurate.
pub fn ln_psi_failure(n: u64, k: u64, alpha: f64, sigma: f64) -> Result<f64, JlError> {
    check_psi_domain(n, k, alpha)?;
    if sigma <= 1.0 {
        return Ok(0.0);
    }
    let rad = Radial::new(n, k, PsiConstant::Normalized);
    let low = rad.ln_mass(0.0, 1.0 / sigma)?;
    let high = rad.ln_mass(alpha / sigma, 1.0)?;
    let m = low.max(high);
    if m == f64::NEG_INFINITY {
        return Ok(m);
    }
    Ok((m + ((low - m).exp() + (high - m).exp()).ln()).min(0.0))
}

/// `ln σ_max`, where `σ_max² = (α^{(2n-6)/(n-k-3)} - 1) / (α^{2k/(n-k-3)} - 1)`.
pub fn ln_sigma_max(n: u64, k: u64, alpha: f64) -> Result<f64, JlError> {
    check_sigma_domain(n, k, alpha)?;
    let den = (n - k - 3) as f64;
    let la = alpha.ln();
    let top = (2.0 * n as f64 - 6.0) / den * la;
    let bottom = 2.0 * k as f64 / den * la;
    Ok(0.5 * (ln_expm1(top) - ln_expm1(bottom)))
}

/// The scaling maximizing `ψ`. Signals `Overflow` when `σ_max` is not a
/// finite `f64`.
pub fn sigma_max(n: u64, k: u64, alpha: f64) -> Result<f64, JlError> {
    let ln_sigma = ln_sigma_max(n, k, alpha)?;
    let s = ln_sigma.exp();
    if !s.is_finite() {
        return Err(JlError::Overflow { ln_sigma });
    }
    Ok(s)
}

/// Whether `k` meets the union bound for `n` points: `1 - ψ(σ_max) < 2/(n(n-1))`.
pub fn projection_feasible(n: u64, k: u64, alpha: f64) -> Result<bool, JlError> {
    let ln_sigma = ln_sigma_max(n, k, alpha)?;
    if ln_sigma > 700.0 {
        return Err(JlError::Overflow { ln_sigma });
    }
    let ln_fail = ln_psi_failure(n, k, alpha, ln_sigma.exp())?;
    let nf = n as f64;
    Ok(ln_fail < std::f64::consts::LN_2 - nf.ln() - (nf - 1.0).ln())
}

/// Smallest `k ≤ n - 4` for which a rescaled random projection of `n` points
/// succeeds with positive probability by the union bound.
///
/// Feasibility is assumed monotone in `k`: an exponential search brackets the
/// answer and bisection narrows it. If the answer's successor turns out
/// infeasible the search falls back to a linear scan.
pub fn jl_min_dim_projection(n: u64, alpha: f64) -> Result<u64, JlError> {
    if n < 5 {
        return Err(JlError::ParameterDomain(format!("need n >= 5, got {n}")));
    }
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(JlError::ParameterDomain(format!(
            "alpha must be a finite value > 1, got {alpha}"
        )));
    }
    let top = n - 4;
    let feasible = |k: u64| -> Result<bool, JlError> {
        match projection_feasible(n, k, alpha) {
            Err(JlError::Overflow { .. }) => Ok(false),
            other => other,
        }
    };
    let mut lo = 0;
    let mut hi = 1;
    loop {
        if feasible(hi)? {
            break;
        }
        if hi == top {
            return Err(JlError::NoFeasibleK { fallback: n - 1 });
        }
        lo = hi;
        hi = (hi * 2).min(top);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi < top && !feasible(hi + 1)? {
        return linear_scan(hi, &feasible, n);
    }
    Ok(hi)
}

fn linear_scan<F>(to: u64, feasible: &F, n: u64) -> Result<u64, JlError>
where
    F: Fn(u64) -> Result<bool, JlError>,
{
    for k in 1..=to {
        if feasible(k)? {
            return Ok(k);
        }
    }
    Err(JlError::NoFeasibleK { fallback: n - 1 })
}
