//! Hilbertian Rayleigh quotients, the lazy-walk mixing parameter `t(x; A)`
//! and dimension exponents.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{lambda2, rayleigh, rayleigh_matrix, Configuration, ReversibleChain, SpectralError};
use crate::metric::{Norm, PointCloud};

/// A norm `‖·‖_X` on `ℝ^m` with a Hilbertian norm `‖·‖_H = c·‖·‖₂` such that
/// `‖y‖_H ≤ ‖y‖_X ≤ d·‖y‖_H`.
pub trait HilbertIsomorph: Send + Sync {
    fn name(&self) -> &'static str;

    fn x_norm(&self) -> Norm;

    /// The factor `c` in `‖·‖_H = c·‖·‖₂`.
    fn h_scale(&self, m: usize) -> f64;

    /// The isomorphism constant `d`.
    fn distortion(&self, m: usize) -> f64;
}

/// `X = ℓ₁^m`, `H = ℓ₂^m`, `d = √m`.
pub struct L1L2;
/// `X = ℓ∞^m`, `H = ℓ₂^m/√m`, `d = √m`.
pub struct LinfL2;
/// `X = H = ℓ₂^m`, `d = 1`.
pub struct L2L2;

impl HilbertIsomorph for L1L2 {
    fn name(&self) -> &'static str {
        "l1-l2"
    }
    fn x_norm(&self) -> Norm {
        Norm::L1
    }
    fn h_scale(&self, _m: usize) -> f64 {
        1.0
    }
    fn distortion(&self, m: usize) -> f64 {
        (m as f64).sqrt()
    }
}

impl HilbertIsomorph for LinfL2 {
    fn name(&self) -> &'static str {
        "linf-l2"
    }
    fn x_norm(&self) -> Norm {
        Norm::Linf
    }
    fn h_scale(&self, m: usize) -> f64 {
        1.0 / (m as f64).sqrt()
    }
    fn distortion(&self, m: usize) -> f64 {
        (m as f64).sqrt()
    }
}

impl HilbertIsomorph for L2L2 {
    fn name(&self) -> &'static str {
        "l2-l2"
    }
    fn x_norm(&self) -> Norm {
        Norm::L2
    }
    fn h_scale(&self, _m: usize) -> f64 {
        1.0
    }
    fn distortion(&self, _m: usize) -> f64 {
        1.0
    }
}

pub fn hilbert_isomorphs() -> Vec<Box<dyn HilbertIsomorph>> {
    vec![Box::new(L1L2), Box::new(LinfL2), Box::new(L2L2)]
}

pub fn hilbert_isomorph(name: &str) -> Result<Box<dyn HilbertIsomorph>, SpectralError> {
    hilbert_isomorphs()
        .into_iter()
        .find(|h| h.name() == name)
        .ok_or_else(|| SpectralError::UnknownIsomorph(name.to_string()))
}

fn check_size(cloud: &PointCloud, chain: &ReversibleChain) -> Result<(), SpectralError> {
    if cloud.len() != chain.len() {
        return Err(SpectralError::SizeMismatch {
            chain: chain.len(),
            config: cloud.len(),
        });
    }
    Ok(())
}

/// Coordinates shifted so that `Σ π_i x_i = 0`.
fn centered(coords: &DMatrix<f64>, pi: &DVector<f64>) -> DMatrix<f64> {
    let mean = pi.transpose() * coords;
    DMatrix::from_fn(coords.nrows(), coords.ncols(), |i, c| coords[(i, c)] - mean[c])
}

fn l2_pi_norm(x: &DMatrix<f64>, pi: &DVector<f64>) -> f64 {
    (0..x.nrows())
        .map(|i| pi[i] * x.row(i).norm_squared())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HilbertIdentity {
    /// `‖(A⊗I)x‖ / ‖x‖` in `L₂(π; ℓ₂)` after centering.
    pub lhs: f64,
    /// `√(1 - R(x; A², ‖·‖²))`.
    pub rhs: f64,
    pub rayleigh_a2: f64,
}

pub fn hilbert_rayleigh_identity(
    cloud: &PointCloud,
    chain: &ReversibleChain,
) -> Result<HilbertIdentity, SpectralError> {
    check_size(cloud, chain)?;
    if cloud.norm() != Norm::L2 {
        return Err(SpectralError::NormMismatch(
            "the Hilbertian identity needs an l2 cloud".into(),
        ));
    }
    let pi = chain.pi();
    let x = centered(cloud.coords(), pi);
    let norm = l2_pi_norm(&x, pi);
    if norm == 0.0 {
        return Err(SpectralError::DegenerateConfiguration);
    }
    let a = chain.matrix();
    let lhs = l2_pi_norm(&(a * &x), pi) / norm;
    let r = rayleigh_matrix(&Configuration::from_cloud(cloud), &(a * a), pi, 2.0)?;
    Ok(HilbertIdentity {
        lhs,
        rhs: (1.0 - r).max(0.0).sqrt(),
        rayleigh_a2: r,
    })
}

/// `⌈log(2d) / log(2/(1+λ₂))⌉`, at least 1; `None` without a spectral gap.
pub fn t_ceiling(lambda2: f64, d: f64) -> Option<u64> {
    let rate = (2.0 / (1.0 + lambda2)).ln();
    if rate <= 0.0 {
        return None;
    }
    Some(((2.0 * d).ln() / rate).ceil().max(1.0) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TParameter {
    pub t: u64,
    /// `R(x; L^{2t}, ‖·‖_H²)` at the returned `t`, with `L = ½I + ½A`.
    pub hilbert_rayleigh: f64,
    pub threshold: f64,
    pub d: f64,
}

/// Divides each row by its sum; powers of a stochastic matrix drift slowly.
fn renormalize_rows(m: &mut DMatrix<f64>) {
    for mut row in m.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
}

/// `L^power` by repeated multiplication, renormalizing every 16 products.
fn lazy_power(lazy: &DMatrix<f64>, power: u64) -> DMatrix<f64> {
    let n = lazy.nrows();
    let mut p = DMatrix::identity(n, n);
    for i in 1..=power {
        p = &p * lazy;
        if i % 16 == 0 {
            renormalize_rows(&mut p);
        }
    }
    p
}

fn hilbert_configuration(
    cloud: &PointCloud,
    iso: &dyn HilbertIsomorph,
) -> Result<Configuration, SpectralError> {
    if cloud.norm() != iso.x_norm() {
        return Err(SpectralError::NormMismatch(format!(
            "isomorph {} expects {:?} coordinates, cloud uses {:?}",
            iso.name(),
            iso.x_norm(),
            cloud.norm()
        )));
    }
    let h = cloud.with_norm(Norm::L2)?.scaled(iso.h_scale(cloud.dim()));
    Ok(Configuration::from_cloud(&h))
}

/// Least `t ≥ 1` with `R(x; (½I + ½A)^{2t}, ‖·‖_H²) ≥ 1 - 1/(4d²)`.
pub fn t_parameter(
    cloud: &PointCloud,
    chain: &ReversibleChain,
    iso: &dyn HilbertIsomorph,
    d: f64,
    t_cap: u64,
) -> Result<TParameter, SpectralError> {
    check_size(cloud, chain)?;
    if !(d >= 1.0) {
        return Err(SpectralError::InvalidSpec(format!("d = {d} must be at least 1")));
    }
    let x = hilbert_configuration(cloud, iso)?;
    let threshold = 1.0 - 1.0 / (4.0 * d * d);
    let lazy = chain.lazy(0.5);
    let step = &lazy * &lazy;
    let mut p = step.clone();
    for t in 1..=t_cap {
        let r = rayleigh_matrix(&x, &p, chain.pi(), 2.0)?;
        if r >= threshold {
            return Ok(TParameter {
                t,
                hilbert_rayleigh: r,
                threshold,
                d,
            });
        }
        p = &p * &step;
        if t % 8 == 0 {
            renormalize_rows(&mut p);
        }
    }
    Err(SpectralError::CapExceeded(t_cap as usize))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCheck {
    pub t: u64,
    pub d: f64,
    /// `R(x; (½I + ½A)^t, ‖·‖_X²)`; at least 1/16.
    pub value: f64,
    /// `1/R(x; A, ‖·‖_X²)`; at most `8t²`.
    pub inverse_rayleigh: f64,
    /// Spectral-gap ceiling on `t`.
    pub ceiling: Option<u64>,
}

/// Evaluates the lazy-power Rayleigh quotient in `X` at `t = t(x; A)` with
/// `d` taken from the isomorph.
pub fn power_expander_check(
    cloud: &PointCloud,
    chain: &ReversibleChain,
    iso: &dyn HilbertIsomorph,
    t_cap: u64,
) -> Result<PowerCheck, SpectralError> {
    let d = iso.distortion(cloud.dim());
    let tp = t_parameter(cloud, chain, iso, d, t_cap)?;
    let x = Configuration::from_cloud(cloud);
    let b = lazy_power(&chain.lazy(0.5), tp.t);
    let value = rayleigh_matrix(&x, &b, chain.pi(), 2.0)?;
    let inverse_rayleigh = 1.0 / rayleigh(&x, chain, 2.0)?;
    Ok(PowerCheck {
        t: tp.t,
        d,
        value,
        inverse_rayleigh,
        ceiling: t_ceiling(lambda2(chain), d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimExponent {
    pub lambda2: f64,
    /// `√(Σ π_i A_ij ‖f(i) - f(j)‖²)`.
    pub alpha_hat: f64,
    /// `√(Σ π_i π_j ‖f(i) - f(j)‖²)`.
    pub spread: f64,
    /// `(1 - λ₂) · spread / alpha_hat`.
    pub exponent: f64,
}

pub fn dim_lower_exponent(
    f: &PointCloud,
    chain: &ReversibleChain,
) -> Result<DimExponent, SpectralError> {
    check_size(f, chain)?;
    let n = chain.len();
    let a = chain.matrix();
    let pi = chain.pi();
    let (mut edge, mut pair) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let d2 = f.distance(i, j).powi(2);
            edge += pi[i] * a[(i, j)] * d2;
            pair += pi[i] * pi[j] * d2;
        }
    }
    let l2 = lambda2(chain);
    let (alpha_hat, spread) = (edge.sqrt(), pair.sqrt());
    let exponent = if spread == 0.0 {
        0.0
    } else if alpha_hat == 0.0 {
        return Err(SpectralError::DegenerateCloud(
            "f is constant along every edge but not globally".into(),
        ));
    } else {
        (1.0 - l2) * spread / alpha_hat
    };
    Ok(DimExponent {
        lambda2: l2,
        alpha_hat,
        spread,
        exponent,
    })
}
