use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{sample_haar_with, JlError, JlMode, Method, ProbabilityEstimate};
use crate::metric::{EmbeddingReport, Norm, PointCloud};
use crate::rng::{monte_carlo, rng_for};

/// A JL instance together with its success certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JlPlan {
    pub n: u64,
    pub alpha: f64,
    pub k: u64,
    pub sigma: f64,
    pub mode: String,
    pub success_prob: f64,
    pub union_bound: f64,
    /// `D + 1` for maps out of `ℝ^D`; equals `n` for the worst-case plan.
    pub ambient: u64,
}

/// Plans a reduction of `n` points living in `ℝ^{ambient-1}`. When `k` is
/// `None` the mode's minimal dimension for `n` points is used.
pub fn jl_plan(
    n: u64,
    ambient: u64,
    alpha: f64,
    mode: &dyn JlMode,
    k: Option<u64>,
) -> Result<JlPlan, JlError> {
    if n < 2 {
        return Err(JlError::ParameterDomain(format!("need n >= 2, got {n}")));
    }
    let k = match k {
        Some(k) => k,
        None => mode.min_dim(n, alpha)?,
    };
    let sigma = mode.scaling(ambient, k, alpha)?;
    let p = mode.pair_success(ambient, k, alpha, sigma)?.value;
    let fail = mode.ln_pair_failure(ambient, k, alpha, sigma)?.exp();
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    Ok(JlPlan {
        n,
        alpha,
        k,
        sigma,
        mode: mode.name().to_string(),
        success_prob: p,
        union_bound: (1.0 - pairs * fail).min(p),
        ambient,
    })
}

#[derive(Debug, Clone)]
pub struct TransformOptions {
    pub alpha: f64,
    pub seed: u64,
    pub max_retries: usize,
    /// Target dimension; the mode's minimum for the point count if `None`.
    pub k: Option<u64>,
}

/// Result of a JL transform: the best attempt and its measured distortion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JlOutcome {
    pub cloud: PointCloud,
    pub plan: JlPlan,
    pub attempts: usize,
    pub measured: EmbeddingReport,
    pub success: bool,
}

/// Applies `y_i = M x_i` for random `M` drawn from `mode`, redrawing until
/// every pair satisfies `1 ≤ |y_i - y_j| / |x_i - x_j| ≤ α` or the retries
/// run out. Clouds with fewer than `k + 3` coordinates are zero-padded so the
/// projection plan is defined.
pub fn jl_transform(
    cloud: &PointCloud,
    mode: &dyn JlMode,
    opts: &TransformOptions,
) -> Result<JlOutcome, JlError> {
    if cloud.norm() != Norm::L2 {
        return Err(JlError::NotEuclidean);
    }
    let n = cloud.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if cloud.distance(i, j) == 0.0 {
                return Err(JlError::ZeroDistancePair(i, j));
            }
        }
    }
    let k = match opts.k {
        Some(k) => k,
        None => mode.min_dim(n as u64, opts.alpha)?,
    };
    let mut dim = cloud.dim();
    while mode.max_dim(dim as u64 + 1) < k {
        dim += 1;
    }
    let x = if dim == cloud.dim() {
        cloud.coords().clone()
    } else {
        cloud.coords().clone().resize_horizontally(dim, 0.0)
    };
    let plan = jl_plan(n as u64, dim as u64 + 1, opts.alpha, mode, Some(k))?;

    let mut best: Option<JlOutcome> = None;
    for attempt in 0..opts.max_retries.max(1) {
        let mut rng = rng_for(opts.seed, attempt as u64);
        let m = mode.sample(k as usize, dim, plan.sigma, &mut rng);
        let y = &x * m.transpose();
        let image = PointCloud::new(y, Norm::L2)?;
        let measured =
            crate::metric::distortion_report(n, |i, j| cloud.distance(i, j), |i, j| image.distance(i, j));
        let measured = match measured {
            Ok(r) => r,
            // a collapsed pair is a failed draw
            Err(_) => continue,
        };
        let success = measured.contraction >= 1.0 && measured.expansion <= opts.alpha;
        let outcome = JlOutcome {
            cloud: image,
            plan: plan.clone(),
            attempts: attempt + 1,
            measured,
            success,
        };
        if success {
            return Ok(outcome);
        }
        if best
            .as_ref()
            .is_none_or(|b| measured.distortion < b.measured.distortion)
        {
            best = Some(outcome);
        }
    }
    match best {
        Some(mut b) => {
            b.attempts = opts.max_retries.max(1);
            Err(JlError::RetriesExhausted(Box::new(b)))
        }
        None => Err(JlError::ParameterDomain(
            "every attempt collapsed a pair".into(),
        )),
    }
}

fn indicator(r: f64, sigma: f64, alpha: f64) -> f64 {
    let s = sigma * r;
    if (1.0..=alpha).contains(&s) {
        1.0
    } else {
        0.0
    }
}

/// Monte Carlo estimate of `P(1 ≤ σ|Proj_k O z| ≤ α)`.
///
/// With `full_haar` every draw multiplies a fresh Haar matrix by a fixed unit
/// vector; otherwise `Oz` is drawn directly as a uniform unit vector, which
/// has the same law and costs `O(ambient)` per sample.
pub fn psi_monte_carlo(
    ambient: u64,
    k: u64,
    alpha: f64,
    sigma: f64,
    samples: usize,
    seed: u64,
    full_haar: bool,
) -> ProbabilityEstimate {
    let d = ambient as usize - 1;
    let k = k as usize;
    let z = vec![1.0 / (d as f64).sqrt(); d];
    let est = monte_carlo(samples, seed, |rng| {
        let v: Vec<f64> = if full_haar {
            let o = sample_haar_with(d, rng);
            (0..d).map(|i| o.row(i).iter().zip(&z).map(|(a, b)| a * b).sum()).collect()
        } else {
            (0..d).map(|_| StandardNormal.sample(rng)).collect()
        };
        let head: f64 = v[..k].iter().map(|x| x * x).sum();
        let all: f64 = head + v[k..].iter().map(|x| x * x).sum::<f64>();
        indicator((head / all).sqrt(), sigma, alpha)
    });
    ProbabilityEstimate {
        value: est.mean,
        std_error: est.std_error,
        method: Method::MonteCarlo { samples },
    }
}

/// Monte Carlo estimate of `P(1 ≤ |Gz| ≤ α)` at the optimal Gaussian scaling.
pub fn gaussian_monte_carlo(k: u64, alpha: f64, samples: usize, seed: u64) -> ProbabilityEstimate {
    let sigma = super::gaussian_scaling(k, alpha).expect("valid parameters");
    let est = monte_carlo(samples, seed, |rng| {
        let sq: f64 = (0..k)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                g * g
            })
            .sum();
        indicator(sq.sqrt(), sigma, alpha)
    });
    ProbabilityEstimate {
        value: est.mean,
        std_error: est.std_error,
        method: Method::MonteCarlo { samples },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jl::{psi, sigma_max, HaarProjection, ScaledGaussian};

    #[test]
    fn plan_invariants() {
        for (mode, ambient) in [(&HaarProjection as &dyn JlMode, 200u64), (&ScaledGaussian, 200)] {
            let p = jl_plan(200, ambient, 2.0, mode, None).unwrap();
            assert!((0.0..=1.0).contains(&p.success_prob));
            assert!(p.union_bound <= p.success_prob);
            assert!(p.union_bound > 0.0, "{p:?}");
        }
    }

    #[test]
    fn small_mc_agrees_with_quadrature() {
        let (n, k, alpha) = (12u64, 3u64, 2.0);
        let s = sigma_max(n, k, alpha).unwrap();
        let exact = psi(n, k, alpha, s).unwrap();
        for full in [false, true] {
            let mc = psi_monte_carlo(n, k, alpha, s, 40_000, 3, full);
            assert!(exact.agrees_with(&mc, 3.0), "{full}: {exact:?} {mc:?}");
        }
    }

    #[test]
    fn transform_pads_and_succeeds() {
        let cloud = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]], Norm::L2)
            .unwrap();
        let opts = TransformOptions {
            alpha: 3.0,
            seed: 4,
            max_retries: 50,
            k: Some(2),
        };
        let out = jl_transform(&cloud, &HaarProjection, &opts).unwrap();
        assert_eq!(out.plan.ambient, 6);
        assert_eq!(out.cloud.dim(), 2);
        assert!(out.measured.distortion <= 3.0);
        assert!(out.measured.contraction >= 1.0);
    }

    #[test]
    fn transform_errors() {
        let dup = PointCloud::from_rows(&[vec![1.0], vec![1.0]], Norm::L2).unwrap();
        let opts = TransformOptions {
            alpha: 2.0,
            seed: 0,
            max_retries: 1,
            k: Some(1),
        };
        assert!(matches!(
            jl_transform(&dup, &ScaledGaussian, &opts),
            Err(JlError::ZeroDistancePair(0, 1))
        ));
        let l1 = dup.with_norm(Norm::L1).unwrap();
        assert!(matches!(
            jl_transform(&l1, &ScaledGaussian, &opts),
            Err(JlError::NotEuclidean)
        ));
        // a tiny budget cannot hold 40 points in one dimension
        let many = crate::metric::gen::random_cloud(40, 10, Norm::L2, 1);
        let tight = TransformOptions {
            alpha: 1.01,
            seed: 0,
            max_retries: 3,
            k: Some(1),
        };
        match jl_transform(&many, &HaarProjection, &tight) {
            Err(JlError::RetriesExhausted(best)) => {
                assert_eq!(best.attempts, 3);
                assert!(!best.success);
                assert!(best.measured.distortion > 1.01);
            }
            other => panic!("{other:?}"),
        }
    }
}
