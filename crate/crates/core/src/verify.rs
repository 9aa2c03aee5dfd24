//! Self-checking property suites, one per module, runnable from the CLI.
//!
//! Each suite evaluates a handful of named properties over seeded random
//! instances and reports per-property case and failure counts. A library
//! error inside a case counts as a failure of that case.

use std::f64::consts::SQRT_2;
use std::str::FromStr;

use nalgebra::{DMatrix, Schur};
use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::jl::{
    gaussian_failure_cdf, gaussian_failure_quadrature, jl_min_dim_gaussian,
    jl_min_dim_projection, projection_feasible, psi_monte_carlo, psi_with_constant,
    sample_haar_orthogonal, sigma_max, PsiConstant,
};
use crate::matousek::{
    beta_modulus, gen_template, min_fork_distance, signed_metric, PowerPair, SignAssignment,
    SignedMetricParams, TabulatedPair,
};
use crate::metric::gen::{random_cloud, random_metric};
use crate::metric::{
    bourgain_embed, distortion_to_cloud, doubling_constant, frechet_embed, snowflake,
    volumetric_lower_bound, ExactCover, FiniteMetric, GreedyCover, Norm,
};
use crate::rng::derive_seed;
use crate::sdp::{c2_sdp, extract_points};
use crate::spectral::{
    gamma_hilbert, hilbert_isomorphs, hilbert_rayleigh_identity, lambda2, power_expander_check,
    random_chain, random_chain_with_pi, rayleigh, rayleigh_matrix, t_ceiling, t_parameter,
    Configuration,
};

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("unknown verify suite {0:?}; expected one of jl, sdp, spectral, matousek, metric")]
    UnknownSuite(String),
    #[error("unknown fault {0:?}; expected printed-prefactor")]
    UnknownFault(String),
}

/// A deliberate defect injected to check that a suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Replace the normalizing constant of `ψ` by `2π^{k/2}/Γ(k/2)`.
    PrintedPrefactor,
}

impl FromStr for Fault {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, VerifyError> {
        match s {
            "printed-prefactor" => Ok(Fault::PrintedPrefactor),
            other => Err(VerifyError::UnknownFault(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random instances per randomized property; expensive properties use fewer.
    pub cases: usize,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub properties: Vec<PropertyReport>,
}

pub trait VerifySuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn properties(&self, opts: &VerifyOptions) -> Vec<PropertyReport>;

    fn run(&self, opts: &VerifyOptions) -> SuiteReport {
        let properties = self.properties(opts);
        SuiteReport {
            suite: self.name(),
            passed: properties.iter().all(|p| p.failures == 0),
            properties,
        }
    }
}

type CaseResult = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> CaseResult {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn property<F>(name: &'static str, cases: usize, seed: u64, check: F) -> PropertyReport
where
    F: Fn(usize, u64) -> CaseResult,
{
    let mut failures = 0;
    let mut first_failure = None;
    for case in 0..cases {
        let case_seed = derive_seed(seed, case as u64);
        if let Err(msg) = check(case, case_seed) {
            failures += 1;
            first_failure.get_or_insert_with(|| format!("case {case}: {msg}"));
        }
    }
    PropertyReport {
        name,
        cases,
        failures,
        first_failure,
    }
}

pub struct JlSuite;
pub struct SdpSuite;
pub struct SpectralSuite;
pub struct MatousekSuite;
pub struct MetricSuite;

const PSI_GRID: [(u64, u64, f64); 6] = [
    (8, 2, 1.5),
    (12, 3, 2.0),
    (20, 5, 2.0),
    (40, 4, 3.0),
    (64, 10, 1.5),
    (200, 30, 4.0),
];

impl VerifySuite for JlSuite {
    fn name(&self) -> &'static str {
        "jl"
    }

    fn properties(&self, opts: &VerifyOptions) -> Vec<PropertyReport> {
        let constant = match opts.fault {
            Some(Fault::PrintedPrefactor) => PsiConstant::Printed,
            None => PsiConstant::Normalized,
        };
        let seed = opts.seed;
        vec![
            property("gaussian-reference-dimensions", 1, seed, |_, _| {
                for (alpha, k) in [(2.0, 329), (10.0, 37), (450.0, 9)] {
                    let got = jl_min_dim_gaussian(1_000_000_000, alpha).map_err(err)?;
                    ensure(got == k, || format!("alpha {alpha}: k = {got}, expected {k}"))?;
                }
                Ok(())
            }),
            property("psi-monte-carlo-agreement", PSI_GRID.len(), seed, |case, s| {
                let (n, k, alpha) = PSI_GRID[case];
                let sigma = sigma_max(n, k, alpha).map_err(err)?;
                let exact = psi_with_constant(n, k, alpha, sigma, constant).map_err(err)?;
                let mc = psi_monte_carlo(n, k, alpha, sigma, 200_000, s, false);
                ensure(exact.agrees_with(&mc, 4.0), || {
                    format!("({n},{k},{alpha}): quadrature {} vs MC {} ± {}", exact.value, mc.value, mc.std_error)
                })
            }),
            property("gaussian-quadrature-vs-chi-square", 20, seed, |case, _| {
                let k = [1u64, 4, 16, 64][case % 4];
                let alpha = [1.1, 1.5, 2.0, 5.0, 30.0][case / 4];
                let q = gaussian_failure_quadrature(k, alpha).map_err(err)?;
                let c = gaussian_failure_cdf(k, alpha).map_err(err)?;
                ensure((q - c).abs() < 1e-9, || format!("k {k}, alpha {alpha}: {q} vs {c}"))
            }),
            property("projection-at-most-gaussian", 8, seed, |case, _| {
                let n = [1_000u64, 100_000][case / 4];
                let alpha = [1.5, 2.0, 4.0, 10.0][case % 4];
                let p = jl_min_dim_projection(n, alpha).map_err(err)?;
                let g = jl_min_dim_gaussian(n, alpha).map_err(err)?;
                ensure(p <= g, || format!("n {n}, alpha {alpha}: {p} > {g}"))
            }),
            property("projection-dimension-minimal", 6, seed, |case, _| {
                let (n, alpha) = [(50u64, 2.0), (100, 4.0), (500, 1.5), (1000, 3.0), (80, 10.0), (300, 2.5)][case];
                let k = jl_min_dim_projection(n, alpha).map_err(err)?;
                ensure(projection_feasible(n, k, alpha).map_err(err)?, || format!("k = {k} infeasible"))?;
                ensure(k == 1 || !projection_feasible(n, k - 1, alpha).map_err(err)?, || {
                    format!("k - 1 = {} already feasible", k - 1)
                })
            }),
            property("haar-orthogonality", opts.cases.min(50), seed, |case, s| {
                let m = 2 + case % 9;
                let o = sample_haar_orthogonal(m, s);
                let dev = (o.transpose() * &o - DMatrix::<f64>::identity(m, m)).amax();
                ensure(dev < 1e-12, || format!("|OᵀO - I| = {dev}"))
            }),
        ]
    }
}

fn four_cycle() -> FiniteMetric {
    FiniteMetric::from_rows(&[
        vec![0.0, 1.0, 2.0, 1.0],
        vec![1.0, 0.0, 1.0, 2.0],
        vec![2.0, 1.0, 0.0, 1.0],
        vec![1.0, 2.0, 1.0, 0.0],
    ])
    .expect("C4 is a metric")
}

fn claw() -> FiniteMetric {
    FiniteMetric::from_rows(&[
        vec![0.0, 1.0, 1.0, 1.0],
        vec![1.0, 0.0, 2.0, 2.0],
        vec![1.0, 2.0, 0.0, 2.0],
        vec![1.0, 2.0, 2.0, 0.0],
    ])
    .expect("K13 is a metric")
}

impl VerifySuite for SdpSuite {
    fn name(&self) -> &'static str {
        "sdp"
    }

    fn properties(&self, opts: &VerifyOptions) -> Vec<PropertyReport> {
        let seed = opts.seed;
        let few = opts.cases.min(12);
        vec![
            property("simplex-distortion-one", 4, seed, |case, _| {
                let m = FiniteMetric::uniform(3 + case, 1.0).map_err(err)?;
                let r = c2_sdp(&m, 1e-6).map_err(err)?;
                ensure((r.alpha - 1.0).abs() <= 1e-6, || format!("alpha = {}", r.alpha))
            }),
            property("reference-distortions", 2, seed, |case, _| {
                let (m, target) = if case == 0 {
                    (four_cycle(), SQRT_2)
                } else {
                    (claw(), 2.0 / 3f64.sqrt())
                };
                let r = c2_sdp(&m, 1e-4).map_err(err)?;
                ensure((r.alpha - target).abs() <= 1e-3, || format!("{} vs {target}", r.alpha))
            }),
            property("euclidean-clouds-distortion-one", few, seed, |case, s| {
                let cloud = random_cloud(3 + case % 5, 3, Norm::L2, s);
                let r = c2_sdp(&cloud.to_metric().map_err(err)?, 1e-4).map_err(err)?;
                ensure(r.alpha <= 1.0 + 1e-4, || format!("alpha = {}", r.alpha))
            }),
            property("witness-realizes-alpha", few, seed, |case, s| {
                let tol = 1e-3;
                let m = random_metric(3 + case % 5, s);
                let r = c2_sdp(&m, tol).map_err(err)?;
                let cloud = extract_points(&r.witness).map_err(err)?;
                let rep = distortion_to_cloud(&m, &cloud).map_err(err)?;
                ensure(rep.distortion <= r.alpha + 2.0 * tol && r.alpha >= 1.0 - tol, || {
                    format!("realized {} vs reported {}", rep.distortion, r.alpha)
                })
            }),
        ]
    }
}

impl VerifySuite for SpectralSuite {
    fn name(&self) -> &'static str {
        "spectral"
    }

    fn properties(&self, opts: &VerifyOptions) -> Vec<PropertyReport> {
        let seed = opts.seed;
        let cases = opts.cases;
        vec![
            property("rayleigh-quotient-clauses", cases, seed, |case, s| {
                let n = 3 + case % 5;
                let p = if case % 2 == 0 { 1.0 } else { 2.0 };
                let delta = (case % 11) as f64 / 10.0;
                let a = random_chain(n, s);
                let b = random_chain_with_pi(a.pi(), s ^ 0x5a5a);
                let m = random_metric(4, s);
                let assign: Vec<usize> = (0..n).map(|i| (i + case) % 4).collect();
                let x = Configuration::from_metric(&m, &assign).map_err(err)?;
                let pi = a.pi();
                let ra = rayleigh(&x, &a, p).map_err(err)?;
                let rb = rayleigh(&x, &b, p).map_err(err)?;
                let mix = a.matrix() * delta + b.matrix() * (1.0 - delta);
                let r1 = rayleigh_matrix(&x, &mix, pi, p).map_err(err)?;
                ensure((r1 - (delta * ra + (1.0 - delta) * rb)).abs() < 1e-12, || "convexity".into())?;
                let r2 = rayleigh_matrix(&x, &a.lazy(delta), pi, p).map_err(err)?;
                ensure((r2 - delta * ra).abs() < 1e-12, || "laziness".into())?;
                ensure(ra <= 2f64.powf(p) + 1e-12, || "upper bound".into())?;
                let rab = rayleigh_matrix(&x, &(a.matrix() * b.matrix()), pi, p).map_err(err)?;
                ensure(rab.powf(1.0 / p) <= ra.powf(1.0 / p) + rb.powf(1.0 / p) + 1e-9, || "product".into())?;
                let a3 = a.matrix() * a.matrix() * a.matrix();
                let r3 = rayleigh_matrix(&x, &a3, pi, p).map_err(err)?;
                ensure(r3 <= 3f64.powf(p) * ra + 1e-9, || "powers".into())
            }),
            property("hilbert-rayleigh-identity", cases, seed, |case, s| {
                let c = random_chain(2 + case % 8, s);
                let cloud = random_cloud(c.len(), 1 + case % 5, Norm::L2, s);
                let h = hilbert_rayleigh_identity(&cloud, &c).map_err(err)?;
                ensure((h.lhs - h.rhs).abs() <= 1e-10, || format!("{} vs {}", h.lhs, h.rhs))
            }),
            property("gamma-vs-schur-eigenvalues", cases.min(30), seed, |case, s| {
                let c = random_chain(3 + case % 7, s);
                let mut ev: Vec<f64> = Schur::new(c.matrix().clone())
                    .eigenvalues()
                    .ok_or("complex spectrum")?
                    .iter()
                    .copied()
                    .collect();
                ev.sort_by(|a, b| b.total_cmp(a));
                let g = gamma_hilbert(&c).map_err(err)?;
                ensure((g - 1.0 / (1.0 - ev[1])).abs() < 1e-10 * g, || format!("{g} vs λ₂ = {}", ev[1]))
            }),
            property("t-below-spectral-ceiling", cases, seed, |case, s| {
                let c = random_chain(2 + case % 8, s);
                let isos = hilbert_isomorphs();
                let iso = &isos[case % isos.len()];
                let m = 1 + case % 8;
                let cloud = random_cloud(c.len(), m, iso.x_norm(), s);
                let d = iso.distortion(m);
                let t = t_parameter(&cloud, &c, iso.as_ref(), d, 100_000).map_err(err)?;
                let ceiling = t_ceiling(lambda2(&c), d).ok_or("no gap")?;
                ensure(t.t <= ceiling, || format!("t = {} > {ceiling}", t.t))
            }),
            property("lazy-power-expander", cases, seed, |case, s| {
                let c = if case % 3 == 0 {
                    crate::spectral::chain_from_graph(&Graph::cycle(3 + case % 6)).map_err(err)?
                } else {
                    random_chain(2 + case % 7, s)
                };
                let isos = hilbert_isomorphs();
                let iso = &isos[case % 2];
                let cloud = random_cloud(c.len(), 1 + case % 8, iso.x_norm(), s);
                let chk = power_expander_check(&cloud, &c, iso.as_ref(), 100_000).map_err(err)?;
                let t = chk.t as f64;
                ensure(chk.value >= 1.0 / 16.0 && chk.inverse_rayleigh <= 8.0 * t * t, || format!("{chk:?}"))
            }),
        ]
    }
}

impl VerifySuite for MatousekSuite {
    fn name(&self) -> &'static str {
        "matousek"
    }

    fn properties(&self, opts: &VerifyOptions) -> Vec<PropertyReport> {
        let seed = opts.seed;
        vec![
            property("signed-metric-construction", opts.cases, seed, |case, s| {
                let n = 4 + case % 20;
                let g = [4, 6, 8][case % 3];
                let t = gen_template(n, g, s).map_err(err)?;
                ensure(t.girth().is_none_or(|x| x >= g), || format!("girth {:?} < {g}", t.girth()))?;
                let sigma = SignAssignment::random(&t, s);
                let sc = 0.5 + (case % 4) as f64 * 0.5;
                let params = SignedMetricParams::new(sc, sc * (g + case % 5) as f64).map_err(err)?;
                let m = signed_metric(&t, &sigma, params).map_err(err)?;
                let girth = t.girth().map_or(f64::INFINITY, |x| x as f64);
                let fork = min_fork_distance(&m);
                ensure(fork >= (sc * girth).min(params.t) - 1e-12, || format!("fork {fork}"))
            }),
            property("beta-closed-forms", 1, seed, |_, _| {
                let bl = beta_modulus(&PowerPair::bi_lipschitz(1.0, 2.0).map_err(err)?, &[]).map_err(err)?;
                ensure((bl - 0.25).abs() < 1e-15, || format!("bi-Lipschitz {bl}"))?;
                let sf = beta_modulus(&PowerPair::snowflake(2.0, 0.5).map_err(err)?, &[]).map_err(err)?;
                ensure((sf - 1.0 / 16.0).abs() < 1e-15, || format!("power {sf}"))
            }),
            property("beta-tabulated-vs-analytic", 4, seed, |case, _| {
                let (alpha, theta) = [(2.0, 1.0), (2.0, 0.5), (3.0, 0.75), (1.5, 0.3)][case];
                let pair = PowerPair::snowflake(alpha, theta).map_err(err)?;
                let exact = beta_modulus(&pair, &[]).map_err(err)?;
                let knots: Vec<f64> = (0..1000).map(|k| 1e-3 * 10f64.powf(9.0 * k as f64 / 999.0)).collect();
                let table = TabulatedPair::sample(&pair, &knots).map_err(err)?;
                let grid: Vec<f64> = (0..1000).map(|k| 1e-2 * 10f64.powf(2.0 * k as f64 / 999.0)).collect();
                let approx = beta_modulus(&table, &grid).map_err(err)?;
                ensure((approx - exact).abs() <= 1e-3, || format!("{approx} vs {exact}"))
            }),
        ]
    }
}

impl VerifySuite for MetricSuite {
    fn name(&self) -> &'static str {
        "metric"
    }

    fn properties(&self, opts: &VerifyOptions) -> Vec<PropertyReport> {
        let seed = opts.seed;
        let cases = opts.cases;
        vec![
            property("snowflake-is-metric", cases, seed, |case, s| {
                let m = random_metric(3 + case % 10, s);
                let theta = 0.1 + 0.9 * (case % 10) as f64 / 9.0;
                let sf = snowflake(&m, theta).map_err(err)?;
                let n = m.len();
                let ok = (0..n).all(|i| (0..n).all(|j| (sf.d(i, j) - m.d(i, j).powf(theta)).abs() <= 1e-12));
                ensure(ok, || "entries differ from d^θ".into())
            }),
            property("greedy-cover-at-least-exact", cases.min(40), seed, |case, s| {
                let m = random_metric(3 + case % 8, s);
                let g = doubling_constant(&m, &GreedyCover).map_err(err)?;
                let e = doubling_constant(&m, &ExactCover).map_err(err)?;
                ensure(g >= e, || format!("greedy {g} < exact {e}"))
            }),
            property("frechet-is-isometric", cases, seed, |case, s| {
                let m = random_metric(2 + case % 12, s);
                let rep = distortion_to_cloud(&m, &frechet_embed(&m)).map_err(err)?;
                ensure((rep.distortion - 1.0).abs() < 1e-12 && (rep.scale - 1.0).abs() < 1e-12, || format!("{rep:?}"))
            }),
            property("volumetric-formula", cases, seed, |case, _| {
                let n = 2 + case as u64 * 37;
                let alpha = 1.0 + case as f64 * 0.25;
                let v = volumetric_lower_bound(n, alpha).map_err(err)?;
                ensure((v - (n as f64).ln() / (alpha + 1.0).ln()).abs() < 1e-12, || format!("{v}"))
            }),
            property("bourgain-envelope", cases.min(20), seed, |case, s| {
                let n = 4 + case % 20;
                let m = random_metric(n, s);
                let rep = distortion_to_cloud(&m, &bourgain_embed(&m, s).map_err(err)?).map_err(err)?;
                let envelope = 20.0 * (n as f64).log2();
                ensure(rep.distortion <= envelope, || format!("{} > {envelope}", rep.distortion))
            }),
        ]
    }
}

pub fn verify_suites() -> Vec<Box<dyn VerifySuite>> {
    vec![
        Box::new(JlSuite),
        Box::new(SdpSuite),
        Box::new(SpectralSuite),
        Box::new(MatousekSuite),
        Box::new(MetricSuite),
    ]
}

pub fn verify_suite(name: &str) -> Result<Box<dyn VerifySuite>, VerifyError> {
    verify_suites()
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| VerifyError::UnknownSuite(name.to_string()))
}
