mod error;
mod output;
mod pipeline;
mod sweep;

use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdrlab::graph::Graph;
use mdrlab::jl::{
    jl_mode, jl_plan, jl_transform, ln_sigma_max, psi, psi_monte_carlo, sigma_max, JlError,
    TransformOptions,
};
use mdrlab::matousek::{
    beta_modulus, coarse_dim_exponent, experiment_harness, gen_template, min_fork_distance,
    modulus_pair, signed_metric, HarnessParams, SignAssignment, SignedMetricParams,
    TemplateGraph, HARNESS_COLUMNS,
};
use mdrlab::metric::{
    bourgain_embed, distortion, distortion_to_cloud, doubling_constant, doubling_dim_lower_bound,
    doubling_estimator, frechet_embed, snowflake, volumetric_lower_bound, FiniteMetric, Norm,
    PointCloud,
};
use mdrlab::rng::DEFAULT_SEED;
use mdrlab::sdp::{c2_sdp, check_certificate, search_violating_certificate, NegativeTypeCertificate};
use mdrlab::spectral::{
    chain_from_graph, cheeger_sweep, dim_lower_exponent, gamma_bruteforce, gamma_hilbert,
    gamma_sampled_lower_bound, hilbert_isomorph, lambda2, markov_convexity_exact,
    markov_convexity_monte_carlo, markov_convexity_ratio, random_regular_graph, rayleigh,
    t_ceiling, t_parameter, Configuration, MarkovChainSpec, ReversibleChain,
};
use mdrlab::verify::{verify_suite, Fault, VerifyOptions};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{with_context, CliError};
use crate::output::{emit, render, Format};

/// Parses a non-negative integer, allowing scientific notation such as `1e9`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !(x >= 0.0 && x <= 9.007_199_254_740_992e15 && x.fract() == 0.0) {
        return Err(format!("{s:?} is not a non-negative integer below 2^53"));
    }
    Ok(x as u64)
}

#[derive(Parser)]
#[command(name = "mdrlab", version, about = "Metric dimension reduction laboratory")]
struct Cli {
    /// Base seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "MDRLAB_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Write the payload to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Numerical tolerance override for commands that take one.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MetricArg {
    /// Finite metric as JSON `{"n", "dist"}`; `-` reads stdin.
    #[arg(long)]
    metric: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal JL dimension for n points at distortion alpha, with its certificate.
    JlDim {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long)]
        alpha: f64,
        /// haar_projection (haar, projection) or scaled_gaussian (gaussian).
        #[arg(long, default_value = "haar_projection")]
        mode: String,
    },
    /// Random JL map of an l2 point cloud.
    JlProject {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value = "haar_projection")]
        mode: String,
        #[arg(long, value_parser = parse_count)]
        k: Option<u64>,
        #[arg(long, default_value_t = 20)]
        retries: usize,
    },
    /// Success probability of a rescaled random projection.
    Psi {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_parser = parse_count)]
        k: u64,
        #[arg(long)]
        alpha: f64,
        /// Defaults to the optimal scaling.
        #[arg(long)]
        sigma: Option<f64>,
        /// Also estimate by Monte Carlo with this many samples.
        #[arg(long, value_parser = parse_count)]
        samples: Option<u64>,
    },
    /// Optimal projection scaling.
    SigmaMax {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_parser = parse_count)]
        k: u64,
        #[arg(long)]
        alpha: f64,
    },
    /// Distortion of a map into another metric or of a point cloud.
    Distortion {
        #[command(flatten)]
        source: MetricArg,
        #[arg(long, conflicts_with = "cloud", requires = "map")]
        target: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        map: Option<Vec<usize>>,
        #[arg(long)]
        cloud: Option<PathBuf>,
    },
    /// Isometric embedding into l-infinity.
    Frechet {
        #[command(flatten)]
        metric: MetricArg,
    },
    /// Bourgain embedding into l2 with its measured distortion.
    Bourgain {
        #[command(flatten)]
        metric: MetricArg,
    },
    /// The theta-snowflake d^theta.
    Snowflake {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long)]
        theta: f64,
    },
    /// Doubling constant and dimension lower bounds.
    Doubling {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long, default_value = "greedy")]
        estimator: String,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// Euclidean distortion by semidefinite feasibility.
    C2Sdp {
        #[command(flatten)]
        metric: MetricArg,
    },
    /// Checks a negative-type certificate, or searches for one.
    Certificate {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long)]
        alpha: f64,
        /// Certificate JSON `{"n", "A"}`; omitted means search.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 5000)]
        iterations: usize,
    },
    /// Nonlinear spectral gap of a reversible chain.
    Gamma {
        #[arg(long)]
        chain: PathBuf,
        /// hilbert, bruteforce (needs --metric) or sampled.
        #[arg(long, default_value = "hilbert")]
        method: String,
        #[arg(long)]
        metric: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Nonlinear Rayleigh quotient of a configuration.
    Rayleigh {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, conflicts_with = "cloud", requires = "assignment")]
        metric: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        assignment: Option<Vec<usize>>,
        #[arg(long)]
        cloud: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Least lazy-walk power reaching the Hilbertian threshold.
    TParam {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long, default_value = "l2-l2")]
        isomorph: String,
        /// Distortion of the isomorph; defaults to the registered value.
        #[arg(long)]
        d: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        t_cap: u64,
    },
    /// Spectral dimension exponent of a map on a chain.
    DimExponent {
        #[arg(long, conflicts_with = "graph")]
        chain: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        cloud: PathBuf,
    },
    /// Spectral sweep cut of a graph or chain.
    Cheeger {
        #[arg(long, conflicts_with = "chain")]
        graph: Option<PathBuf>,
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Uniform random r-regular graph.
    RegularGraph {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        r: usize,
    },
    /// Markov convexity sums of a chain mapped into a metric.
    MarkovConvexity {
        #[arg(long)]
        spec: PathBuf,
        /// auto, exact or mc.
        #[arg(long, default_value = "auto")]
        method: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Girth-constrained random bipartite template.
    MatousekGen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        g: usize,
    },
    /// Truncated metric of a signed template; signs are random unless given.
    SignedMetric {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long)]
        s: f64,
        #[arg(long = "T")]
        t: f64,
    },
    /// Coarse modulus beta(omega, Omega) and the implied dimension exponent.
    Beta {
        /// bilipschitz, power or tabulated.
        #[arg(long, default_value = "bilipschitz")]
        pair: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Table JSON `{"s", "omega", "Omega"}` for the tabulated pair.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Evaluation grid `lo,hi,count`, log-spaced.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        grid: Option<Vec<f64>>,
        #[arg(long, value_parser = parse_count)]
        n_points: Option<u64>,
    },
    /// Cross-product parameter sweep from a JSON spec; CSV by default.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Bourgain embedding followed by JL reduction within a distortion budget.
    Pipeline {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long)]
        alpha_total: f64,
        #[arg(long, default_value = "haar_projection")]
        mode: String,
        #[arg(long, default_value_t = 100)]
        retries: usize,
    },
    /// Seeded random signed-metric experiments; CSV by default.
    Harness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        g: usize,
        #[arg(long)]
        s: f64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// Runs a property suite: jl, sdp, spectral, matousek or metric.
    Verify {
        suite: String,
        #[arg(long)]
        fault: Option<String>,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        with_context(std::fs::read_to_string(path), path.display())?
    };
    with_context(serde_json::from_str(&text), path.display())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable payload")
}

fn metric_payload(m: &FiniteMetric) -> Value {
    to_value(m)
}

fn log_grid(spec: &[f64]) -> Result<Vec<f64>, CliError> {
    let (lo, hi, count) = (spec[0], spec[1], spec[2]);
    if !(lo > 0.0 && hi >= lo && count >= 1.0 && count.fract() == 0.0) {
        return Err(CliError::usage("grid needs 0 < lo <= hi and an integer count >= 1"));
    }
    let count = count as usize;
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi / lo).ln() / (count - 1) as f64;
    Ok((0..count).map(|i| lo * (step * i as f64).exp()).collect())
}

/// Payload, default output format, and exit code.
struct Outcome {
    payload: Value,
    format: Format,
    exit: u8,
}

impl From<Value> for Outcome {
    fn from(payload: Value) -> Self {
        Outcome {
            payload,
            format: Format::Json,
            exit: 0,
        }
    }
}

fn chain_of(chain: Option<&PathBuf>, graph: Option<&PathBuf>) -> Result<ReversibleChain, CliError> {
    match (chain, graph) {
        (Some(c), _) => read_json(c),
        (None, Some(g)) => Ok(chain_from_graph(&read_json::<Graph>(g)?)?),
        (None, None) => Err(CliError::usage("pass --chain or --graph")),
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let seed = cli.seed;
    let out = match &cli.command {
        Command::JlDim { n, alpha, mode } => {
            let mode = jl_mode(mode)?;
            if !(*alpha > 1.0) {
                return Err(JlError::ParameterDomain(format!("alpha must exceed 1, got {alpha}")).into());
            }
            to_value(&jl_plan(*n, *n, *alpha, mode.as_ref(), None)?).into()
        }
        Command::JlProject { cloud, alpha, mode, k, retries } => {
            let cloud: PointCloud = read_json(cloud)?;
            let opts = TransformOptions {
                alpha: *alpha,
                seed,
                max_retries: *retries,
                k: *k,
            };
            to_value(&jl_transform(&cloud, jl_mode(mode)?.as_ref(), &opts)?).into()
        }
        Command::Psi { n, k, alpha, sigma, samples } => {
            let sigma = match sigma {
                Some(s) => *s,
                None => sigma_max(*n, *k, *alpha)?,
            };
            let exact = psi(*n, *k, *alpha, sigma)?;
            let mut v = json!({"n": n, "k": k, "alpha": alpha, "sigma": sigma, "psi": exact.value});
            if let Some(s) = samples {
                let mc = psi_monte_carlo(*n, *k, *alpha, sigma, *s as usize, seed, false);
                v["monte_carlo"] = json!({"value": mc.value, "std_error": mc.std_error, "samples": s});
            }
            v.into()
        }
        Command::SigmaMax { n, k, alpha } => {
            let s = sigma_max(*n, *k, *alpha)?;
            json!({
                "n": n, "k": k, "alpha": alpha,
                "sigma_max": s,
                "ln_sigma_max": ln_sigma_max(*n, *k, *alpha)?,
                "psi": psi(*n, *k, *alpha, s)?.value,
            })
            .into()
        }
        Command::Distortion { source, target, map, cloud } => {
            let m: FiniteMetric = read_json(&source.metric)?;
            let report = match (target, map, cloud) {
                (Some(t), Some(map), _) => distortion(&m, &read_json(t)?, map)?,
                (_, _, Some(c)) => distortion_to_cloud(&m, &read_json(c)?)?,
                _ => return Err(CliError::usage("pass --target with --map, or --cloud")),
            };
            to_value(&report).into()
        }
        Command::Frechet { metric } => to_value(&frechet_embed(&read_json(&metric.metric)?)).into(),
        Command::Bourgain { metric } => {
            let m: FiniteMetric = read_json(&metric.metric)?;
            let cloud = bourgain_embed(&m, seed)?;
            let report = distortion_to_cloud(&m, &cloud)?;
            json!({"cloud": cloud, "distortion": report}).into()
        }
        Command::Snowflake { metric, theta } => {
            metric_payload(&snowflake(&read_json(&metric.metric)?, *theta)?).into()
        }
        Command::Doubling { metric, estimator, alpha } => {
            let m: FiniteMetric = read_json(&metric.metric)?;
            let est = doubling_estimator(estimator)?;
            json!({
                "estimator": est.name(),
                "doubling_constant": doubling_constant(&m, est.as_ref())?,
                "alpha": alpha,
                "doubling_lb": doubling_dim_lower_bound(&m, *alpha)?,
                "volumetric_lb": volumetric_lower_bound(m.len() as u64, *alpha)?,
            })
            .into()
        }
        Command::C2Sdp { metric } => {
            let m: FiniteMetric = read_json(&metric.metric)?;
            let r = c2_sdp(&m, cli.tol.unwrap_or(1e-6))?;
            let q: Vec<Vec<f64>> = r.witness.q.row_iter().map(|row| row.iter().copied().collect()).collect();
            json!({"alpha": r.alpha, "Q": q, "iterations": r.iterations, "bracket": [r.bracket.0, r.bracket.1]}).into()
        }
        Command::Certificate { metric, alpha, cert, iterations } => {
            let m: FiniteMetric = read_json(&metric.metric)?;
            match cert {
                Some(path) => {
                    let c: NegativeTypeCertificate = read_json(path)?;
                    to_value(&check_certificate(&m, &c, *alpha)?).into()
                }
                None => match search_violating_certificate(&m, *alpha, *iterations, seed) {
                    Some((c, check)) => json!({"found": true, "certificate": c, "check": check}).into(),
                    None => json!({"found": false}).into(),
                },
            }
        }
        Command::Gamma { chain, method, metric, p, norm, dim, samples } => {
            let c: ReversibleChain = read_json(chain)?;
            match method.as_str() {
                "hilbert" => json!({"method": "hilbert", "gamma": gamma_hilbert(&c)?, "lambda2": lambda2(&c)}).into(),
                "bruteforce" => {
                    let path = metric.as_ref().ok_or_else(|| CliError::usage("bruteforce needs --metric"))?;
                    let m: FiniteMetric = read_json(path)?;
                    json!({"method": "bruteforce", "p": p, "gamma": gamma_bruteforce(&c, &m, *p)?}).into()
                }
                "sampled" => {
                    let norm: Norm = serde_json::from_value(json!(norm))
                        .map_err(|_| CliError::usage(format!("unknown norm {norm:?}")))?;
                    to_value(&gamma_sampled_lower_bound(&c, norm, *dim, *samples, seed)?).into()
                }
                other => return Err(CliError::usage(format!("unknown gamma method {other:?}"))),
            }
        }
        Command::Rayleigh { chain, metric, assignment, cloud, p } => {
            let c: ReversibleChain = read_json(chain)?;
            let x = match (metric, assignment, cloud) {
                (Some(m), Some(a), _) => Configuration::from_metric(&read_json(m)?, a)?,
                (_, _, Some(cl)) => Configuration::from_cloud(&read_json(cl)?),
                _ => return Err(CliError::usage("pass --metric with --assignment, or --cloud")),
            };
            json!({"p": p, "rayleigh": rayleigh(&x, &c, *p)?}).into()
        }
        Command::TParam { chain, cloud, isomorph, d, t_cap } => {
            let c: ReversibleChain = read_json(chain)?;
            let cloud: PointCloud = read_json(cloud)?;
            let iso = hilbert_isomorph(isomorph)?;
            let d = d.unwrap_or_else(|| iso.distortion(cloud.dim()));
            let t = t_parameter(&cloud, &c, iso.as_ref(), d, *t_cap)?;
            let mut v = to_value(&t);
            v["ceiling"] = json!(t_ceiling(lambda2(&c), d));
            v.into()
        }
        Command::DimExponent { chain, graph, cloud } => {
            let c = chain_of(chain.as_ref(), graph.as_ref())?;
            to_value(&dim_lower_exponent(&read_json(cloud)?, &c)?).into()
        }
        Command::Cheeger { graph, chain } => {
            let c = chain_of(chain.as_ref(), graph.as_ref())?;
            to_value(&cheeger_sweep(&c)?).into()
        }
        Command::RegularGraph { n, r } => {
            let g = random_regular_graph(*n, *r, seed)?;
            let l2 = lambda2(&chain_from_graph(&g)?);
            let mut v = to_value(&g);
            v["lambda2"] = json!(l2);
            v.into()
        }
        Command::MarkovConvexity { spec, method, samples } => {
            let spec: MarkovChainSpec = read_json(spec)?;
            let r = match method.as_str() {
                "auto" => markov_convexity_ratio(&spec, *samples, seed),
                "exact" => markov_convexity_exact(&spec),
                "mc" => markov_convexity_monte_carlo(&spec, *samples, seed),
                other => return Err(CliError::usage(format!("unknown method {other:?}"))),
            };
            to_value(&r).into()
        }
        Command::MatousekGen { n, g } => {
            let t = gen_template(*n, *g, seed)?;
            json!({"template": t, "edges": t.edge_count(), "density_ratio": t.density_ratio(*g)}).into()
        }
        Command::SignedMetric { template, sigma, s, t } => {
            let tpl: TemplateGraph = read_json(template)?;
            let sigma = match sigma {
                Some(p) => read_json(p)?,
                None => SignAssignment::random(&tpl, seed),
            };
            let m = signed_metric(&tpl, &sigma, SignedMetricParams::new(*s, *t)?)?;
            json!({"metric": m, "min_fork_dist": min_fork_distance(&m)}).into()
        }
        Command::Beta { pair, alpha, tau, theta, table, grid, n_points } => {
            let params = match (pair.as_str(), table) {
                ("tabulated", Some(path)) => read_json::<Value>(path)?,
                ("tabulated", None) => return Err(CliError::usage("the tabulated pair needs --table")),
                _ => {
                    let alpha = alpha.ok_or_else(|| CliError::usage(format!("{pair} needs --alpha")))?;
                    json!({"tau": tau, "alpha": alpha, "theta": theta})
                }
            };
            let pair = modulus_pair(pair, &params)?;
            let grid = match grid {
                Some(g) => log_grid(g)?,
                None => Vec::new(),
            };
            let beta = beta_modulus(pair.as_ref(), &grid)?;
            let exponent = match n_points {
                Some(n) => Some(coarse_dim_exponent(*n, pair.as_ref(), &grid)?),
                None => None,
            };
            json!({"pair": pair.name(), "beta": beta, "n_points": n_points, "exponent": exponent}).into()
        }
        Command::Sweep { spec } => {
            let spec: sweep::SweepSpec = read_json(spec)?;
            Outcome {
                payload: Value::Array(sweep::run_sweep(&spec, seed)?),
                format: Format::Csv,
                exit: 0,
            }
        }
        Command::Pipeline { metric, alpha_total, mode, retries } => {
            let m: FiniteMetric = read_json(&metric.metric)?;
            let mode = jl_mode(mode)?;
            to_value(&pipeline::embed_reduce(&m, *alpha_total, mode.as_ref(), seed, *retries)?).into()
        }
        Command::Harness { n, g, s, t, trials, alpha } => {
            let rows = experiment_harness(HarnessParams {
                n: *n,
                g: *g,
                s: *s,
                t: *t,
                trials: *trials,
                seed,
                alpha: *alpha,
            })?;
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut v = to_value(r);
                    if r.girth.is_none() {
                        v["girth"] = json!("inf");
                    }
                    debug_assert!(HARNESS_COLUMNS.iter().all(|c| v.get(c).is_some()));
                    v
                })
                .collect();
            Outcome {
                payload: Value::Array(rows),
                format: Format::Csv,
                exit: 0,
            }
        }
        Command::Verify { suite, fault, cases } => {
            let suite = verify_suite(suite)?;
            let fault = fault.as_deref().map(str::parse::<Fault>).transpose()?;
            let report = suite.run(&VerifyOptions {
                seed,
                cases: *cases,
                fault,
            });
            Outcome {
                exit: if report.passed { 0 } else { 1 },
                payload: to_value(&report),
                format: Format::Json,
            }
        }
    };
    Ok(out)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            return fail(&CliError::usage(e.to_string().trim().to_string()));
        }
    };
    if let Some(t) = cli.threads {
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global();
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let format = cli.format.unwrap_or(outcome.format);
    let text = match render(outcome.payload, format) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    if let Err(e) = emit(&text, cli.out.as_deref()) {
        return fail(&e);
    }
    ExitCode::from(outcome.exit)
}
