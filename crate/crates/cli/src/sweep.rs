//! Cross-product parameter sweeps, one CSV row per grid cell.
//!
//! A sweep spec is `{"command": name, "grid": {param: [values]}, "fixed":
//! {param: value}}`. Cells are enumerated with the last grid parameter
//! varying fastest; cell `i` runs with seed `derive_seed(seed, i)`.

use mdrlab::jl::{jl_mode, jl_plan, psi, psi_monte_carlo, sigma_max};
use mdrlab::matousek::{coarse_dim_exponent, experiment_harness, modulus_pair, HarnessParams};
use mdrlab::metric::gen::random_cloud;
use mdrlab::metric::Norm;
use mdrlab::rng::derive_seed;
use mdrlab::spectral::{chain_from_graph, dim_lower_exponent, random_regular_graph};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::parse_count;

#[derive(Debug, Deserialize)]
pub struct SweepSpec {
    pub command: String,
    pub grid: Map<String, Value>,
    #[serde(default)]
    pub fixed: Map<String, Value>,
}

/// Commands a sweep can run, with their result columns.
pub const SWEEP_COMMANDS: [(&str, &[&str]); 5] = [
    ("jl-dim", &["k", "sigma", "success_prob", "union_bound"]),
    ("psi", &["sigma", "psi", "mc", "mc_se"]),
    ("beta", &["beta", "exponent"]),
    (
        "matousek",
        &["edges_mean", "girth_min", "min_fork_dist", "doubling_lb_mean", "volumetric_lb"],
    ),
    ("dim-exponent", &["lambda2", "alpha_hat", "spread", "exponent"]),
];

struct Params<'a> {
    map: &'a Map<String, Value>,
}

impl Params<'_> {
    fn raw(&self, key: &str) -> Option<&Value> {
        self.map.get(key)
    }

    fn f64(&self, key: &str) -> Result<f64, CliError> {
        match self.raw(key) {
            Some(Value::Number(n)) => Ok(n.as_f64().expect("json number")),
            Some(Value::String(s)) => s
                .parse()
                .map_err(|_| CliError::usage(format!("{key}: {s:?} is not a number"))),
            Some(other) => Err(CliError::usage(format!("{key}: {other} is not a number"))),
            None => Err(CliError::usage(format!("missing parameter {key}"))),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        if self.raw(key).is_some() {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    fn count(&self, key: &str) -> Result<u64, CliError> {
        match self.raw(key) {
            Some(Value::String(s)) => parse_count(s).map_err(CliError::usage),
            Some(_) => parse_count(&self.f64(key)?.to_string()).map_err(CliError::usage),
            None => Err(CliError::usage(format!("missing parameter {key}"))),
        }
    }

    fn count_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        if self.raw(key).is_some() {
            self.count(key)
        } else {
            Ok(default)
        }
    }

    fn str_or<'b>(&'b self, key: &str, default: &'b str) -> &'b str {
        self.raw(key).and_then(Value::as_str).unwrap_or(default)
    }
}

fn run_cell(command: &str, p: &Params, seed: u64) -> Result<Value, CliError> {
    match command {
        "jl-dim" => {
            let n = p.count("n")?;
            let mode = jl_mode(p.str_or("mode", "haar_projection"))?;
            let plan = jl_plan(n, n, p.f64("alpha")?, mode.as_ref(), None)?;
            Ok(json!({"k": plan.k, "sigma": plan.sigma, "success_prob": plan.success_prob, "union_bound": plan.union_bound}))
        }
        "psi" => {
            let (n, k, alpha) = (p.count("n")?, p.count("k")?, p.f64("alpha")?);
            let sigma = match p.raw("sigma") {
                Some(_) => p.f64("sigma")?,
                None => sigma_max(n, k, alpha)?,
            };
            let exact = psi(n, k, alpha, sigma)?;
            let samples = p.count_or("samples", 0)? as usize;
            let (mc, se) = if samples > 0 {
                let est = psi_monte_carlo(n, k, alpha, sigma, samples, seed, false);
                (json!(est.value), json!(est.std_error))
            } else {
                (Value::Null, Value::Null)
            };
            Ok(json!({"sigma": sigma, "psi": exact.value, "mc": mc, "mc_se": se}))
        }
        "beta" => {
            let name = p.str_or("pair", "power");
            let params = json!({
                "tau": p.f64_or("tau", 1.0)?,
                "alpha": p.f64("alpha")?,
                "theta": p.f64_or("theta", 1.0)?,
            });
            let pair = modulus_pair(name, &params)?;
            let beta = mdrlab::matousek::beta_modulus(pair.as_ref(), &[])?;
            let exponent = match p.raw("n_points") {
                Some(_) => json!(coarse_dim_exponent(p.count("n_points")?, pair.as_ref(), &[])?),
                None => Value::Null,
            };
            Ok(json!({"beta": beta, "exponent": exponent}))
        }
        "matousek" => {
            let hp = HarnessParams {
                n: p.count("n")? as usize,
                g: p.count("g")? as usize,
                s: p.f64("s")?,
                t: p.f64("T")?,
                trials: p.count_or("trials", 1)? as usize,
                seed,
                alpha: p.f64_or("alpha", 2.0)?,
            };
            let rows = experiment_harness(hp)?;
            let count = rows.len().max(1) as f64;
            let girth_min = rows.iter().filter_map(|r| r.girth).min();
            Ok(json!({
                "edges_mean": rows.iter().map(|r| r.edges as f64).sum::<f64>() / count,
                "girth_min": girth_min.map_or(json!("inf"), |g| json!(g)),
                "min_fork_dist": rows.iter().map(|r| r.min_fork_dist).fold(f64::INFINITY, f64::min),
                "doubling_lb_mean": rows.iter().map(|r| r.doubling_lb).sum::<f64>() / count,
                "volumetric_lb": rows.first().map(|r| r.volumetric_lb),
            }))
        }
        "dim-exponent" => {
            let n = p.count("n")? as usize;
            let g = random_regular_graph(n, p.count_or("r", 3)? as usize, seed)?;
            let chain = chain_from_graph(&g)?;
            let cloud = random_cloud(n, p.count_or("dim", 2)? as usize, Norm::L2, derive_seed(seed, 1));
            let e = dim_lower_exponent(&cloud, &chain)?;
            Ok(json!({"lambda2": e.lambda2, "alpha_hat": e.alpha_hat, "spread": e.spread, "exponent": e.exponent}))
        }
        other => Err(CliError::usage(format!("sweep does not support command {other:?}"))),
    }
}

/// Runs every cell and returns one JSON object per row; failing cells keep
/// their parameters, leave result columns empty and fill `error`.
pub fn run_sweep(spec: &SweepSpec, seed: u64) -> Result<Vec<Value>, CliError> {
    let columns = SWEEP_COMMANDS
        .iter()
        .find(|(name, _)| *name == spec.command)
        .map(|(_, cols)| *cols)
        .ok_or_else(|| {
            let names: Vec<&str> = SWEEP_COMMANDS.iter().map(|(n, _)| *n).collect();
            CliError::usage(format!("unknown sweep command {:?}; expected one of {names:?}", spec.command))
        })?;
    let mut axes: Vec<(&String, &Vec<Value>)> = Vec::new();
    for (key, values) in &spec.grid {
        let values = values
            .as_array()
            .ok_or_else(|| CliError::usage(format!("grid entry {key} must be an array")))?;
        axes.push((key, values));
    }
    let cells: usize = axes.iter().map(|(_, v)| v.len()).product();
    let rows = (0..cells)
        .into_par_iter()
        .map(|cell| {
            let mut params = spec.fixed.clone();
            let mut rem = cell;
            let mut picked = Vec::with_capacity(axes.len());
            for (key, values) in axes.iter().rev() {
                picked.push(((*key).clone(), values[rem % values.len()].clone()));
                rem /= values.len();
            }
            picked.reverse();
            let mut row = Map::new();
            for (key, value) in picked {
                params.insert(key.clone(), value.clone());
                row.insert(key, value);
            }
            match run_cell(&spec.command, &Params { map: &params }, derive_seed(seed, cell as u64)) {
                Ok(Value::Object(result)) => {
                    for col in columns {
                        row.insert(col.to_string(), result.get(*col).cloned().unwrap_or(Value::Null));
                    }
                    row.insert("error".into(), Value::Null);
                }
                Ok(_) => unreachable!("cells return objects"),
                Err(e) => {
                    for col in columns {
                        row.insert(col.to_string(), Value::Null);
                    }
                    row.insert("error".into(), json!(format!("{}: {}", e.code, e.message)));
                }
            }
            Value::Object(row)
        })
        .collect();
    Ok(rows)
}
