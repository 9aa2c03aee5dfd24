//! Random girth-constrained bipartite templates, their coin-flip graphs
//! `G_σ`, the truncated metrics `min{s·d_{G_σ}, T}`, and the coarse modulus
//! `β(ω, Ω) = sup_s s / ω⁻¹(2Ω(s))`.
//!
//! Vertex layout of the signed graph on `3n` points: `λ⁺ = λ`,
//! `λ⁻ = n + λ`, `ρ ∈ R` at `2n + ρ`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::metric::{doubling_dim_lower_bound, volumetric_lower_bound, FiniteMetric, MetricError};
use crate::rng::{derive_seed, rng_for};

#[derive(Debug, Error, PartialEq)]
pub enum MatousekError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("edge ({0}, {1}) does not join L to R")]
    NotBipartite(usize, usize),
    #[error("partition must split 0..2n into two sides of size n: {0}")]
    BadPartition(String),
    #[error("stated girth {stated:?} differs from recomputed {computed:?}")]
    GirthMismatch {
        stated: Option<usize>,
        computed: Option<usize>,
    },
    #[error("sign assignment has {got} entries for {expected} edges")]
    SignLength { expected: usize, got: usize },
    #[error("girth assumption g <= T/s fails: g = {g}, s = {s}, T = {t}")]
    GirthAssumption { g: usize, s: f64, t: f64 },
    #[error("2Ω(s) = {value} lies outside the tabulated range [{min}, {max}] of ω")]
    InverseOutOfRange { value: f64, min: f64, max: f64 },
    #[error("invalid modulus table: {0}")]
    InvalidTable(String),
    #[error("unknown modulus pair {0:?}")]
    UnknownPair(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Bipartite graph `G = (L, R, E)` with `|L| = |R| = n`. Edges are stored
/// as side indices `(λ, ρ)`, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemplateJson", into = "TemplateJson")]
pub struct TemplateGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    girth: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
struct Partition {
    l: Vec<usize>,
    r: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TemplateJson {
    n: usize,
    partition: Partition,
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    girth: Option<usize>,
}

impl TryFrom<TemplateJson> for TemplateGraph {
    type Error = MatousekError;

    fn try_from(raw: TemplateJson) -> Result<Self, MatousekError> {
        let n = raw.n;
        let (l, r) = (&raw.partition.l, &raw.partition.r);
        if l.len() != n || r.len() != n {
            return Err(MatousekError::BadPartition(format!(
                "|L| = {}, |R| = {}, n = {n}",
                l.len(),
                r.len()
            )));
        }
        // side[v] = Some((is_left, index within side))
        let mut side: Vec<Option<(bool, usize)>> = vec![None; 2 * n];
        for (is_left, list) in [(true, l), (false, r)] {
            for (k, &v) in list.iter().enumerate() {
                if v >= 2 * n || side[v].is_some() {
                    return Err(MatousekError::BadPartition(format!("vertex {v}")));
                }
                side[v] = Some((is_left, k));
            }
        }
        let mut edges = Vec::with_capacity(raw.edges.len());
        for &(u, v) in &raw.edges {
            if u >= 2 * n || v >= 2 * n {
                return Err(GraphError::VertexOutOfRange(u, v, 2 * n).into());
            }
            match (side[u], side[v]) {
                (Some((true, a)), Some((false, b))) | (Some((false, b)), Some((true, a))) => {
                    edges.push((a, b))
                }
                _ => return Err(MatousekError::NotBipartite(u, v)),
            }
        }
        let t = TemplateGraph::from_side_edges(n, &edges)?;
        if raw.girth.is_some() && raw.girth != t.girth {
            return Err(MatousekError::GirthMismatch {
                stated: raw.girth,
                computed: t.girth,
            });
        }
        Ok(t)
    }
}

impl From<TemplateGraph> for TemplateJson {
    fn from(t: TemplateGraph) -> Self {
        let n = t.n;
        TemplateJson {
            n,
            partition: Partition {
                l: (0..n).collect(),
                r: (n..2 * n).collect(),
            },
            edges: t.edges.iter().map(|&(a, b)| (a, n + b)).collect(),
            girth: t.girth,
        }
    }
}

impl TemplateGraph {
    /// Builds a template from `(λ, ρ)` pairs with `λ, ρ < n`.
    pub fn from_side_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, MatousekError> {
        let mut g = Graph::new(2 * n);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::VertexOutOfRange(a, n + b, 2 * n).into());
            }
            g.add_edge(a, n + b)?;
        }
        Ok(Self::from_graph(n, &g))
    }

    fn from_graph(n: usize, g: &Graph) -> Self {
        let edges = g.edges().into_iter().map(|(u, v, _)| (u, v - n)).collect();
        TemplateGraph {
            n,
            edges,
            girth: g.girth(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Shortest cycle length, `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        self.girth
    }

    /// The template as a graph on `2n` vertices, `L = 0..n`, `R = n..2n`.
    pub fn graph(&self) -> Graph {
        let mut g = Graph::new(2 * self.n);
        for &(a, b) in &self.edges {
            g.add_edge(a, self.n + b).expect("validated template");
        }
        g
    }

    /// `|E| / n^{1 + 1/g}`.
    pub fn density_ratio(&self, g: usize) -> f64 {
        self.edges.len() as f64 / (self.n as f64).powf(1.0 + 1.0 / g as f64)
    }
}

/// Whether `v` is reachable from `u` within `limit` hops without using the
/// edge `{u, v}` itself.
fn short_detour(g: &Graph, u: usize, v: usize, limit: usize, dist: &mut [usize]) -> bool {
    let mut seen = vec![u];
    dist[u] = 0;
    let mut queue = VecDeque::from([u]);
    let mut found = false;
    'bfs: while let Some(x) = queue.pop_front() {
        if dist[x] == limit {
            continue;
        }
        for (y, _) in g.neighbors(x) {
            if x == u && y == v {
                continue;
            }
            if y == v {
                found = true;
                break 'bfs;
            }
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                seen.push(y);
                queue.push_back(y);
            }
        }
    }
    for x in seen {
        dist[x] = usize::MAX;
    }
    found
}

/// Samples each of the `n²` pairs `(λ, ρ)` with probability `n^{-1+2/g}`,
/// then scans the sampled edges in order and deletes every edge that still
/// closes a cycle of length below `g`. One pass suffices: a surviving short
/// cycle would have been detected at its last-scanned edge.
pub fn gen_template(n: usize, g: usize, seed: u64) -> Result<TemplateGraph, MatousekError> {
    if n < 2 {
        return Err(MatousekError::InvalidParams(format!("n = {n} must be at least 2")));
    }
    if g < 4 || g % 2 == 1 {
        return Err(MatousekError::InvalidParams(format!(
            "g = {g} must be even and at least 4"
        )));
    }
    let p = (n as f64).powf(-1.0 + 2.0 / g as f64).min(1.0);
    let mut rng = rng_for(seed, 0);
    let mut graph = Graph::new(2 * n);
    let mut sampled = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.random_bool(p) {
                graph.add_edge(a, n + b)?;
                sampled.push((a, n + b));
            }
        }
    }
    let mut dist = vec![usize::MAX; 2 * n];
    for (u, v) in sampled {
        // a cycle through {u, v} has length 1 + (detour length)
        if short_detour(&graph, u, v, g - 2, &mut dist) {
            graph.remove_edge(u, v);
        }
    }
    Ok(TemplateGraph::from_graph(n, &graph))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

/// `σ: E → {−, +}`, aligned with [`TemplateGraph::edges`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignAssignment {
    pub sigma: Vec<Sign>,
}

impl SignAssignment {
    pub fn random(t: &TemplateGraph, seed: u64) -> Self {
        let mut rng = rng_for(seed, 1);
        let sigma = (0..t.edge_count())
            .map(|_| if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus })
            .collect();
        SignAssignment { sigma }
    }

    pub fn constant(t: &TemplateGraph, sign: Sign) -> Self {
        SignAssignment {
            sigma: vec![sign; t.edge_count()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedMetricParams {
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

impl SignedMetricParams {
    pub fn new(s: f64, t: f64) -> Result<Self, MatousekError> {
        if !(s > 0.0 && s.is_finite() && t.is_finite() && t >= s) {
            return Err(MatousekError::InvalidParams(format!(
                "need 0 < s <= T, got s = {s}, T = {t}"
            )));
        }
        Ok(SignedMetricParams { s, t })
    }
}

/// `G_σ` on `L⁺ ∪ L⁻ ∪ R`: edge `{λ, ρ}` becomes `{λ^{σ(e)}, ρ}`.
pub fn signed_graph(t: &TemplateGraph, sigma: &SignAssignment) -> Result<Graph, MatousekError> {
    if sigma.sigma.len() != t.edge_count() {
        return Err(MatousekError::SignLength {
            expected: t.edge_count(),
            got: sigma.sigma.len(),
        });
    }
    let n = t.n;
    let mut g = Graph::new(3 * n);
    for (&(a, b), &s) in t.edges.iter().zip(&sigma.sigma) {
        let left = match s {
            Sign::Plus => a,
            Sign::Minus => n + a,
        };
        g.add_edge(left, 2 * n + b)?;
    }
    Ok(g)
}

/// `d_σ^{s,T} = min{s·d_{G_σ}, T}`, with disconnected pairs at `T`.
pub fn signed_metric(
    t: &TemplateGraph,
    sigma: &SignAssignment,
    params: SignedMetricParams,
) -> Result<FiniteMetric, MatousekError> {
    let params = SignedMetricParams::new(params.s, params.t)?;
    let g = signed_graph(t, sigma)?;
    let m = g.len();
    let rows: Vec<Vec<Option<usize>>> = (0..m).into_par_iter().map(|i| g.hop_distances(i)).collect();
    let dist = DMatrix::from_fn(m, m, |i, j| match rows[i][j] {
        Some(h) => (params.s * h as f64).min(params.t),
        None => params.t,
    });
    Ok(FiniteMetric::new(dist)?)
}

/// `min_λ d(λ⁺, λ⁻)` in a metric on `3n` points with the signed layout.
pub fn min_fork_distance(m: &FiniteMetric) -> f64 {
    let n = m.len() / 3;
    (0..n).map(|l| m.d(l, n + l)).fold(f64::INFINITY, f64::min)
}

/// A pair of moduli `ω ≤ Ω` with `ω` strictly increasing.
pub trait ModulusPair: Send + Sync {
    fn name(&self) -> &'static str;
    fn omega(&self, s: f64) -> f64;
    fn big_omega(&self, s: f64) -> Result<f64, MatousekError>;
    fn omega_inverse(&self, y: f64) -> Result<f64, MatousekError>;
    /// Closed form of `β`, when the family has one.
    fn analytic_beta(&self) -> Option<f64> {
        None
    }
}

/// `ω(s) = τ₁ s^θ`, `Ω(s) = τ₂ s^θ`; bi-Lipschitz when `θ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPair {
    pub tau_lower: f64,
    pub tau_upper: f64,
    pub theta: f64,
}

impl PowerPair {
    pub fn new(tau_lower: f64, tau_upper: f64, theta: f64) -> Result<Self, MatousekError> {
        if !(tau_lower > 0.0 && tau_upper >= tau_lower && tau_upper.is_finite()) {
            return Err(MatousekError::InvalidParams(format!(
                "need 0 < tau_lower <= tau_upper, got {tau_lower}, {tau_upper}"
            )));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(MatousekError::InvalidParams(format!("theta = {theta} must be positive")));
        }
        Ok(PowerPair {
            tau_lower,
            tau_upper,
            theta,
        })
    }

    /// `ω(s) = τs`, `Ω(s) = ατs`.
    pub fn bi_lipschitz(tau: f64, alpha: f64) -> Result<Self, MatousekError> {
        Self::new(tau, alpha * tau, 1.0)
    }

    /// `ω(s) = s^θ`, `Ω(s) = α s^θ`.
    pub fn snowflake(alpha: f64, theta: f64) -> Result<Self, MatousekError> {
        Self::new(1.0, alpha, theta)
    }
}

impl ModulusPair for PowerPair {
    fn name(&self) -> &'static str {
        "power"
    }

    fn omega(&self, s: f64) -> f64 {
        self.tau_lower * s.powf(self.theta)
    }

    fn big_omega(&self, s: f64) -> Result<f64, MatousekError> {
        Ok(self.tau_upper * s.powf(self.theta))
    }

    fn omega_inverse(&self, y: f64) -> Result<f64, MatousekError> {
        Ok((y / self.tau_lower).powf(1.0 / self.theta))
    }

    fn analytic_beta(&self) -> Option<f64> {
        Some((self.tau_lower / (2.0 * self.tau_upper)).powf(1.0 / self.theta))
    }
}

/// Moduli given at knots `s_0 < s_1 < …` and linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPair {
    pub s: Vec<f64>,
    pub omega: Vec<f64>,
    #[serde(rename = "Omega")]
    pub big_omega: Vec<f64>,
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let last = xs.len() - 1;
    if !(x >= xs[0] && x <= xs[last]) {
        return None;
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, last);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    Some(ys[k - 1] + w * (ys[k] - ys[k - 1]))
}

impl TabulatedPair {
    pub fn new(s: Vec<f64>, omega: Vec<f64>, big_omega: Vec<f64>) -> Result<Self, MatousekError> {
        let t = TabulatedPair { s, omega, big_omega };
        t.validate()?;
        Ok(t)
    }

    /// Tabulates `pair` at the given knots.
    pub fn sample(pair: &dyn ModulusPair, knots: &[f64]) -> Result<Self, MatousekError> {
        let omega = knots.iter().map(|&s| pair.omega(s)).collect();
        let big_omega = knots
            .iter()
            .map(|&s| pair.big_omega(s))
            .collect::<Result<_, _>>()?;
        Self::new(knots.to_vec(), omega, big_omega)
    }

    fn validate(&self) -> Result<(), MatousekError> {
        let n = self.s.len();
        if n < 2 || self.omega.len() != n || self.big_omega.len() != n {
            return Err(MatousekError::InvalidTable(
                "need at least two knots and equal column lengths".into(),
            ));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&self.s) && finite(&self.omega) && finite(&self.big_omega)) {
            return Err(MatousekError::InvalidTable("non-finite entry".into()));
        }
        for k in 1..n {
            if !(self.s[k] > self.s[k - 1]) || !(self.omega[k] > self.omega[k - 1]) {
                return Err(MatousekError::InvalidTable(format!(
                    "s and omega must be strictly increasing (knot {k})"
                )));
            }
            if self.big_omega[k] < self.big_omega[k - 1] {
                return Err(MatousekError::InvalidTable(format!("Omega decreases at knot {k}")));
            }
        }
        if let Some(k) = (0..n).find(|&k| self.omega[k] > self.big_omega[k]) {
            return Err(MatousekError::InvalidTable(format!("omega > Omega at knot {k}")));
        }
        Ok(())
    }
}

impl ModulusPair for TabulatedPair {
    fn name(&self) -> &'static str {
        "tabulated"
    }

    fn omega(&self, s: f64) -> f64 {
        interpolate(&self.s, &self.omega, s).unwrap_or(f64::NAN)
    }

    fn big_omega(&self, s: f64) -> Result<f64, MatousekError> {
        interpolate(&self.s, &self.big_omega, s).ok_or_else(|| {
            MatousekError::InvalidParams(format!(
                "s = {s} outside the tabulated range [{}, {}]",
                self.s[0],
                self.s[self.s.len() - 1]
            ))
        })
    }

    fn omega_inverse(&self, y: f64) -> Result<f64, MatousekError> {
        interpolate(&self.omega, &self.s, y).ok_or(MatousekError::InverseOutOfRange {
            value: y,
            min: self.omega[0],
            max: self.omega[self.omega.len() - 1],
        })
    }
}

pub const MODULUS_PAIRS: [&str; 3] = ["bilipschitz", "power", "tabulated"];

#[derive(Deserialize)]
struct BiLipschitzJson {
    #[serde(default = "one")]
    tau: f64,
    alpha: f64,
}

#[derive(Deserialize)]
struct PowerJson {
    #[serde(default = "one")]
    tau: f64,
    alpha: f64,
    theta: f64,
}

fn one() -> f64 {
    1.0
}

/// Builds a registered pair from its JSON parameters:
/// `bilipschitz {tau?, alpha}`, `power {tau?, alpha, theta}` with
/// `ω = τ s^θ, Ω = ατ s^θ`, and `tabulated {s, omega, Omega}`.
pub fn modulus_pair(
    name: &str,
    params: &serde_json::Value,
) -> Result<Box<dyn ModulusPair>, MatousekError> {
    let bad = |e: serde_json::Error| MatousekError::InvalidParams(format!("{name}: {e}"));
    match name {
        "bilipschitz" => {
            let p: BiLipschitzJson = serde_json::from_value(params.clone()).map_err(bad)?;
            Ok(Box::new(PowerPair::bi_lipschitz(p.tau, p.alpha)?))
        }
        "power" => {
            let p: PowerJson = serde_json::from_value(params.clone()).map_err(bad)?;
            Ok(Box::new(PowerPair::new(p.tau, p.alpha * p.tau, p.theta)?))
        }
        "tabulated" => {
            let t: TabulatedPair = serde_json::from_value(params.clone()).map_err(bad)?;
            t.validate()?;
            Ok(Box::new(t))
        }
        other => Err(MatousekError::UnknownPair(other.to_string())),
    }
}

/// `sup_s s / ω⁻¹(2Ω(s))`: closed form when available, otherwise the
/// maximum over the positive points of `grid`.
pub fn beta_modulus(pair: &dyn ModulusPair, grid: &[f64]) -> Result<f64, MatousekError> {
    if let Some(b) = pair.analytic_beta() {
        return Ok(b);
    }
    let mut best = f64::NEG_INFINITY;
    for &s in grid.iter().filter(|&&s| s > 0.0) {
        let inv = pair.omega_inverse(2.0 * pair.big_omega(s)?)?;
        best = best.max(s / inv);
    }
    if !best.is_finite() {
        return Err(MatousekError::InvalidParams("grid has no positive point".into()));
    }
    Ok(best)
}

/// `β(ω, Ω)·ln(n_points)`: the exponent of `n` in the dimension lower bound,
/// up to a universal constant.
pub fn coarse_dim_exponent(
    n_points: u64,
    pair: &dyn ModulusPair,
    grid: &[f64],
) -> Result<f64, MatousekError> {
    if n_points < 2 {
        return Err(MatousekError::InvalidParams(format!(
            "n_points = {n_points} must be at least 2"
        )));
    }
    Ok(beta_modulus(pair, grid)? * (n_points as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessParams {
    pub n: usize,
    pub g: usize,
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub trials: usize,
    pub seed: u64,
    /// Distortion used for the two dimension lower bounds.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessRow {
    pub trial: usize,
    pub n: usize,
    pub g: usize,
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub edges: usize,
    pub girth: Option<usize>,
    pub min_fork_dist: f64,
    pub doubling_lb: f64,
    pub volumetric_lb: f64,
}

pub const HARNESS_COLUMNS: [&str; 10] = [
    "trial",
    "n",
    "g",
    "s",
    "T",
    "edges",
    "girth",
    "min_fork_dist",
    "doubling_lb",
    "volumetric_lb",
];

/// One row per trial: template, random signs, truncated metric, and the
/// doubling and volumetric dimension lower bounds of the sampled metric.
/// Trial `i` uses seed `derive_seed(seed, i)`, so rows do not depend on the
/// thread count.
pub fn experiment_harness(p: HarnessParams) -> Result<Vec<HarnessRow>, MatousekError> {
    let params = SignedMetricParams::new(p.s, p.t)?;
    if p.g as f64 > p.t / p.s {
        return Err(MatousekError::GirthAssumption {
            g: p.g,
            s: p.s,
            t: p.t,
        });
    }
    let volumetric = volumetric_lower_bound(3 * p.n as u64, p.alpha)?;
    (0..p.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(p.seed, trial as u64);
            let template = gen_template(p.n, p.g, seed)?;
            let sigma = SignAssignment::random(&template, seed);
            let metric = signed_metric(&template, &sigma, params)?;
            Ok(HarnessRow {
                trial,
                n: p.n,
                g: p.g,
                s: p.s,
                t: p.t,
                edges: template.edge_count(),
                girth: template.girth(),
                min_fork_dist: min_fork_distance(&metric),
                doubling_lb: doubling_dim_lower_bound(&metric, p.alpha)?,
                volumetric_lb: volumetric,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g4_is_plain_bipartite() {
        let t = gen_template(12, 4, 3).unwrap();
        assert!(t.girth().is_none_or(|g| g >= 4));
        let full = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert_eq!(full.girth(), Some(4));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gen_template(1, 6, 0).is_err());
        assert!(gen_template(10, 5, 0).is_err());
        assert!(gen_template(10, 2, 0).is_err());
        assert!(SignedMetricParams::new(2.0, 1.0).is_err());
        assert!(SignedMetricParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn template_json_roundtrip_and_relabel() {
        let t = TemplateGraph::from_side_edges(2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert_eq!(t.girth(), Some(4));
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<TemplateGraph>(&s).unwrap(), t);
        let swapped = r#"{"n":2,"partition":{"L":[2,3],"R":[0,1]},"edges":[[0,2],[1,2],[0,3],[1,3]]}"#;
        assert_eq!(serde_json::from_str::<TemplateGraph>(swapped).unwrap(), t);
        let bad = r#"{"n":2,"partition":{"L":[0,1],"R":[2,3]},"edges":[[0,1]]}"#;
        assert!(serde_json::from_str::<TemplateGraph>(bad).is_err());
        let lie = r#"{"n":2,"partition":{"L":[0,1],"R":[2,3]},"edges":[[0,2]],"girth":4}"#;
        assert!(serde_json::from_str::<TemplateGraph>(lie).is_err());
    }

    #[test]
    fn four_cycle_forks() {
        // all-plus signs keep the 4-cycle on L⁺ ∪ R and isolate L⁻
        let t = TemplateGraph::from_side_edges(2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let plus = SignAssignment::constant(&t, Sign::Plus);
        let m = signed_metric(&t, &plus, SignedMetricParams::new(1.0, 10.0).unwrap()).unwrap();
        assert_eq!(m.d(0, 4), 1.0);
        assert_eq!(m.d(0, 1), 2.0);
        assert_eq!(min_fork_distance(&m), 10.0);
        // one minus sign opens the cycle into the path λ0⁺ ρ0 λ1⁺ ρ1 λ0⁻
        let mixed = SignAssignment {
            sigma: vec![Sign::Plus, Sign::Minus, Sign::Plus, Sign::Plus],
        };
        let m = signed_metric(&t, &mixed, SignedMetricParams::new(1.0, 10.0).unwrap()).unwrap();
        assert_eq!(m.d(0, 2), 4.0);
        assert_eq!(m.d(1, 3), 10.0);
    }

    #[test]
    fn closed_form_betas() {
        let bl = PowerPair::bi_lipschitz(3.0, 2.0).unwrap();
        assert!((beta_modulus(&bl, &[]).unwrap() - 0.25).abs() < 1e-15);
        let sf = PowerPair::snowflake(2.0, 0.5).unwrap();
        assert!((beta_modulus(&sf, &[]).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        let p = modulus_pair("power", &serde_json::json!({"alpha": 4.0, "theta": 0.5})).unwrap();
        assert!((beta_modulus(p.as_ref(), &[]).unwrap() - 1.0 / 64.0).abs() < 1e-15);
        assert!(modulus_pair("cubic", &serde_json::json!({})).is_err());
    }

    #[test]
    fn tabulated_inverse_out_of_range() {
        let t = TabulatedPair::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 4.0])
            .unwrap();
        assert!((beta_modulus(&t, &[0.5]).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            beta_modulus(&t, &[1.0]),
            Err(MatousekError::InverseOutOfRange { .. })
        ));
        assert!(TabulatedPair::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn harness_checks_girth_assumption() {
        let p = HarnessParams {
            n: 8,
            g: 6,
            s: 1.0,
            t: 5.0,
            trials: 2,
            seed: 0,
            alpha: 2.0,
        };
        assert!(matches!(
            experiment_harness(p),
            Err(MatousekError::GirthAssumption { .. })
        ));
    }
}
