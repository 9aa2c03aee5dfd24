//! Markov `q`-convexity ratios of finite chains.
//!
//! The chain runs for times `0..=T` from the initial law. For a branch time
//! `b`, the fork `χ̃(b)` copies `χ` up to `b` and then evolves independently.
//! The left side sums `2^{-qk} E d(f(χ̃_t(t-2^k)), f(χ_t))^q` over `k ≥ 1`
//! and `2^k ≤ t ≤ T`; the right side sums `E d(f(χ_t), f(χ_{t-1}))^q`.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::metric::{FiniteMetric, PointCloud};
use crate::rng::{monte_carlo_vec, Rng};

pub const MAX_HORIZON: usize = 64;
pub const MAX_STATES: usize = 64;
/// Exact evaluation is used when `states² · T` stays within this budget.
pub const DP_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "SpecJson")]
pub struct MarkovChainSpec {
    transition: DMatrix<f64>,
    initial: DVector<f64>,
    horizon: usize,
    /// `d(f(u), f(v))` for states `u, v`.
    image: DMatrix<f64>,
    q: f64,
}

#[derive(Deserialize)]
struct SpecJson {
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
    horizon: usize,
    q: f64,
    #[serde(flatten)]
    target: TargetJson,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TargetJson {
    Metric { metric: FiniteMetric, map: Vec<usize> },
    Cloud { cloud: PointCloud },
}

impl TryFrom<SpecJson> for MarkovChainSpec {
    type Error = SpectralError;

    fn try_from(raw: SpecJson) -> Result<Self, SpectralError> {
        let s = raw.transition.len();
        if raw.transition.iter().any(|r| r.len() != s) {
            return Err(SpectralError::InvalidSpec("transition matrix must be square".into()));
        }
        let p = DMatrix::from_fn(s, s, |i, j| raw.transition[i][j]);
        let init = DVector::from_vec(raw.initial);
        match raw.target {
            TargetJson::Metric { metric, map } => {
                MarkovChainSpec::with_metric_map(p, init, raw.horizon, &metric, &map, raw.q)
            }
            TargetJson::Cloud { cloud } => {
                MarkovChainSpec::with_cloud(p, init, raw.horizon, &cloud, raw.q)
            }
        }
    }
}

impl Serialize for MarkovChainSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
        };
        let mut st = s.serialize_struct("MarkovChainSpec", 5)?;
        st.serialize_field("transition", &rows(&self.transition))?;
        st.serialize_field("initial", self.initial.as_slice())?;
        st.serialize_field("horizon", &self.horizon)?;
        st.serialize_field("q", &self.q)?;
        st.serialize_field("image", &rows(&self.image))?;
        st.end()
    }
}

impl MarkovChainSpec {
    pub fn new(
        transition: DMatrix<f64>,
        initial: DVector<f64>,
        horizon: usize,
        image: DMatrix<f64>,
        q: f64,
    ) -> Result<Self, SpectralError> {
        let s = transition.nrows();
        let bad = |m: String| Err(SpectralError::InvalidSpec(m));
        if s == 0 || transition.ncols() != s || initial.len() != s || image.shape() != (s, s) {
            return bad(format!("shapes disagree for {s} states"));
        }
        if horizon > MAX_HORIZON || s > MAX_STATES {
            return Err(SpectralError::HorizonTooLarge { horizon, states: s });
        }
        if horizon < 2 {
            return bad(format!("horizon {horizon} must be at least 2"));
        }
        if !(q > 0.0 && q.is_finite()) {
            return bad(format!("exponent q = {q} must be positive"));
        }
        for i in 0..s {
            let row = transition.row(i);
            if row.iter().any(|&x| !(x >= 0.0)) || (row.sum() - 1.0).abs() > 1e-12 {
                return bad(format!("transition row {i} is not a probability vector"));
            }
        }
        if initial.iter().any(|&x| !(x >= 0.0)) || (initial.sum() - 1.0).abs() > 1e-12 {
            return bad("initial law is not a probability vector".into());
        }
        if image.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return bad("image distances must be finite and non-negative".into());
        }
        Ok(MarkovChainSpec {
            transition,
            initial,
            horizon,
            image,
            q,
        })
    }

    /// `f(state) = map[state]` in a finite metric.
    pub fn with_metric_map(
        transition: DMatrix<f64>,
        initial: DVector<f64>,
        horizon: usize,
        m: &FiniteMetric,
        map: &[usize],
        q: f64,
    ) -> Result<Self, SpectralError> {
        if map.len() != transition.nrows() {
            return Err(SpectralError::InvalidSpec(format!(
                "map has {} entries for {} states",
                map.len(),
                transition.nrows()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&v| v >= m.len()) {
            return Err(SpectralError::InvalidSpec(format!("map value {bad} outside the metric")));
        }
        let s = map.len();
        let image = DMatrix::from_fn(s, s, |i, j| m.d(map[i], map[j]));
        Self::new(transition, initial, horizon, image, q)
    }

    /// `f(state)` = row `state` of the cloud.
    pub fn with_cloud(
        transition: DMatrix<f64>,
        initial: DVector<f64>,
        horizon: usize,
        cloud: &PointCloud,
        q: f64,
    ) -> Result<Self, SpectralError> {
        Self::new(transition, initial, horizon, cloud.pairwise(), q)
    }

    pub fn states(&self) -> usize {
        self.transition.nrows()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn dq(&self, u: usize, v: usize) -> f64 {
        self.image[(u, v)].powf(self.q)
    }

    /// `(k, 2^k)` pairs with `2^k ≤ T`.
    fn scales(&self) -> Vec<(u32, usize)> {
        (1..usize::BITS)
            .map(|k| (k, 1usize << k))
            .take_while(|&(_, h)| h <= self.horizon)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityMethod {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovConvexity {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; `None` when the chain's image never moves.
    pub ratio: Option<f64>,
    /// The sums before the `1/q` power, with their standard errors.
    pub lhs_pow: f64,
    pub rhs_pow: f64,
    pub lhs_pow_se: f64,
    pub rhs_pow_se: f64,
    pub method: ConvexityMethod,
}

impl MarkovConvexity {
    fn from_sums(
        lhs_pow: f64,
        rhs_pow: f64,
        ses: (f64, f64),
        q: f64,
        method: ConvexityMethod,
    ) -> Self {
        let lhs = lhs_pow.powf(1.0 / q);
        let rhs = rhs_pow.powf(1.0 / q);
        MarkovConvexity {
            lhs,
            rhs,
            ratio: (rhs > 0.0).then(|| lhs / rhs),
            lhs_pow,
            rhs_pow,
            lhs_pow_se: ses.0,
            rhs_pow_se: ses.1,
            method,
        }
    }
}

/// Exact expectations by propagating the marginal laws.
pub fn markov_convexity_exact(spec: &MarkovChainSpec) -> MarkovConvexity {
    let s = spec.states();
    let p = &spec.transition;
    let mut laws = vec![spec.initial.transpose()];
    for t in 1..=spec.horizon {
        let next = &laws[t - 1] * p;
        laws.push(next);
    }
    let mut rhs = 0.0;
    for law in &laws[..spec.horizon] {
        for u in 0..s {
            for v in 0..s {
                rhs += law[u] * p[(u, v)] * spec.dq(u, v);
            }
        }
    }
    let mut lhs = 0.0;
    let mut power = p.clone();
    let mut power_exp = 1usize;
    for (k, h) in spec.scales() {
        while power_exp < h {
            power = &power * &power;
            power_exp *= 2;
        }
        // c(s) = Σ_{u,v} P^h(s,u) P^h(s,v) d(f(u), f(v))^q
        let cross: Vec<f64> = (0..s)
            .map(|b| {
                let mut acc = 0.0;
                for u in 0..s {
                    let pu = power[(b, u)];
                    if pu == 0.0 {
                        continue;
                    }
                    for v in 0..s {
                        acc += pu * power[(b, v)] * spec.dq(u, v);
                    }
                }
                acc
            })
            .collect();
        let weight = 2f64.powf(-spec.q * k as f64);
        for law in &laws[..=spec.horizon - h] {
            lhs += weight * (0..s).map(|b| law[b] * cross[b]).sum::<f64>();
        }
    }
    MarkovConvexity::from_sums(lhs, rhs, (0.0, 0.0), spec.q, ConvexityMethod::Exact)
}

fn cumulative_rows(p: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..p.nrows())
        .map(|i| {
            let mut acc = 0.0;
            p.row(i)
                .iter()
                .map(|&x| {
                    acc += x;
                    acc
                })
                .collect()
        })
        .collect()
}

fn draw(cdf: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

/// Monte Carlo with one independent fork per branch time and sample.
pub fn markov_convexity_monte_carlo(
    spec: &MarkovChainSpec,
    samples: usize,
    seed: u64,
) -> MarkovConvexity {
    let t_max = spec.horizon;
    let rows = cumulative_rows(&spec.transition);
    let init = {
        let mut acc = 0.0;
        spec.initial
            .iter()
            .map(|&x| {
                acc += x;
                acc
            })
            .collect::<Vec<f64>>()
    };
    let scales = spec.scales();
    let est = monte_carlo_vec(samples, seed, 2, |rng, out| {
        let mut path = Vec::with_capacity(t_max + 1);
        path.push(draw(&init, rng));
        for t in 1..=t_max {
            let next = draw(&rows[path[t - 1]], rng);
            path.push(next);
        }
        out[1] = (1..=t_max).map(|t| spec.dq(path[t - 1], path[t])).sum();
        let mut lhs = 0.0;
        for b in 0..t_max.saturating_sub(1) {
            let mut state = path[b];
            let mut time = b;
            for &(k, h) in &scales {
                let t = b + h;
                if t > t_max {
                    break;
                }
                while time < t {
                    state = draw(&rows[state], rng);
                    time += 1;
                }
                lhs += 2f64.powf(-spec.q * k as f64) * spec.dq(state, path[t]);
            }
        }
        out[0] = lhs;
    });
    MarkovConvexity::from_sums(
        est[0].mean,
        est[1].mean,
        (est[0].std_error, est[1].std_error),
        spec.q,
        ConvexityMethod::MonteCarlo { samples },
    )
}

/// Exact when `states² · T ≤ DP_BUDGET`, Monte Carlo otherwise.
pub fn markov_convexity_ratio(
    spec: &MarkovChainSpec,
    samples: usize,
    seed: u64,
) -> MarkovConvexity {
    if spec.states() * spec.states() * spec.horizon <= DP_BUDGET {
        markov_convexity_exact(spec)
    } else {
        markov_convexity_monte_carlo(spec, samples, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_walk(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            let deg = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            if i.abs_diff(j) == 1 {
                1.0 / deg
            } else {
                0.0
            }
        })
    }

    #[test]
    fn two_state_flip_by_hand() {
        // deterministic flip: the fork equals the chain
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let m = FiniteMetric::from_line(&[0.0, 1.0]).unwrap();
        let init = DVector::from_vec(vec![1.0, 0.0]);
        let spec = MarkovChainSpec::with_metric_map(p, init, 4, &m, &[0, 1], 2.0).unwrap();
        let r = markov_convexity_exact(&spec);
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs_pow, 4.0);
    }

    #[test]
    fn fair_coin_by_hand() {
        // i.i.d. fair bits: every cross term is E|X - Y|² = 1/2
        let p = DMatrix::from_element(2, 2, 0.5);
        let m = FiniteMetric::from_line(&[0.0, 1.0]).unwrap();
        let init = DVector::from_vec(vec![0.5, 0.5]);
        let spec = MarkovChainSpec::with_metric_map(p, init, 4, &m, &[0, 1], 2.0).unwrap();
        let r = markov_convexity_exact(&spec);
        // k = 1: t = 2,3,4 weight 1/4; k = 2: t = 4 weight 1/16
        let expect = 0.5 * (3.0 / 4.0 + 1.0 / 16.0);
        assert!((r.lhs_pow - expect).abs() < 1e-15);
        assert!((r.rhs_pow - 2.0).abs() < 1e-15);
    }

    #[test]
    fn guards() {
        let p = path_walk(3);
        let cloud = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], crate::metric::Norm::L2)
            .unwrap();
        let init = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            MarkovChainSpec::with_cloud(p.clone(), init.clone(), 65, &cloud, 2.0),
            Err(SpectralError::HorizonTooLarge { .. })
        ));
        assert!(MarkovChainSpec::with_cloud(p, init, 1, &cloud, 2.0).is_err());
    }

    #[test]
    fn json_spec() {
        let j = r#"{"transition":[[0,1],[1,0]],"initial":[1,0],"horizon":3,"q":2,
                    "metric":{"n":2,"dist":[[0,1],[1,0]]},"map":[0,1]}"#;
        let spec: MarkovChainSpec = serde_json::from_str(j).unwrap();
        assert_eq!(spec.states(), 2);
    }
}
