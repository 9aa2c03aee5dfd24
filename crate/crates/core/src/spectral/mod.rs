//! Reversible Markov chains, spectral gaps and nonlinear Rayleigh quotients.

mod cheeger;
mod hilbert;
mod markov;
mod regular;

pub use cheeger::{cheeger_sweep, conductance, CheegerCut};
pub use hilbert::{
    dim_lower_exponent, hilbert_isomorph, hilbert_isomorphs, hilbert_rayleigh_identity,
    power_expander_check, t_ceiling, t_parameter, DimExponent, HilbertIdentity, HilbertIsomorph,
    L1L2, L2L2, LinfL2, PowerCheck, TParameter,
};
pub use markov::{
    markov_convexity_exact, markov_convexity_monte_carlo, markov_convexity_ratio,
    ConvexityMethod, MarkovChainSpec, MarkovConvexity, DP_BUDGET, MAX_HORIZON, MAX_STATES,
};
pub use regular::random_regular_graph;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::metric::{FiniteMetric, MetricError, PointCloud};
use crate::rng::rng_for;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge ({0}, {1}) has non-positive weight {2}")]
    NegativeWeight(usize, usize, f64),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("configuration is constant; the Rayleigh quotient is undefined")]
    DegenerateConfiguration,
    #[error("cloud is degenerate: {0}")]
    DegenerateCloud(String),
    #[error("chain has no spectral gap (lambda2 = {0})")]
    NoGap(f64),
    #[error("exhaustive enumeration of {0} configurations exceeds the limit 1e6")]
    TooLarge(u128),
    #[error("no t <= {0} reaches the Rayleigh threshold")]
    CapExceeded(usize),
    #[error("size mismatch: chain has {chain} states, configuration has {config}")]
    SizeMismatch { chain: usize, config: usize },
    #[error("norm mismatch: {0}")]
    NormMismatch(String),
    #[error("unknown Hilbert isomorph {0:?}")]
    UnknownIsomorph(String),
    #[error("random regular graph needs n*r even, r >= 3 and n > r (n = {n}, r = {r})")]
    RegularDomain { n: usize, r: usize },
    #[error("pairing model produced no simple graph in {0} attempts")]
    GenerationFailure(usize),
    #[error("horizon {horizon} or state count {states} exceeds the limit 64")]
    HorizonTooLarge { horizon: usize, states: usize },
    #[error("invalid Markov chain spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Row-stochastic `A` reversible with respect to the probability vector `π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainJson", into = "ChainJson")]
pub struct ReversibleChain {
    a: DMatrix<f64>,
    pi: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChainJson {
    n: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    pi: Vec<f64>,
}

impl TryFrom<ChainJson> for ReversibleChain {
    type Error = SpectralError;

    fn try_from(raw: ChainJson) -> Result<Self, SpectralError> {
        let n = raw.n;
        if raw.a.len() != n || raw.a.iter().any(|r| r.len() != n) || raw.pi.len() != n {
            return Err(SpectralError::InvalidChain(format!(
                "A must be {n}x{n} and pi must have {n} entries"
            )));
        }
        ReversibleChain::new(
            DMatrix::from_fn(n, n, |i, j| raw.a[i][j]),
            DVector::from_vec(raw.pi),
        )
    }
}

impl From<ReversibleChain> for ChainJson {
    fn from(c: ReversibleChain) -> Self {
        ChainJson {
            n: c.len(),
            a: (0..c.len()).map(|i| c.a.row(i).iter().copied().collect()).collect(),
            pi: c.pi.iter().copied().collect(),
        }
    }
}

impl ReversibleChain {
    pub fn new(a: DMatrix<f64>, pi: DVector<f64>) -> Result<Self, SpectralError> {
        let n = a.nrows();
        let bad = |s: String| Err(SpectralError::InvalidChain(s));
        if n < 2 || a.ncols() != n || pi.len() != n {
            return bad(format!("need a square matrix on at least 2 states, got {}x{}", n, a.ncols()));
        }
        if a.iter().chain(pi.iter()).any(|x| !x.is_finite()) {
            return bad("non-finite entry".into());
        }
        if a.iter().any(|&x| x < 0.0) {
            return bad("negative transition probability".into());
        }
        if pi.iter().any(|&x| x <= 0.0) || (pi.sum() - 1.0).abs() > 1e-12 {
            return bad("pi must be a strictly positive probability vector".into());
        }
        for i in 0..n {
            let s = a.row(i).sum();
            if (s - 1.0).abs() > 1e-12 {
                return bad(format!("row {i} sums to {s}"));
            }
            for j in 0..n {
                let (f, b) = (pi[i] * a[(i, j)], pi[j] * a[(j, i)]);
                if (f - b).abs() > 1e-12 {
                    return bad(format!("detailed balance fails at ({i}, {j}): {f} vs {b}"));
                }
            }
        }
        let drift = (pi.transpose() * &a - pi.transpose()).amax();
        if drift > 1e-10 {
            return bad(format!("pi is not stationary (error {drift:e})"));
        }
        Ok(ReversibleChain { a, pi })
    }

    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn pi(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn identity(pi: DVector<f64>) -> Result<Self, SpectralError> {
        let n = pi.len();
        ReversibleChain::new(DMatrix::identity(n, n), pi)
    }

    /// `(1-δ)I + δA`.
    pub fn lazy(&self, delta: f64) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::identity(n, n) * (1.0 - delta) + &self.a * delta
    }

    /// `D_π^{1/2} A D_π^{-1/2}`, symmetrized against rounding.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.len();
        let s = DMatrix::from_fn(n, n, |i, j| {
            self.a[(i, j)] * (self.pi[i] / self.pi[j]).sqrt()
        });
        (&s + s.transpose()) * 0.5
    }

    /// Eigenvalues in decreasing order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.symmetrized())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// Simple random walk: `A_ij = w_ij / deg(i)`, `π_i = deg(i) / (2W)`.
pub fn chain_from_graph(g: &Graph) -> Result<ReversibleChain, SpectralError> {
    for (i, j, w) in g.edges() {
        if w <= 0.0 {
            return Err(SpectralError::NegativeWeight(i, j, w));
        }
    }
    if g.len() < 2 || !g.is_connected() {
        return Err(SpectralError::Disconnected);
    }
    let n = g.len();
    let deg: Vec<f64> = (0..n).map(|i| g.weighted_degree(i)).collect();
    let total: f64 = deg.iter().sum();
    let mut a = DMatrix::zeros(n, n);
    for (i, j, w) in g.edges() {
        a[(i, j)] = w / deg[i];
        a[(j, i)] = w / deg[j];
    }
    let pi = DVector::from_iterator(n, deg.iter().map(|d| d / total));
    ReversibleChain::new(a, pi)
}

pub fn lambda2(chain: &ReversibleChain) -> f64 {
    chain.spectrum()[1]
}

/// `γ(A, ‖·‖_H²) = 1/(1-λ₂)`.
pub fn gamma_hilbert(chain: &ReversibleChain) -> Result<f64, SpectralError> {
    let l2 = lambda2(chain);
    if l2 >= 1.0 - 1e-12 {
        return Err(SpectralError::NoGap(l2));
    }
    Ok(1.0 / (1.0 - l2))
}

/// Pairwise distances `d(x_i, x_j)` of a configuration `i ↦ x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    dist: DMatrix<f64>,
}

impl Configuration {
    /// `x_i = point[assignment[i]]` in a finite metric.
    pub fn from_metric(m: &FiniteMetric, assignment: &[usize]) -> Result<Self, SpectralError> {
        if let Some(&bad) = assignment.iter().find(|&&a| a >= m.len()) {
            return Err(MetricError::MapOutOfRange {
                index: bad,
                len: m.len(),
            }
            .into());
        }
        let n = assignment.len();
        Ok(Configuration {
            dist: DMatrix::from_fn(n, n, |i, j| m.d(assignment[i], assignment[j])),
        })
    }

    /// `x_i` = row `i` of the cloud.
    pub fn from_cloud(cloud: &PointCloud) -> Self {
        Configuration {
            dist: cloud.pairwise(),
        }
    }

    pub fn from_distances(dist: DMatrix<f64>) -> Self {
        Configuration { dist }
    }

    pub fn len(&self) -> usize {
        self.dist.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn distances(&self) -> &DMatrix<f64> {
        &self.dist
    }
}

/// `R(x; M, d^p) = Σ π_i M_ij d_ij^p / Σ π_i π_j d_ij^p` for any matrix `M`.
pub fn rayleigh_matrix(
    x: &Configuration,
    m: &DMatrix<f64>,
    pi: &DVector<f64>,
    p: f64,
) -> Result<f64, SpectralError> {
    let n = pi.len();
    if x.len() != n || m.nrows() != n {
        return Err(SpectralError::SizeMismatch {
            chain: n,
            config: x.len(),
        });
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let dp = x.dist[(i, j)].powf(p);
            num += pi[i] * m[(i, j)] * dp;
            den += pi[i] * pi[j] * dp;
        }
    }
    if den <= 0.0 {
        return Err(SpectralError::DegenerateConfiguration);
    }
    Ok(num / den)
}

pub fn rayleigh(x: &Configuration, chain: &ReversibleChain, p: f64) -> Result<f64, SpectralError> {
    rayleigh_matrix(x, chain.matrix(), chain.pi(), p)
}

pub const BRUTEFORCE_LIMIT: u128 = 1_000_000;

/// `γ(A, d^p)` for a finite target metric: the largest `1/R(x; A, d^p)` over
/// every non-constant `x ∈ m^n`.
pub fn gamma_bruteforce(
    chain: &ReversibleChain,
    m: &FiniteMetric,
    p: f64,
) -> Result<f64, SpectralError> {
    let n = chain.len();
    let k = m.len();
    let total = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > BRUTEFORCE_LIMIT {
        return Err(SpectralError::TooLarge(total));
    }
    if k < 2 {
        return Err(SpectralError::DegenerateConfiguration);
    }
    let d: DMatrix<f64> = m.matrix().map(|v| v.powf(p));
    let a = chain.matrix();
    let pi = chain.pi();
    let mut assignment = vec![0usize; n];
    let mut best = 0.0f64;
    for code in 0..total {
        let mut c = code;
        for slot in assignment.iter_mut() {
            *slot = (c % k as u128) as usize;
            c /= k as u128;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let dp = d[(assignment[i], assignment[j])];
                num += pi[i] * a[(i, j)] * dp;
                den += pi[i] * pi[j] * dp;
            }
        }
        if den > 0.0 {
            best = best.max(den / num);
        }
    }
    Ok(best)
}

/// One-sided estimate of `γ(A, ‖·‖_X²)` for `X = (ℝ^dim, norm)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaLowerBound {
    pub value: f64,
    pub samples: usize,
    /// Always `"certified lower bound"`: the supremum is only sampled.
    pub kind: &'static str,
}

/// Largest `1/R(x; A, ‖·‖²)` over random Gaussian configurations and over
/// configurations built from the second eigenvector. Every value is attained
/// by an explicit `x`, so the result never exceeds the true `γ`.
pub fn gamma_sampled_lower_bound(
    chain: &ReversibleChain,
    norm: crate::metric::Norm,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<GammaLowerBound, SpectralError> {
    let n = chain.len();
    let eig = SymmetricEigen::new(chain.symmetrized());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let v2 = eig.eigenvectors.column(order[1]);
    let phi: Vec<f64> = (0..n).map(|i| v2[i] / chain.pi()[i].sqrt()).collect();
    let mut best = 0.0f64;
    let mut consider = |coords: DMatrix<f64>| -> Result<(), SpectralError> {
        let cloud = PointCloud::new(coords, norm)?;
        if let Ok(r) = rayleigh(&Configuration::from_cloud(&cloud), chain, 2.0) {
            best = best.max(1.0 / r);
        }
        Ok(())
    };
    consider(DMatrix::from_fn(n, dim, |i, c| if c == 0 { phi[i] } else { 0.0 }))?;
    let mut rng = rng_for(seed, 0x676d);
    for s in 0..samples {
        if s % 2 == 0 {
            consider(DMatrix::from_fn(n, dim, |_, _| rng.sample::<f64, _>(StandardNormal)))?;
        } else {
            // the eigenvector along a random direction plus small noise
            let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let noise = 0.1 * phi.iter().map(|x| x.abs()).fold(0.0, f64::max);
            consider(DMatrix::from_fn(n, dim, |i, c| {
                phi[i] * dir[c] + noise * rng.sample::<f64, _>(StandardNormal)
            }))?;
        }
    }
    Ok(GammaLowerBound {
        value: best,
        samples: samples + 1,
        kind: "certified lower bound",
    })
}

/// Random connected chain: the walk on `K_n` with i.i.d. `U[0.1, 1]` weights.
pub fn random_chain(n: usize, seed: u64) -> ReversibleChain {
    let mut rng = rng_for(seed, 0x6368);
    let mut g = Graph::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            g.add_weighted_edge(i, j, rng.random_range(0.1..1.0))
                .expect("complete graph edges are valid");
        }
    }
    chain_from_graph(&g).expect("complete graphs are connected")
}

/// Random chain reversible with respect to a prescribed `π`: a symmetric
/// flow `S` with zero diagonal is scaled so that `B_ij = S_ij / π_i` leaves
/// non-negative holding probabilities.
pub fn random_chain_with_pi(pi: &DVector<f64>, seed: u64) -> ReversibleChain {
    let n = pi.len();
    let mut rng = rng_for(seed, 0x7069);
    let mut s = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = if rng.random_bool(0.7) { rng.random_range(0.0..1.0) } else { 0.0 };
            s[(i, j)] = w;
            s[(j, i)] = w;
        }
    }
    let fill: f64 = rng.random_range(0.3..1.0);
    let scale = (0..n)
        .map(|i| pi[i] / s.row(i).sum().max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min)
        * fill;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                b[(i, j)] = scale * s[(i, j)] / pi[i];
            }
        }
        let off: f64 = b.row(i).sum();
        b[(i, i)] = 1.0 - off;
    }
    ReversibleChain::new(b, pi.clone()).expect("construction is reversible")
}
