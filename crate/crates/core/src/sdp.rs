//! Euclidean distortion `c₂` of a finite metric by semidefinite feasibility.
//!
//! A matrix `D` of squared distances is realizable in Hilbert space iff it
//! has zero diagonal and `-VᵀDV ⪰ 0`, where the columns of `V` are an
//! orthonormal basis of `1^⊥`. Distortion `α` is feasible iff some such `D`
//! satisfies `d_ij² ≤ D_ij ≤ α² d_ij²`. Both constraint sets are convex and
//! have cheap Frobenius projections, so feasibility is decided by alternating
//! projections and `α²` is found by bisection.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{FiniteMetric, MetricError, Norm, PointCloud};
use crate::rng::rng_for;

pub const MAX_POINTS: usize = 64;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("c2 computation limited to {max} points, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("iteration budget exhausted after {iterations} steps; c2 lies in [{lo}, {hi}]")]
    IterationCapExceeded { lo: f64, hi: f64, iterations: usize },
    #[error("tolerance {0} is below the supported minimum 1e-6")]
    ToleranceTooSmall(f64),
    #[error("invalid certificate: {0}")]
    CertificateInvalid(String),
    #[error("matrix is not positive semidefinite: eigenvalue {0:e}")]
    NotPsd(f64),
    #[error("size mismatch: metric has {metric} points, matrix has {matrix}")]
    SizeMismatch { metric: usize, matrix: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Gram matrix of a point configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramCandidate {
    pub n: usize,
    #[serde(rename = "Q", with = "rows")]
    pub q: DMatrix<f64>,
}

/// Symmetric PSD matrix with zero row sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CertJson")]
pub struct NegativeTypeCertificate {
    pub n: usize,
    #[serde(rename = "A", with = "rows")]
    pub a: DMatrix<f64>,
}

#[derive(Deserialize)]
struct CertJson {
    n: usize,
    #[serde(rename = "A", with = "rows")]
    a: DMatrix<f64>,
}

impl TryFrom<CertJson> for NegativeTypeCertificate {
    type Error = SdpError;

    fn try_from(raw: CertJson) -> Result<Self, SdpError> {
        if raw.a.nrows() != raw.n {
            return Err(SdpError::CertificateInvalid(format!(
                "n = {} but A has {} rows",
                raw.n,
                raw.a.nrows()
            )));
        }
        NegativeTypeCertificate::new(raw.a)
    }
}

mod rows {
    use nalgebra::DMatrix;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect();
        serde::Serialize::serialize(&rows, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("matrix must be square"));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

impl NegativeTypeCertificate {
    pub fn new(a: DMatrix<f64>) -> Result<Self, SdpError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SdpError::CertificateInvalid("matrix must be square".into()));
        }
        let scale = a.amax().max(1.0);
        let tol = 1e-9 * scale;
        if (&a - a.transpose()).amax() > tol {
            return Err(SdpError::CertificateInvalid("matrix is not symmetric".into()));
        }
        for i in 0..n {
            let s: f64 = a.row(i).sum();
            if s.abs() > tol {
                return Err(SdpError::CertificateInvalid(format!("row {i} sums to {s}")));
            }
        }
        if n > 0 {
            let min = SymmetricEigen::new(a.clone()).eigenvalues.min();
            if min < -tol {
                return Err(SdpError::CertificateInvalid(format!(
                    "minimum eigenvalue {min:e} is negative"
                )));
            }
        }
        Ok(NegativeTypeCertificate { n, a })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Evaluates `Σ a_ij d_ij² ≤ ((α²-1)/(α²+1)) Σ |a_ij| d_ij²` over all ordered
/// pairs. The inequality holds for every certificate iff `c₂ ≤ α`.
pub fn check_certificate(
    m: &FiniteMetric,
    cert: &NegativeTypeCertificate,
    alpha: f64,
) -> Result<CertificateCheck, SdpError> {
    if cert.n != m.len() {
        return Err(SdpError::SizeMismatch {
            metric: m.len(),
            matrix: cert.n,
        });
    }
    let (lhs, abs) = certificate_sums(m, &cert.a);
    let a2 = alpha * alpha;
    let rhs = (a2 - 1.0) / (a2 + 1.0) * abs;
    Ok(CertificateCheck {
        holds: lhs <= rhs + 1e-12 * rhs.abs(),
        lhs,
        rhs,
    })
}

fn certificate_sums(m: &FiniteMetric, a: &DMatrix<f64>) -> (f64, f64) {
    let n = m.len();
    let (mut lhs, mut abs) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let d2 = m.d(i, j) * m.d(i, j);
            lhs += a[(i, j)] * d2;
            abs += a[(i, j)].abs() * d2;
        }
    }
    (lhs, abs)
}

/// Orthonormal basis of the vectors with zero coordinate sum, as columns.
fn centered_basis(n: usize) -> DMatrix<f64> {
    // Helmert basis
    let mut v = DMatrix::zeros(n, n.saturating_sub(1));
    for c in 0..n.saturating_sub(1) {
        let k = (c + 1) as f64;
        let norm = 1.0 / (k * (k + 1.0)).sqrt();
        for r in 0..=c {
            v[(r, c)] = norm;
        }
        v[(c + 1, c)] = -k * norm;
    }
    v
}

/// Projected subgradient ascent for a certificate violating the inequality
/// at level `alpha`, over trace-one PSD matrices with zero row sums. Returns
/// the most violating certificate found if any violates.
pub fn search_violating_certificate(
    m: &FiniteMetric,
    alpha: f64,
    iterations: usize,
    seed: u64,
) -> Option<(NegativeTypeCertificate, CertificateCheck)> {
    let n = m.len();
    if n < 2 {
        return None;
    }
    let v = centered_basis(n);
    let a2 = alpha * alpha;
    let c = (a2 - 1.0) / (a2 + 1.0);
    let d2 = m.matrix().map(|d| d * d);
    let scale = d2.amax();
    let mut rng = rng_for(seed, 0x6365);
    let y = DMatrix::from_fn(n - 1, n - 1, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut x = project_spectraplex(&y * y.transpose());
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for t in 0..iterations {
        let a = &v * &x * v.transpose();
        let (lhs, abs) = certificate_sums(m, &a);
        let gap = lhs - c * abs;
        if best.as_ref().is_none_or(|(g, _)| gap > *g) {
            best = Some((gap, a.clone()));
        }
        let grad = DMatrix::from_fn(n, n, |i, j| d2[(i, j)] * (1.0 - c * a[(i, j)].signum()));
        let step = 1.0 / (scale * ((t + 1) as f64).sqrt());
        x = project_spectraplex(&x + v.transpose() * grad * &v * step);
    }
    let (gap, a) = best?;
    if gap <= 0.0 {
        return None;
    }
    let a = (&a + a.transpose()) * 0.5;
    let cert = NegativeTypeCertificate::new(a).ok()?;
    let check = check_certificate(m, &cert, alpha).ok()?;
    (!check.holds).then_some((cert, check))
}

/// Frobenius projection onto `{X ⪰ 0, tr X = 1}`.
fn project_spectraplex(x: DMatrix<f64>) -> DMatrix<f64> {
    let x = (&x + x.transpose()) * 0.5;
    let eig = SymmetricEigen::new(x);
    let mut lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut sorted = lam.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    for l in lam.iter_mut() {
        *l = (*l - theta).max(0.0);
    }
    let u = &eig.eigenvectors;
    u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lam)) * u.transpose()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Bisection stops once the bracket on `α` is narrower than `tol`.
    pub tol: f64,
    /// Iteration cap for a single feasibility check.
    pub max_check_iters: usize,
    /// Iteration budget across the whole bisection.
    pub max_total_iters: usize,
    /// Iterations between stall tests.
    pub stall_window: usize,
}

impl SdpOptions {
    pub fn with_tol(tol: f64) -> Self {
        SdpOptions {
            tol,
            max_check_iters: 20_000,
            max_total_iters: 2_000_000,
            stall_window: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpResult {
    pub alpha: f64,
    pub witness: GramCandidate,
    pub iterations: usize,
    /// Final bisection bracket `[infeasible, feasible]` on `α`.
    pub bracket: (f64, f64),
}

enum Feasibility {
    Feasible(DMatrix<f64>),
    Infeasible,
}

struct Solver {
    n: usize,
    v: DMatrix<f64>,
    d2: DMatrix<f64>,
    dmin2: f64,
    opts: SdpOptions,
    iterations: usize,
}

impl Solver {
    fn new(m: &FiniteMetric, opts: SdpOptions) -> Self {
        let n = m.len();
        let d2 = m.matrix().map(|d| d * d);
        Solver {
            n,
            v: centered_basis(n),
            dmin2: m.min_distance().powi(2),
            d2,
            opts,
            iterations: 0,
        }
    }

    fn project_box(&self, d: &mut DMatrix<f64>, a2: f64) {
        for i in 0..self.n {
            d[(i, i)] = 0.0;
            for j in 0..self.n {
                if i != j {
                    let lo = self.d2[(i, j)];
                    d[(i, j)] = d[(i, j)].clamp(lo, a2 * lo);
                }
            }
        }
    }

    /// Projection onto `{D : VᵀDV ⪯ 0}`.
    fn project_cone(&self, d: &DMatrix<f64>) -> DMatrix<f64> {
        let inner = self.v.transpose() * d * &self.v;
        let inner = (&inner + inner.transpose()) * 0.5;
        let eig = SymmetricEigen::new(inner);
        let pos = eig.eigenvalues.map(|l| l.max(0.0));
        let u = &eig.eigenvectors;
        let plus = u * DMatrix::from_diagonal(&pos) * u.transpose();
        d - &self.v * plus * self.v.transpose()
    }

    /// Gram matrix `-½ J Y J` of a cone point and whether its distances fit
    /// the box up to relative slack `eps`.
    fn witness(&self, y: &DMatrix<f64>, a2: f64, eps: f64) -> (DMatrix<f64>, bool) {
        let n = self.n;
        let g = -(&self.v * (self.v.transpose() * y * &self.v) * self.v.transpose()) * 0.5;
        let g = (&g + g.transpose()) * 0.5;
        let mut ok = true;
        'outer: for i in 0..n {
            for j in (i + 1)..n {
                let k = g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)];
                let lo = self.d2[(i, j)];
                if k < lo * (1.0 - eps) || k > a2 * lo * (1.0 + eps) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        (g, ok)
    }

    fn check(&mut self, a2: f64, d: &mut DMatrix<f64>) -> Result<Feasibility, ()> {
        let eps = self.opts.tol / (2.0 * a2.sqrt());
        let target = 0.25 * eps * self.dmin2;
        self.project_box(d, a2);
        let mut last_disp = f64::INFINITY;
        for it in 1..=self.opts.max_check_iters {
            if self.iterations >= self.opts.max_total_iters {
                return Err(());
            }
            self.iterations += 1;
            let y = self.project_cone(d);
            let (g, ok) = self.witness(&y, a2, eps);
            if ok {
                return Ok(Feasibility::Feasible(g));
            }
            let disp = (&y - &*d).norm();
            *d = y;
            self.project_box(d, a2);
            if it % self.opts.stall_window == 0 {
                let rate = if last_disp.is_finite() && last_disp > 0.0 {
                    disp / last_disp
                } else {
                    0.0
                };
                let windows_left =
                    (self.opts.max_check_iters - it) as f64 / self.opts.stall_window as f64;
                let predicted = disp * rate.min(1.0).powf(windows_left);
                if predicted > target {
                    return Ok(Feasibility::Infeasible);
                }
                last_disp = disp;
            }
        }
        Ok(Feasibility::Infeasible)
    }
}

/// Euclidean distortion `c₂(m)` to within `tol`, with a Gram witness.
pub fn c2_sdp(m: &FiniteMetric, tol: f64) -> Result<SdpResult, SdpError> {
    c2_sdp_with(m, SdpOptions::with_tol(tol))
}

pub fn c2_sdp_with(m: &FiniteMetric, opts: SdpOptions) -> Result<SdpResult, SdpError> {
    let n = m.len();
    if n > MAX_POINTS {
        return Err(SdpError::TooLarge { n, max: MAX_POINTS });
    }
    if !(opts.tol >= 1e-6) {
        return Err(SdpError::ToleranceTooSmall(opts.tol));
    }
    if n <= 2 {
        let q = if n == 2 {
            let h = m.d(0, 1).powi(2) / 4.0;
            DMatrix::from_row_slice(2, 2, &[h, -h, -h, h])
        } else {
            DMatrix::zeros(n, n)
        };
        return Ok(SdpResult {
            alpha: 1.0,
            witness: GramCandidate { n, q },
            iterations: 0,
            bracket: (1.0, 1.0),
        });
    }
    let mut solver = Solver::new(m, opts);
    let dmax = m.max_distance();
    let mut hi = dmax / m.min_distance();
    // an equilateral simplex of side dmax realizes distortion dmax/dmin
    let mut best = DMatrix::from_fn(n, n, |i, j| {
        let c = if i == j { 1.0 - 1.0 / n as f64 } else { -1.0 / n as f64 };
        0.5 * dmax * dmax * c
    });
    let mut d = solver.d2.clone();
    let mut lo = 1.0;
    let exhausted = |lo: f64, hi: f64, solver: &Solver| SdpError::IterationCapExceeded {
        lo,
        hi,
        iterations: solver.iterations,
    };
    match solver.check(1.0, &mut d) {
        Ok(Feasibility::Feasible(g)) => {
            return Ok(SdpResult {
                alpha: 1.0,
                witness: GramCandidate { n, q: g },
                iterations: solver.iterations,
                bracket: (1.0, 1.0),
            })
        }
        Ok(Feasibility::Infeasible) => {}
        Err(()) => return Err(exhausted(lo, hi, &solver)),
    }
    while hi - lo > opts.tol {
        let mid = (0.5 * (lo * lo + hi * hi)).sqrt();
        let mut trial = d.clone();
        match solver.check(mid * mid, &mut trial) {
            Ok(Feasibility::Feasible(g)) => {
                hi = mid;
                best = g;
                d = trial;
            }
            Ok(Feasibility::Infeasible) => lo = mid,
            Err(()) => return Err(exhausted(lo, hi, &solver)),
        }
    }
    Ok(SdpResult {
        alpha: hi,
        witness: GramCandidate { n, q: best },
        iterations: solver.iterations,
        bracket: (lo, hi),
    })
}

/// Factors `Q = VΛVᵀ` and returns the rows of `VΛ^{1/2}` as an `ℓ₂` cloud.
pub fn extract_points(q: &GramCandidate) -> Result<PointCloud, SdpError> {
    let n = q.n;
    if q.q.shape() != (n, n) {
        return Err(SdpError::SizeMismatch {
            metric: n,
            matrix: q.q.nrows(),
        });
    }
    if n == 0 {
        return Ok(PointCloud::new(DMatrix::zeros(0, 0), Norm::L2)?);
    }
    let sym = (&q.q + q.q.transpose()) * 0.5;
    let trace_scale = sym.trace().abs().max(sym.amax()).max(1.0);
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if min < -1e-9 * trace_scale {
        return Err(SdpError::NotPsd(min));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let coords = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
    Ok(PointCloud::new(coords, Norm::L2)?)
}
