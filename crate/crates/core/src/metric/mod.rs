//! Finite metric spaces, point clouds and classical embeddings.

mod cotype;
mod doubling;
mod embed;
pub mod gen;

pub use cotype::{metric_cotype_ratio, CotypeRatio};
pub use doubling::{
    doubling_constant, doubling_dim_lower_bound, doubling_estimator, doubling_estimators,
    volumetric_lower_bound, DoublingEstimator, ExactCover, GreedyCover, MAX_EXACT_POINTS,
};
pub use embed::{
    bourgain_embed, bourgain_subsets_per_scale, distortion, distortion_to_cloud, frechet_embed,
    snowflake, EmbeddingReport,
};
pub(crate) use embed::report as distortion_report;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack allowed in the triangle inequality and in symmetry checks.
pub const TRIANGLE_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("distance matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("metric must have at least one point")]
    Empty,
    #[error("non-finite distance at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("diagonal entry d({0},{0}) = {1} is not zero")]
    NonzeroDiagonal(usize, f64),
    #[error("d({i},{j}) = {dij} differs from d({j},{i}) = {dji}")]
    SymmetryViolation { i: usize, j: usize, dij: f64, dji: f64 },
    #[error("distance d({0},{1}) = {2} is not strictly positive")]
    NonPositive(usize, usize, f64),
    #[error("triangle inequality fails: d({i},{k}) = {dik} > d({i},{j}) + d({j},{k}) = {via}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        dik: f64,
        via: f64,
    },
    #[error("map is not injective: {0} and {1} land on the same point")]
    NonInjectiveMap(usize, usize),
    #[error("map has {got} entries for a source of {expected} points")]
    MapLength { expected: usize, got: usize },
    #[error("map sends index {index} outside a target of {len} points")]
    MapOutOfRange { index: usize, len: usize },
    #[error("distortion needs at least two source points")]
    DegenerateSource,
    #[error("points {0} and {1} coincide in the image")]
    CollapsedPair(usize, usize),
    #[error("snowflake exponent {0} is outside (0, 1]")]
    ThetaOutOfRange(f64),
    #[error("exact doubling constant limited to {max} points, got {n}")]
    TooLargeForExact { n: usize, max: usize },
    #[error("distortion alpha = {0} must be at least 1")]
    AlphaBelowOne(f64),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("cotype configuration too large: (2m)^n = {0} exceeds 4096")]
    ConfigTooLarge(u128),
    #[error("configuration has {got} points, expected (2m)^n = {expected}")]
    IndexMismatch { expected: usize, got: usize },
    #[error("point cloud shape mismatch: {0}")]
    Shape(String),
    #[error("invalid norm: {0}")]
    InvalidNorm(String),
    #[error("unknown doubling estimator {0:?}")]
    UnknownEstimator(String),
}

/// An n-point metric space given by its validated distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricJson", into = "MetricJson")]
pub struct FiniteMetric {
    dist: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct MetricJson {
    n: usize,
    dist: Vec<Vec<f64>>,
}

impl TryFrom<MetricJson> for FiniteMetric {
    type Error = MetricError;

    fn try_from(raw: MetricJson) -> Result<Self, MetricError> {
        if raw.dist.len() != raw.n {
            return Err(MetricError::NotSquare {
                rows: raw.dist.len(),
                cols: raw.n,
            });
        }
        FiniteMetric::from_rows(&raw.dist)
    }
}

impl From<FiniteMetric> for MetricJson {
    fn from(m: FiniteMetric) -> Self {
        MetricJson {
            n: m.len(),
            dist: m.rows(),
        }
    }
}

impl FiniteMetric {
    /// Validates a distance matrix: square, finite, zero diagonal, symmetric,
    /// positive off the diagonal, and satisfying the triangle inequality up to
    /// `TRIANGLE_RTOL` times the largest entry.
    pub fn new(dist: DMatrix<f64>) -> Result<Self, MetricError> {
        let (rows, cols) = dist.shape();
        if rows != cols {
            return Err(MetricError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(MetricError::Empty);
        }
        let n = rows;
        let mut max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = dist[(i, j)];
                if !d.is_finite() {
                    return Err(MetricError::NonFinite(i, j));
                }
                max = max.max(d.abs());
            }
        }
        let slack = TRIANGLE_RTOL * max;
        for i in 0..n {
            if dist[(i, i)] != 0.0 {
                return Err(MetricError::NonzeroDiagonal(i, dist[(i, i)]));
            }
            for j in (i + 1)..n {
                let (dij, dji) = (dist[(i, j)], dist[(j, i)]);
                if (dij - dji).abs() > slack {
                    return Err(MetricError::SymmetryViolation { i, j, dij, dji });
                }
                if dij <= 0.0 {
                    return Err(MetricError::NonPositive(i, j, dij));
                }
            }
        }
        for j in 0..n {
            for i in 0..n {
                let dij = dist[(i, j)];
                for k in 0..n {
                    let via = dij + dist[(j, k)];
                    let dik = dist[(i, k)];
                    if dik > via + slack {
                        return Err(MetricError::TriangleViolation { i, j, k, dik, via });
                    }
                }
            }
        }
        Ok(FiniteMetric { dist })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(MetricError::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Equilateral metric: every pair at distance `d`.
    pub fn uniform(n: usize, d: f64) -> Result<Self, MetricError> {
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { d }))
    }

    /// Points on the real line with `|x - y|` distances.
    pub fn from_line(points: &[f64]) -> Result<Self, MetricError> {
        let n = points.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| (points[i] - points[j]).abs()))
    }

    pub fn len(&self) -> usize {
        self.dist.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| self.dist.row(i).iter().copied().collect())
            .collect()
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.max()
    }

    /// Smallest off-diagonal distance (0 for a single point).
    pub fn min_distance(&self) -> f64 {
        let n = self.len();
        let mut m = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                m = m.min(self.dist[(i, j)]);
            }
        }
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Same metric with every distance multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self, MetricError> {
        Self::new(&self.dist * c)
    }
}

/// Host norm of a [`PointCloud`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    L1,
    Linf,
    Lp(f64),
}

impl Norm {
    pub fn validate(self) -> Result<Self, MetricError> {
        match self {
            Norm::Lp(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(MetricError::InvalidNorm(format!("lp exponent {p} must be a finite value >= 1")))
            }
            other => Ok(other),
        }
    }

    pub fn norm<I: IntoIterator<Item = f64>>(self, coords: I) -> f64 {
        let it = coords.into_iter();
        match self {
            Norm::L2 => it.map(|x| x * x).sum::<f64>().sqrt(),
            Norm::L1 => it.map(f64::abs).sum(),
            Norm::Linf => it.map(f64::abs).fold(0.0, f64::max),
            Norm::Lp(p) => it.map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

/// `n` points in a `dim`-dimensional normed space; rows of `coords` are points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CloudJson", into = "CloudJson")]
pub struct PointCloud {
    coords: DMatrix<f64>,
    norm: Norm,
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    n: usize,
    dim: usize,
    norm: Norm,
    coords: Vec<Vec<f64>>,
}

impl TryFrom<CloudJson> for PointCloud {
    type Error = MetricError;

    fn try_from(raw: CloudJson) -> Result<Self, MetricError> {
        if raw.coords.len() != raw.n {
            return Err(MetricError::Shape(format!(
                "n = {} but {} rows given",
                raw.n,
                raw.coords.len()
            )));
        }
        if let Some(r) = raw.coords.iter().find(|r| r.len() != raw.dim) {
            return Err(MetricError::Shape(format!(
                "dim = {} but a row has {} entries",
                raw.dim,
                r.len()
            )));
        }
        let flat: Vec<f64> = raw.coords.into_iter().flatten().collect();
        if flat.iter().any(|x| !x.is_finite()) {
            return Err(MetricError::Shape("non-finite coordinate".into()));
        }
        PointCloud::new(DMatrix::from_row_slice(raw.n, raw.dim, &flat), raw.norm)
    }
}

impl From<PointCloud> for CloudJson {
    fn from(c: PointCloud) -> Self {
        CloudJson {
            n: c.len(),
            dim: c.dim(),
            norm: c.norm,
            coords: (0..c.len())
                .map(|i| c.coords.row(i).iter().copied().collect())
                .collect(),
        }
    }
}

impl PointCloud {
    pub fn new(coords: DMatrix<f64>, norm: Norm) -> Result<Self, MetricError> {
        Ok(PointCloud {
            coords,
            norm: norm.validate()?,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], norm: Norm) -> Result<Self, MetricError> {
        let n = rows.len();
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(MetricError::Shape("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(n, dim, |i, j| rows[i][j]), norm)
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn with_norm(&self, norm: Norm) -> Result<Self, MetricError> {
        Self::new(self.coords.clone(), norm)
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.coords.row(i).iter().copied().collect()
    }

    /// Host-norm distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.coords.row(i), self.coords.row(j));
        self.norm.norm(a.iter().zip(b.iter()).map(|(x, y)| x - y))
    }

    /// Raw pairwise distance matrix, without metric validation.
    pub fn pairwise(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.distance(i, j);
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        d
    }

    /// The metric induced on the points; fails if two points coincide.
    pub fn to_metric(&self) -> Result<FiniteMetric, MetricError> {
        FiniteMetric::new(self.pairwise())
    }

    pub fn scaled(&self, c: f64) -> Self {
        PointCloud {
            coords: &self.coords * c,
            norm: self.norm,
        }
    }

    /// Re-expresses the points in an orthonormal basis of the affine span of
    /// their differences (first point moved to the origin), then zero-pads to
    /// at least `min_dim` coordinates. Euclidean distances are preserved.
    pub fn reduce_to_span(&self, min_dim: usize) -> PointCloud {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let dim = self.dim();
        // differences as columns: dim x (n-1)
        let diffs = DMatrix::from_fn(dim, n.saturating_sub(1), |r, c| {
            self.coords[(c + 1, r)] - self.coords[(0, r)]
        });
        let scale = diffs.amax().max(f64::MIN_POSITIVE);
        let rank_tol = 1e-12 * scale * (n.max(dim) as f64);
        let basis = if diffs.ncols() == 0 {
            DMatrix::zeros(dim, 0)
        } else {
            let svd = diffs.clone().svd(true, false);
            let u = svd.u.expect("left singular vectors");
            let keep: Vec<usize> = (0..svd.singular_values.len())
                .filter(|&i| svd.singular_values[i] > rank_tol)
                .collect();
            DMatrix::from_fn(dim, keep.len(), |r, c| u[(r, keep[c])])
        };
        let rank = basis.ncols();
        let out_dim = rank.max(min_dim).max(1);
        let mut coords = DMatrix::zeros(n, out_dim);
        for i in 1..n {
            for c in 0..rank {
                let mut s = 0.0;
                for r in 0..dim {
                    s += basis[(r, c)] * diffs[(r, i - 1)];
                }
                coords[(i, c)] = s;
            }
        }
        PointCloud {
            coords,
            norm: Norm::L2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_valid() {
        let m = FiniteMetric::from_rows(&[vec![0.0]]).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn line_path_is_valid() {
        let m = FiniteMetric::from_line(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(m.d(0, 2), 2.0);
    }

    #[test]
    fn triangle_violation_reports_triple() {
        let err = FiniteMetric::from_rows(&[
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ])
        .unwrap_err();
        match err {
            MetricError::TriangleViolation { i, j, k, .. } => {
                let mut t = [i, j, k];
                t.sort();
                assert_eq!(t, [0, 1, 2]);
                assert_eq!(j, 1);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(
            FiniteMetric::from_rows(&[vec![1.0]]),
            Err(MetricError::NonzeroDiagonal(0, _))
        ));
        assert!(matches!(
            FiniteMetric::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]),
            Err(MetricError::SymmetryViolation { .. })
        ));
        assert!(matches!(
            FiniteMetric::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]),
            Err(MetricError::NonPositive(..))
        ));
        assert!(matches!(
            FiniteMetric::new(DMatrix::zeros(2, 3)),
            Err(MetricError::NotSquare { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = FiniteMetric::from_line(&[0.0, 1.0, 4.0]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"n\":3"));
        let back: FiniteMetric = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"n":3,"dist":[[0,1,5],[1,0,1],[5,1,0]]}"#;
        assert!(serde_json::from_str::<FiniteMetric>(bad).is_err());
    }

    #[test]
    fn cloud_json_norm_tags() {
        let c = PointCloud::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]], Norm::Lp(3.0)).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("{\"lp\":3.0}"), "{s}");
        let back: PointCloud = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let l2: PointCloud =
            serde_json::from_str(r#"{"n":2,"dim":2,"norm":"l2","coords":[[0,0],[3,4]]}"#).unwrap();
        assert_eq!(l2.distance(0, 1), 5.0);
        assert_eq!(l2.with_norm(Norm::L1).unwrap().distance(0, 1), 7.0);
        assert_eq!(l2.with_norm(Norm::Linf).unwrap().distance(0, 1), 4.0);
        assert!(serde_json::from_str::<PointCloud>(
            r#"{"n":2,"dim":2,"norm":"l2","coords":[[0,0]]}"#
        )
        .is_err());
    }

    #[test]
    fn span_reduction_preserves_distances() {
        let c = PointCloud::from_rows(
            &[
                vec![1.0, 0.0, 0.0, 2.0],
                vec![0.0, 1.0, 0.0, 2.0],
                vec![0.0, 0.0, 1.0, 2.0],
            ],
            Norm::L2,
        )
        .unwrap();
        let r = c.reduce_to_span(0);
        assert_eq!(r.dim(), 2);
        let (a, b) = (c.pairwise(), r.pairwise());
        assert!((a - b).amax() < 1e-12);
        assert_eq!(c.reduce_to_span(5).dim(), 5);
    }
}
