use serde::{Deserialize, Serialize};

use super::{FiniteMetric, MetricError};

/// Both sides of the metric cotype inequality for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CotypeRatio {
    pub lhs: f64,
    pub rhs: f64,
}

const MAX_CONFIG: u128 = 4096;

/// Evaluates the metric cotype sums for `x_w = points[index(w)]`, `w ∈ Z_{2m}^n`.
///
/// `points` lists one metric point per `w`, with `w_1` the least significant
/// digit in base `2m`.
/// `lhs = Σ_i Σ_w d(x_{w+m e_i}, x_w)² / m²` and
/// `rhs = n^{1-2/q} / 3^n · Σ_{ε ∈ {-1,0,1}^n} Σ_w d(x_{w+ε}, x_w)²`.
pub fn metric_cotype_ratio(
    m_space: &FiniteMetric,
    points: &[usize],
    q: f64,
    m: usize,
    n: usize,
) -> Result<CotypeRatio, MetricError> {
    let base = 2 * m;
    let size = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > MAX_CONFIG || m == 0 || n == 0 {
        return Err(MetricError::ConfigTooLarge(size));
    }
    let size = size as usize;
    if points.len() != size {
        return Err(MetricError::IndexMismatch {
            expected: size,
            got: points.len(),
        });
    }
    if let Some(&index) = points.iter().find(|&&p| p >= m_space.len()) {
        return Err(MetricError::MapOutOfRange {
            index,
            len: m_space.len(),
        });
    }
    let digits = |mut w: usize| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let d = w % base;
                w /= base;
                d
            })
            .collect()
    };
    let index = |ds: &[usize]| ds.iter().rev().fold(0, |acc, &d| acc * base + d);
    let d2 = |a: usize, b: usize| {
        let v = m_space.d(points[a], points[b]);
        v * v
    };

    let mut lhs = 0.0;
    for w in 0..size {
        let dw = digits(w);
        for i in 0..n {
            let mut shifted = dw.clone();
            shifted[i] = (shifted[i] + m) % base;
            lhs += d2(index(&shifted), w);
        }
    }
    lhs /= (m * m) as f64;

    let signs = 3usize.pow(n as u32);
    let mut total = 0.0;
    for e in 0..signs {
        let mut eps = e;
        let step: Vec<usize> = (0..n)
            .map(|_| {
                let s = eps % 3;
                eps /= 3;
                // 0 -> -1, 1 -> 0, 2 -> +1, taken mod 2m
                (s + base - 1) % base
            })
            .collect();
        for w in 0..size {
            let shifted: Vec<usize> = digits(w)
                .iter()
                .zip(&step)
                .map(|(&a, &b)| (a + b) % base)
                .collect();
            total += d2(index(&shifted), w);
        }
    }
    let rhs = (n as f64).powf(1.0 - 2.0 / q) / signs as f64 * total;
    Ok(CotypeRatio { lhs, rhs })
}
