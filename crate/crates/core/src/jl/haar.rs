use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::{rng_for, Rng};

/// Haar-distributed `m × m` orthogonal matrix.
///
/// Takes the QR factorization of a standard Gaussian matrix and flips each
/// column of `Q` by the sign of the matching diagonal entry of `R`.
pub fn sample_haar_orthogonal(m: usize, seed: u64) -> DMatrix<f64> {
    sample_haar_with(m, &mut rng_for(seed, 0))
}

pub fn sample_haar_with(m: usize, rng: &mut Rng) -> DMatrix<f64> {
    assert!(m >= 1, "dimension must be positive");
    let g = DMatrix::from_fn(m, m, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
