use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{lambda2, ReversibleChain, SpectralError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerCut {
    /// The side of the cut with stationary mass at most 1/2.
    pub set: Vec<usize>,
    pub conductance: f64,
    pub lambda2: f64,
    /// `√(2(1 - λ₂))`.
    pub bound: f64,
}

/// `Q(S, S^c) / min(π(S), π(S^c))` with `Q(S, S^c) = Σ_{i∈S, j∉S} π_i A_ij`.
pub fn conductance(chain: &ReversibleChain, in_set: &[bool]) -> f64 {
    let n = chain.len();
    let (a, pi) = (chain.matrix(), chain.pi());
    let mut flow = 0.0;
    let mut mass = 0.0;
    for i in 0..n {
        if in_set[i] {
            mass += pi[i];
            for j in 0..n {
                if !in_set[j] {
                    flow += pi[i] * a[(i, j)];
                }
            }
        }
    }
    let small = mass.min(1.0 - mass);
    if small <= 0.0 {
        f64::INFINITY
    } else {
        flow / small
    }
}

/// Best prefix cut of the vertices ordered by `D_π^{-1/2} v₂`.
pub fn cheeger_sweep(chain: &ReversibleChain) -> Result<CheegerCut, SpectralError> {
    let n = chain.len();
    let l2 = lambda2(chain);
    if l2 >= 1.0 - 1e-12 {
        return Err(SpectralError::Disconnected);
    }
    let eig = SymmetricEigen::new(chain.symmetrized());
    let second = {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        idx[1]
    };
    let v = eig.eigenvectors.column(second);
    let phi: Vec<f64> = (0..n).map(|i| v[i] / chain.pi()[i].sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| phi[a].total_cmp(&phi[b]).then(a.cmp(&b)));

    let mut in_set = vec![false; n];
    let mut best = (f64::INFINITY, 0);
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        in_set[v] = true;
        let c = conductance(chain, &in_set);
        if c < best.0 {
            best = (c, k + 1);
        }
    }
    let prefix: Vec<usize> = order[..best.1].to_vec();
    let mass: f64 = prefix.iter().map(|&i| chain.pi()[i]).sum();
    let mut set = if mass <= 0.5 {
        prefix
    } else {
        order[best.1..].to_vec()
    };
    set.sort_unstable();
    Ok(CheegerCut {
        set,
        conductance: best.0,
        lambda2: l2,
        bound: (2.0 * (1.0 - l2)).sqrt(),
    })
}
