use rand::seq::SliceRandom;

use super::SpectralError;
use crate::graph::Graph;
use crate::rng::rng_for;

const MAX_ATTEMPTS: usize = 100_000;

/// Uniform simple `r`-regular graph on `n` vertices by the pairing model,
/// redrawing every pairing that has a loop or a repeated edge.
pub fn random_regular_graph(n: usize, r: usize, seed: u64) -> Result<Graph, SpectralError> {
    if r < 3 || n <= r || (n * r) % 2 == 1 {
        return Err(SpectralError::RegularDomain { n, r });
    }
    let mut points: Vec<usize> = (0..n * r).map(|p| p / r).collect();
    'attempt: for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_for(seed, attempt as u64);
        points.sort_unstable();
        points.shuffle(&mut rng);
        let mut g = Graph::new(n);
        for pair in points.chunks_exact(2) {
            if g.add_edge(pair[0], pair[1]).is_err() {
                continue 'attempt;
            }
        }
        return Ok(g);
    }
    Err(SpectralError::GenerationFailure(MAX_ATTEMPTS))
}
