use std::f64::consts::PI;

use mdrlab::graph::Graph;
use mdrlab::metric::gen::{random_cloud, random_metric};
use mdrlab::metric::{bourgain_embed, FiniteMetric, Norm, PointCloud};
use mdrlab::spectral::*;
use nalgebra::{DMatrix, DVector, Schur};
use proptest::prelude::*;

/// Random non-constant configuration of `n` states in a random metric.
fn random_config(n: usize, seed: u64) -> Configuration {
    let m = random_metric(4, seed);
    let mut assignment: Vec<usize> = (0..n).map(|i| ((seed >> (2 * i)) as usize + i) % 4).collect();
    if assignment.iter().all(|&a| a == assignment[0]) {
        assignment[0] = (assignment[0] + 1) % 4;
    }
    Configuration::from_metric(&m, &assignment).unwrap()
}

fn direct_rayleigh(x: &Configuration, a: &DMatrix<f64>, pi: &DVector<f64>, p: f64) -> f64 {
    let d = x.distances().map(|v| v.powf(p));
    let flow = DMatrix::from_diagonal(pi) * a;
    flow.component_mul(&d).sum() / (pi * pi.transpose()).component_mul(&d).sum()
}

#[test]
fn walk_spectra_match_closed_forms() {
    for n in [3usize, 4, 6, 9] {
        let k = chain_from_graph(&Graph::complete(n)).unwrap();
        let ev = k.spectrum();
        assert!((ev[0] - 1.0).abs() < 1e-12);
        for &e in &ev[1..] {
            assert!((e + 1.0 / (n as f64 - 1.0)).abs() < 1e-12);
        }
        let c = chain_from_graph(&Graph::cycle(n.max(3))).unwrap();
        let mut expect: Vec<f64> = (0..n.max(3))
            .map(|j| (2.0 * PI * j as f64 / n.max(3) as f64).cos())
            .collect();
        expect.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in c.spectrum().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn gamma_hilbert_matches_nonsymmetric_eigensolver() {
    for seed in 0..30 {
        let c = random_chain(3 + seed as usize % 7, seed);
        let mut ev: Vec<f64> = Schur::new(c.matrix().clone())
            .eigenvalues()
            .expect("reversible chains have real spectra")
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        let g = gamma_hilbert(&c).unwrap();
        assert!((g - 1.0 / (1.0 - ev[1])).abs() < 1e-10 * g);
    }
}

#[test]
fn k2_gamma_agrees_across_routes() {
    let k2 = chain_from_graph(&Graph::complete(2)).unwrap();
    let m = FiniteMetric::from_line(&[0.0, 1.7]).unwrap();
    assert_eq!(gamma_bruteforce(&k2, &m, 2.0).unwrap(), 0.5);
    assert_eq!(gamma_hilbert(&k2).unwrap(), 0.5);
}

#[test]
fn bruteforce_is_label_invariant() {
    let c4 = chain_from_graph(&Graph::cycle(4)).unwrap();
    let a = FiniteMetric::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let g = gamma_bruteforce(&c4, &a, 2.0).unwrap();
    let m3 = random_metric(3, 5);
    let perm = FiniteMetric::new(DMatrix::from_fn(3, 3, |i, j| m3.d(2 - i, 2 - j))).unwrap();
    assert_eq!(g, gamma_bruteforce(&c4, &a, 2.0).unwrap());
    let (x, y) = (
        gamma_bruteforce(&c4, &m3, 2.0).unwrap(),
        gamma_bruteforce(&c4, &perm, 2.0).unwrap(),
    );
    assert!((x - y).abs() < 1e-12 * x);
    // two-point targets on the 4-cycle: the worst cut splits it in halves
    assert!((g - 1.0).abs() < 1e-12);
}

#[test]
fn rayleigh_matches_matrix_evaluation() {
    for seed in 0..20 {
        let c = random_chain(5, seed);
        let x = random_config(5, seed);
        let r = rayleigh(&x, &c, 2.0).unwrap();
        assert!((r - direct_rayleigh(&x, c.matrix(), c.pi(), 2.0)).abs() < 1e-12);
        let scaled = Configuration::from_distances(x.distances() * 3.5);
        assert!((rayleigh(&scaled, &c, 2.0).unwrap() - r).abs() < 1e-12);
    }
}

#[test]
fn t_parameter_grows_with_d() {
    for seed in 0..20 {
        let c = random_chain(6, seed);
        let cloud = random_cloud(6, 4, Norm::L1, seed);
        let mut last = 0;
        for d in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let t = t_parameter(&cloud, &c, &L1L2, d, 100_000).unwrap().t;
            assert!(t >= last);
            last = t;
        }
    }
}

#[test]
fn sampled_gamma_respects_explicit_chain_bound() {
    for seed in 0..20 {
        let c = random_chain(4 + seed as usize % 5, seed);
        let m = 2 + seed as usize % 7;
        let lb = gamma_sampled_lower_bound(&c, Norm::L1, m, 200, seed).unwrap();
        let ceiling = t_ceiling(lambda2(&c), (m as f64).sqrt()).unwrap() as f64;
        assert_eq!(lb.kind, "certified lower bound");
        assert!(lb.value <= 8.0 * ceiling * ceiling, "{} vs {}", lb.value, ceiling);
        // the eigenvector configuration already attains the Hilbertian gap
        assert!(lb.value >= 0.5 * gamma_hilbert(&c).unwrap());
    }
}

#[test]
fn random_regular_graphs_are_expanders() {
    for seed in 0..20 {
        let g = random_regular_graph(128, 4, seed).unwrap();
        assert!((0..128).all(|v| g.degree(v) == 4));
        let c = chain_from_graph(&g).unwrap();
        assert!(lambda2(&c) < 0.95);
    }
    let g = random_regular_graph(256, 4, 1).unwrap();
    let total: usize = (0..256)
        .map(|v| g.hop_distances(v).iter().map(|d| d.unwrap()).sum::<usize>())
        .sum();
    let avg = total as f64 / (256.0 * 255.0);
    assert!(avg >= 0.3 * (256f64).ln() / 4f64.ln(), "{avg}");
}

#[test]
fn expander_exponent_with_bourgain_image() {
    let g = random_regular_graph(128, 4, 3).unwrap();
    let c = chain_from_graph(&g).unwrap();
    let rows: Vec<Vec<f64>> = (0..128)
        .map(|v| g.hop_distances(v).iter().map(|d| d.unwrap() as f64).collect())
        .collect();
    let m = FiniteMetric::from_rows(&rows).unwrap();
    let f = bourgain_embed(&m, 4).unwrap();
    let e = dim_lower_exponent(&f, &c).unwrap();
    assert!(e.exponent > 0.0);
    let (mut edge, mut pair) = (0.0, 0.0);
    for (i, j, _) in g.edges() {
        // each undirected edge carries π_i/deg_i from both ends
        edge += 2.0 * (1.0 / 512.0) * f.distance(i, j).powi(2);
    }
    for i in 0..128 {
        for j in 0..128 {
            pair += f.distance(i, j).powi(2) / (128.0 * 128.0);
        }
    }
    assert!((e.alpha_hat - edge.sqrt()).abs() < 1e-10);
    assert!((e.spread - pair.sqrt()).abs() < 1e-10);
}

#[test]
fn cheeger_bound_on_random_graphs() {
    for seed in 0..100u64 {
        let n = 6 + (seed % 20) as usize;
        let g = if seed % 2 == 0 {
            random_regular_graph(n + n % 2, 3, seed).unwrap()
        } else {
            // a cycle with random chords stays connected
            let mut g = Graph::cycle(n);
            let mut rng = mdrlab::rng::rng_for(seed, 1);
            for _ in 0..n / 2 {
                let (a, b) = (
                    rand::Rng::random_range(&mut rng, 0..n),
                    rand::Rng::random_range(&mut rng, 0..n),
                );
                let _ = g.add_edge(a, b);
            }
            g
        };
        let c = chain_from_graph(&g).unwrap();
        let cut = cheeger_sweep(&c).unwrap();
        assert!(cut.conductance <= cut.bound + 1e-12, "seed {seed}");
        let mut mask = vec![false; c.len()];
        cut.set.iter().for_each(|&i| mask[i] = true);
        assert!((conductance(&c, &mask) - cut.conductance).abs() < 1e-12);
    }
}

fn path_spec(initial_state: usize, cloud: &PointCloud) -> MarkovChainSpec {
    let g = Graph::path(5);
    let walk = chain_from_graph(&g).unwrap();
    let mut init = DVector::zeros(5);
    init[initial_state] = 1.0;
    MarkovChainSpec::with_cloud(walk.matrix().clone(), init, 8, cloud, 2.0).unwrap()
}

#[test]
fn markov_convexity_monte_carlo_matches_dp() {
    let line = PointCloud::from_rows(&(0..5).map(|i| vec![i as f64]).collect::<Vec<_>>(), Norm::L2)
        .unwrap();
    let spec = path_spec(2, &line);
    let exact = markov_convexity_exact(&spec);
    let mc = markov_convexity_monte_carlo(&spec, 100_000, 11);
    assert!((mc.lhs_pow - exact.lhs_pow).abs() <= 3.0 * mc.lhs_pow_se, "{mc:?} {exact:?}");
    assert!((mc.rhs_pow - exact.rhs_pow).abs() <= 3.0 * mc.rhs_pow_se.max(1e-12));
    assert_eq!(markov_convexity_ratio(&spec, 10, 0), exact);
}

#[test]
fn markov_convexity_degenerate_cases() {
    let flat = PointCloud::from_rows(&vec![vec![2.0]; 5], Norm::L2).unwrap();
    let spec = path_spec(0, &flat);
    assert_eq!(markov_convexity_exact(&spec).lhs, 0.0);
    assert_eq!(markov_convexity_monte_carlo(&spec, 1000, 1).lhs, 0.0);

    let rotate = DMatrix::from_fn(5, 5, |i, j| if j == (i + 1) % 5 { 1.0 } else { 0.0 });
    let line = PointCloud::from_rows(&(0..5).map(|i| vec![i as f64]).collect::<Vec<_>>(), Norm::L2)
        .unwrap();
    let init = DVector::from_element(5, 0.2);
    let det = MarkovChainSpec::with_cloud(rotate, init, 16, &line, 2.0).unwrap();
    assert_eq!(markov_convexity_exact(&det).lhs, 0.0);
    let mc = markov_convexity_monte_carlo(&det, 1000, 2);
    assert_eq!(mc.lhs, 0.0);
    assert!(mc.rhs > 0.0);
}

fn chain_pair(n: usize, seed: u64) -> (ReversibleChain, ReversibleChain) {
    let a = random_chain(n, seed);
    let b = random_chain_with_pi(a.pi(), seed ^ 0x55);
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rayleigh_quotient_clauses(seed in any::<u64>(), n in 3usize..8, p in prop::sample::select(vec![1.0, 2.0]), delta in 0.0f64..=1.0) {
        let (a, b) = chain_pair(n, seed);
        let x = random_config(n, seed);
        let pi = a.pi();
        let ra = rayleigh(&x, &a, p).unwrap();
        let rb = rayleigh(&x, &b, p).unwrap();
        let mix = a.matrix() * delta + b.matrix() * (1.0 - delta);
        let r1 = rayleigh_matrix(&x, &mix, pi, p).unwrap();
        prop_assert!((r1 - (delta * ra + (1.0 - delta) * rb)).abs() < 1e-12);
        let r2 = rayleigh_matrix(&x, &a.lazy(delta), pi, p).unwrap();
        prop_assert!((r2 - delta * ra).abs() < 1e-12);
        prop_assert!(ra <= 2f64.powf(p) + 1e-12);
        let rab = rayleigh_matrix(&x, &(a.matrix() * b.matrix()), pi, p).unwrap();
        prop_assert!(rab.powf(1.0 / p) <= ra.powf(1.0 / p) + rb.powf(1.0 / p) + 1e-9);
        let mut power = a.matrix().clone();
        for t in 2..=4 {
            power = &power * a.matrix();
            let rt = rayleigh_matrix(&x, &power, pi, p).unwrap();
            prop_assert!(rt <= (t as f64).powf(p) * ra + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hilbert_identity_holds(seed in any::<u64>(), n in 2usize..10, dim in 1usize..6) {
        let c = random_chain(n, seed);
        let cloud = random_cloud(n, dim, Norm::L2, seed);
        let h = hilbert_rayleigh_identity(&cloud, &c).unwrap();
        prop_assert!((h.lhs - h.rhs).abs() <= 1e-10);
        prop_assert!(h.rayleigh_a2 <= 1.0 + 1e-12);
    }

    #[test]
    fn t_parameter_below_spectral_ceiling(seed in any::<u64>(), n in 2usize..10, m in 1usize..9, iso in 0usize..3) {
        let c = random_chain(n, seed);
        let isos = hilbert_isomorphs();
        let h = &isos[iso];
        let cloud = random_cloud(n, m, h.x_norm(), seed);
        let d = h.distortion(m);
        let t = t_parameter(&cloud, &c, h.as_ref(), d, 100_000).unwrap();
        let ceiling = t_ceiling(lambda2(&c), d).unwrap();
        prop_assert!(t.t <= ceiling, "t = {} ceiling = {}", t.t, ceiling);
    }

    #[test]
    fn lazy_power_is_an_expander(seed in any::<u64>(), n in 2usize..=8, m in 1usize..=8, linf in any::<bool>()) {
        // sparse chains mix slowly enough to need several lazy steps
        let c = if seed % 3 == 0 {
            chain_from_graph(&Graph::cycle(n.max(3))).unwrap()
        } else {
            random_chain(n, seed)
        };
        let iso: &dyn HilbertIsomorph = if linf { &LinfL2 } else { &L1L2 };
        let cloud = random_cloud(c.len(), m, iso.x_norm(), seed);
        let chk = power_expander_check(&cloud, &c, iso, 100_000).unwrap();
        prop_assert!(chk.value >= 1.0 / 16.0, "{chk:?}");
        let t = chk.t as f64;
        prop_assert!(chk.inverse_rayleigh <= 8.0 * t * t, "{chk:?}");
    }
}
