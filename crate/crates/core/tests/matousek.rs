use mdrlab::graph::Graph;
use mdrlab::matousek::*;
use mdrlab::metric::FiniteMetric;
use proptest::prelude::*;

/// Girth by deleting each edge and measuring the detour between its ends.
fn girth_by_edge_deletion(g: &Graph) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (u, v, _) in g.edges() {
        let mut h = g.clone();
        h.remove_edge(u, v);
        if let Some(d) = h.hop_distances(u)[v] {
            best = Some(best.map_or(d + 1, |b| b.min(d + 1)));
        }
    }
    best
}

fn triangle_holds(m: &FiniteMetric) -> bool {
    let n = m.len();
    (0..n).all(|i| {
        (0..n).all(|j| (0..n).all(|k| m.d(i, k) <= m.d(i, j) + m.d(j, k) + 1e-12))
    })
}

fn arbitrary_template(n: usize, mask: &[bool]) -> TemplateGraph {
    let edges: Vec<(usize, usize)> = (0..n * n)
        .filter(|&k| mask[k])
        .map(|k| (k / n, k % n))
        .collect();
    TemplateGraph::from_side_edges(n, &edges).unwrap()
}

#[test]
fn generated_girth_at_least_requested() {
    for seed in 0..50 {
        let t = gen_template(64, 6, seed).unwrap();
        let recomputed = girth_by_edge_deletion(&t.graph());
        assert_eq!(t.girth(), recomputed, "seed {seed}");
        assert!(t.girth().is_none_or(|g| g >= 6), "seed {seed}: {:?}", t.girth());
        assert!(t.edge_count() > 0);
    }
}

#[test]
fn larger_girth_targets() {
    for (n, g) in [(40, 8), (30, 10), (100, 4)] {
        for seed in 0..5 {
            let t = gen_template(n, g, seed).unwrap();
            assert!(t.girth().is_none_or(|x| x >= g));
            assert_eq!(t.girth(), girth_by_edge_deletion(&t.graph()));
        }
    }
}

#[test]
fn average_degree_grows_with_n() {
    let mean_degree = |n: usize| {
        (0..20)
            .map(|seed| gen_template(n, 6, seed).unwrap().edge_count() as f64 / n as f64)
            .sum::<f64>()
            / 20.0
    };
    let d: Vec<f64> = [32, 64, 128].into_iter().map(mean_degree).collect();
    assert!(d[0] < d[1] && d[1] < d[2], "{d:?}");
}

#[test]
fn generation_is_seeded() {
    assert_eq!(gen_template(50, 6, 7).unwrap(), gen_template(50, 6, 7).unwrap());
    assert_ne!(gen_template(50, 6, 7).unwrap(), gen_template(50, 6, 8).unwrap());
}

#[test]
fn tabulated_power_family_matches_closed_form() {
    for (alpha, theta) in [(2.0, 1.0), (2.0, 0.5), (3.0, 0.75), (1.5, 0.3)] {
        let pair = PowerPair::snowflake(alpha, theta).unwrap();
        let exact = beta_modulus(&pair, &[]).unwrap();
        // knots cover ω up to far beyond 2Ω on the evaluation grid
        let knots: Vec<f64> = (0..1000).map(|k| 1e-3 * 10f64.powf(9.0 * k as f64 / 999.0)).collect();
        let table = TabulatedPair::sample(&pair, &knots).unwrap();
        let grid: Vec<f64> = (0..1000).map(|k| 1e-2 * 10f64.powf(2.0 * k as f64 / 999.0)).collect();
        let approx = beta_modulus(&table, &grid).unwrap();
        assert!((approx - exact).abs() < 1e-3, "{alpha} {theta}: {approx} vs {exact}");
    }
}

#[test]
fn tabulated_range_error() {
    let pair = PowerPair::bi_lipschitz(1.0, 2.0).unwrap();
    let knots: Vec<f64> = (1..=1000).map(|k| k as f64 * 0.01).collect();
    let table = TabulatedPair::sample(&pair, &knots).unwrap();
    assert!(matches!(
        beta_modulus(&table, &[9.0]),
        Err(MatousekError::InverseOutOfRange { .. })
    ));
}

#[test]
fn coarse_exponent_examples() {
    let bl = PowerPair::bi_lipschitz(1.0, 2.0).unwrap();
    let e = coarse_dim_exponent(30_000, &bl, &[]).unwrap();
    assert!((e - 0.25 * 30_000f64.ln()).abs() < 1e-12);
    let mut prev = 0.0;
    for n in [10u64, 100, 1000, 10_000] {
        let e = coarse_dim_exponent(n, &bl, &[]).unwrap();
        assert!(e > prev);
        prev = e;
    }
    let big = PowerPair::bi_lipschitz(1.0, 1e6).unwrap();
    assert!(coarse_dim_exponent(30_000, &big, &[]).unwrap() < 1e-5);
    assert!(coarse_dim_exponent(1, &bl, &[]).is_err());
}

#[test]
fn harness_rows() {
    let p = HarnessParams {
        n: 24,
        g: 6,
        s: 1.0,
        t: 8.0,
        trials: 6,
        seed: 11,
        alpha: 2.0,
    };
    let rows = experiment_harness(p).unwrap();
    assert_eq!(rows.len(), 6);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.trial, i);
        assert!(r.min_fork_dist >= (p.s * p.g as f64).min(p.t));
        assert!((r.volumetric_lb - (72f64).ln() / 3f64.ln()).abs() < 1e-12);
        assert!(r.girth.is_none_or(|g| g >= 6));
        assert!(r.doubling_lb >= 0.0);
    }
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| experiment_harness(p).unwrap());
    assert_eq!(single, rows);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn signed_metric_is_a_metric(
        n in 2usize..7,
        mask in proptest::collection::vec(any::<bool>(), 36),
        signs in proptest::collection::vec(any::<bool>(), 36),
        s in 0.1f64..3.0,
        extra in 0.0f64..10.0,
    ) {
        let t = arbitrary_template(n, &mask);
        let sigma = SignAssignment {
            sigma: signs[..t.edge_count()]
                .iter()
                .map(|&b| if b { Sign::Plus } else { Sign::Minus })
                .collect(),
        };
        let params = SignedMetricParams::new(s, s + extra).unwrap();
        let m = signed_metric(&t, &sigma, params).unwrap();
        prop_assert_eq!(m.len(), 3 * n);
        prop_assert!(triangle_holds(&m));
        prop_assert!(m.max_distance() <= params.t);
        let g = signed_graph(&t, &sigma).unwrap();
        for (u, v, _) in g.edges() {
            prop_assert_eq!(m.d(u, v), s);
        }
    }

    #[test]
    fn cycle_compress(
        n in 2usize..7,
        mask in proptest::collection::vec(any::<bool>(), 36),
        seed in any::<u64>(),
    ) {
        let t = arbitrary_template(n, &mask);
        let sigma = SignAssignment::random(&t, seed);
        let g = signed_graph(&t, &sigma).unwrap();
        for l in 0..n {
            if let Some(d) = g.hop_distances(l)[n + l] {
                let girth = t.girth();
                prop_assert!(girth.is_some());
                prop_assert!(d >= girth.unwrap(), "d = {} < girth {:?}", d, girth);
            }
        }
    }

    #[test]
    fn fork_distance_bound(n in 4usize..24, g in prop_oneof![Just(4usize), Just(6), Just(8)], seed in any::<u64>(), s in 0.5f64..2.0, t_mul in 1.0f64..12.0) {
        let template = gen_template(n, g, seed).unwrap();
        let sigma = SignAssignment::random(&template, seed ^ 1);
        let params = SignedMetricParams::new(s, s * t_mul).unwrap();
        let m = signed_metric(&template, &sigma, params).unwrap();
        let girth = template.girth().map_or(f64::INFINITY, |x| x as f64);
        prop_assert!(min_fork_distance(&m) >= (s * girth).min(params.t) - 1e-12);
        prop_assert!(template.girth().is_none_or(|x| x >= g));
    }
}
