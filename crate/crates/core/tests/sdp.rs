use mdrlab::metric::{distortion_to_cloud, gen::random_metric, FiniteMetric, Norm, PointCloud};
use mdrlab::sdp::*;
use proptest::prelude::*;

struct Distortion<'a> {
    m: &'a FiniteMetric,
    dim: usize,
}

impl Distortion<'_> {
    fn cost(&self, x: &[f64]) -> f64 {
        let n = self.m.len();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            for j in (i + 1)..n {
                let e: f64 = (0..self.dim)
                    .map(|c| (x[i * self.dim + c] - x[j * self.dim + c]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let r = e / self.m.d(i, j);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        if lo > 0.0 {
            hi / lo
        } else {
            1e9
        }
    }
}

/// Additive recurrence with the generalized golden ratio; low discrepancy in
/// every dimension.
fn quasi_random(start: usize, len: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (len as f64 + 1.0));
    }
    (0..len)
        .map(|c| {
            let a = 1.0 / phi.powi(c as i32 + 1);
            ((0.5 + a * (start + 1) as f64) % 1.0) * 4.0 - 2.0
        })
        .collect()
}

// The usual reflection/expansion/contraction/shrink coefficients.
fn nelder_mead(problem: Distortion, x0: Vec<f64>, step: f64) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut pts = vec![x0.clone()];
    for c in 0..d {
        let mut v = x0.clone();
        v[c] += step;
        pts.push(v);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| problem.cost(p)).collect();
    for _ in 0..4000 {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if vals[d] - vals[0] < 1e-12 {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|c| pts[..d].iter().map(|p| p[c]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..d).map(|c| centroid[c] + t * (pts[d][c] - centroid[c])).collect()
        };
        let r = along(-1.0);
        let fr = problem.cost(&r);
        if fr < vals[0] {
            let e = along(-2.0);
            let fe = problem.cost(&e);
            (pts[d], vals[d]) = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < vals[d - 1] {
            (pts[d], vals[d]) = (r, fr);
        } else {
            let t = if fr < vals[d] { -0.5 } else { 0.5 };
            let k = along(t);
            let fk = problem.cost(&k);
            if fk < vals[d].min(fr) {
                (pts[d], vals[d]) = (k, fk);
            } else {
                for i in 1..=d {
                    pts[i] = (0..d).map(|c| 0.5 * (pts[0][c] + pts[i][c])).collect();
                    vals[i] = problem.cost(&pts[i]);
                }
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[best].clone(), vals[best])
}

/// Least distortion over configurations in `ℝ^{n-1}`, 64 quasi-random starts,
/// each refined by restarted Nelder–Mead.
fn brute_force_c2(m: &FiniteMetric) -> f64 {
    let n = m.len();
    let dim = n - 1;
    let mut best = f64::INFINITY;
    for s in 0..64 {
        let mut x = quasi_random(s, n * dim);
        let mut cost = f64::INFINITY;
        for step in [0.5, 0.1, 0.02, 0.004, 1e-3] {
            let (nx, c) = nelder_mead(Distortion { m, dim }, x, step);
            x = nx;
            cost = c;
        }
        best = best.min(cost);
    }
    best
}

fn c4() -> FiniteMetric {
    FiniteMetric::from_rows(&[
        vec![0.0, 1.0, 2.0, 1.0],
        vec![1.0, 0.0, 1.0, 2.0],
        vec![2.0, 1.0, 0.0, 1.0],
        vec![1.0, 2.0, 1.0, 0.0],
    ])
    .unwrap()
}

fn star() -> FiniteMetric {
    FiniteMetric::from_rows(&[
        vec![0.0, 1.0, 1.0, 1.0],
        vec![1.0, 0.0, 2.0, 2.0],
        vec![1.0, 2.0, 0.0, 2.0],
        vec![1.0, 2.0, 2.0, 0.0],
    ])
    .unwrap()
}

#[test]
fn brute_force_oracle_confirms_small_targets() {
    let c4 = brute_force_c2(&c4());
    assert!((c4 - 2f64.sqrt()).abs() < 1e-3, "{c4}");
    let star = brute_force_c2(&star());
    assert!((star - 2.0 / 3f64.sqrt()).abs() < 1e-3, "{star}");
}

#[test]
fn sdp_matches_brute_force() {
    for m in [c4(), star()] {
        let sdp = c2_sdp(&m, 1e-4).unwrap();
        let bf = brute_force_c2(&m);
        assert!((sdp.alpha - bf).abs() < 1e-3, "{} {}", sdp.alpha, bf);
    }
    let star = c2_sdp(&star(), 1e-4).unwrap();
    assert!((star.alpha - 1.15470).abs() < 1e-3);
}

#[test]
fn extracted_witnesses_realize_reported_distortion() {
    let tol = 1e-4;
    for m in [c4(), star(), random_metric(8, 3), random_metric(12, 4)] {
        let r = c2_sdp(&m, tol).unwrap();
        let cloud = extract_points(&r.witness).unwrap();
        let rep = distortion_to_cloud(&m, &cloud).unwrap();
        assert!(rep.distortion <= r.alpha + 2.0 * tol, "{} {}", rep.distortion, r.alpha);
        for i in 0..m.len() {
            for j in 0..m.len() {
                let q = &r.witness.q;
                let k = (q[(i, i)] + q[(j, j)] - 2.0 * q[(i, j)]).max(0.0).sqrt();
                assert!((cloud.distance(i, j) - k).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn c4_duality() {
    let (_, check) = search_violating_certificate(&c4(), 1.3, 3000, 7).unwrap();
    assert!(check.lhs > check.rhs);
    let r = c2_sdp(&c4(), 1e-4).unwrap();
    assert!(r.alpha >= 1.3 - 1e-4);
}

#[test]
fn simplex_certificate_lhs_is_nonpositive() {
    let m = FiniteMetric::uniform(5, 1.5).unwrap();
    let mut rng = mdrlab::rng::rng_for(3, 0);
    for _ in 0..20 {
        let y = nalgebra::DMatrix::<f64>::from_fn(5, 3, |_, _| {
            rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal)
        });
        let centered = nalgebra::DMatrix::from_fn(5, 3, |i, j| {
            y[(i, j)] - y.column(j).mean()
        });
        let cert = NegativeTypeCertificate::new(&centered * centered.transpose()).unwrap();
        let c = check_certificate(&m, &cert, 1.0).unwrap();
        assert!(c.lhs <= 1e-12 && c.holds);
    }
}

#[test]
fn iteration_cap_reports_bracket() {
    let opts = SdpOptions {
        tol: 1e-4,
        max_check_iters: 20_000,
        max_total_iters: 3,
        stall_window: 500,
    };
    match c2_sdp_with(&c4(), opts) {
        Err(SdpError::IterationCapExceeded { lo, hi, .. }) => assert!(lo <= 2f64.sqrt() && hi >= 2f64.sqrt()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn witness_json_shape() {
    let r = c2_sdp(&c4(), 1e-3).unwrap();
    let v = serde_json::to_value(&r.witness).unwrap();
    assert_eq!(v["Q"].as_array().unwrap().len(), 4);
    let back: GramCandidate = serde_json::from_value(v).unwrap();
    assert_eq!(back, r.witness);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn euclidean_clouds_have_unit_distortion(seed in 0u64..10_000, n in 3usize..9) {
        let cloud = mdrlab::metric::gen::random_cloud(n, 3, Norm::L2, seed);
        let m = cloud.to_metric().unwrap();
        let r = c2_sdp(&m, 1e-4).unwrap();
        prop_assert!((r.alpha - 1.0).abs() <= 1e-4, "{}", r.alpha);
    }

    #[test]
    fn three_points_are_euclidean(a in 0.5f64..2.0, b in 0.5f64..2.0, t in 0.0f64..1.0) {
        // third side anywhere in the triangle range
        let c = (a - b).abs() + t * (a + b - (a - b).abs());
        prop_assume!(c > 1e-3);
        let m = FiniteMetric::from_rows(&[
            vec![0.0, a, b],
            vec![a, 0.0, c],
            vec![b, c, 0.0],
        ]).unwrap();
        let r = c2_sdp(&m, 1e-4).unwrap();
        prop_assert!((r.alpha - 1.0).abs() <= 1e-4);
    }

    #[test]
    fn reported_distortion_is_realized_and_at_least_one(seed in 0u64..10_000, n in 3usize..10, t in 0.0f64..1.0) {
        let tol = 1e-3;
        let m = random_metric(n, seed);
        let r = c2_sdp(&m, tol).unwrap();
        prop_assert!(r.alpha >= 1.0 - tol);
        let cloud: PointCloud = extract_points(&r.witness).unwrap();
        let rep = distortion_to_cloud(&m, &cloud).unwrap();
        prop_assert!(rep.distortion <= r.alpha + 2.0 * tol);
        let level = 1.0 + t * (m.max_distance() / m.min_distance() - 1.0);
        if let Some((_, check)) = search_violating_certificate(&m, level, 500, seed) {
            prop_assert!(!check.holds);
            prop_assert!(r.alpha >= level - tol, "{} < {}", r.alpha, level);
        }
    }
}
