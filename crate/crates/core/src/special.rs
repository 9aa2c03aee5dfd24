//! Adaptive Gauss–Kronrod quadrature and log-Gamma helpers.

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    NonConvergence {
        estimate: f64,
        error: f64,
        intervals: usize,
    },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
}

// 15-point Kronrod nodes on [0, 1]; odd positions are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(center));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite(x2));
        }
        kronrod += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Integrates `f` over `[a, b]`, pre-split at `breaks`, refining the segment
/// with the largest error estimate until the total error falls below
/// `max(abs_tol, rel_tol * |integral|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64), QuadError> {
    if b <= a {
        return Ok((0.0, 0.0));
    }
    let mut points: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut segs = Vec::with_capacity(points.len() * 4);
    for w in points.windows(2) {
        segs.push(gk15(&f, w[0], w[1])?);
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if segs.len() >= MAX_INTERVALS {
            return Err(QuadError::NonConvergence {
                estimate: total,
                error: err,
                intervals: segs.len(),
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval collapsed to adjacent floats; keep the estimate
            segs.push(Segment { error: 0.0, ..s });
            continue;
        }
        segs.push(gk15(&f, s.a, mid)?);
        segs.push(gk15(&f, mid, s.b)?);
    }
}

/// `ln ∫_a^b exp(g(x)) dx` for a unimodal log-integrand `g`.
///
/// `mode` is where `g` peaks (it may lie outside `[a, b]`). Breakpoints are
/// placed geometrically around the peak of `g` restricted to `[a, b]`, at
/// multiples of the local width, so narrow peaks (width ~ 1e-5 of the range)
/// are found. Returns `-inf` for an integral that underflows to zero.
pub fn ln_integrate_unimodal<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    mode: f64,
    rel_tol: f64,
) -> Result<f64, QuadError> {
    if b <= a {
        return Ok(f64::NEG_INFINITY);
    }
    let peak = mode.clamp(a, b);
    let span = b - a;
    let width = local_width(&g, peak, a, b).clamp(span * 1e-15, span);
    let mut breaks = vec![peak];
    let mut step = width / 4.0;
    while step < span {
        breaks.push(peak - step);
        breaks.push(peak + step);
        step *= 2.0;
    }
    // shift so that the largest sampled value is exp(0)
    let shift = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .chain([a + 1e-3 * width.min(span), b - 1e-3 * width.min(span)])
        .map(&g)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    let h = |x: f64| {
        let v = g(x);
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            (v - shift).exp()
        }
    };
    let (value, _) = integrate(h, a, b, &breaks, 0.0, rel_tol)?;
    Ok(if value > 0.0 {
        value.ln() + shift
    } else {
        f64::NEG_INFINITY
    })
}

/// Scale on which `g` drops by about one unit near `x`: `1/sqrt(-g'')` at an
/// interior peak, `1/|g'|` at a boundary.
fn local_width<G: Fn(f64) -> f64>(g: &G, x: f64, a: f64, b: f64) -> f64 {
    let span = b - a;
    let mut h = span * 1e-6;
    let mut best = span;
    for _ in 0..12 {
        let lo = (x - h).max(a + 0.5 * h.min(span * 1e-9));
        let hi = (x + h).min(b - 0.5 * h.min(span * 1e-9));
        let (gl, gc, gh) = (g(lo), g(x), g(hi));
        if gl.is_finite() && gc.is_finite() && gh.is_finite() && hi > lo {
            let d1 = (gh - gl) / (hi - lo);
            let d2 = if lo < x && x < hi {
                2.0 * ((gh - gc) / (hi - x) - (gc - gl) / (x - lo)) / (hi - lo)
            } else {
                0.0
            };
            let w = if d2 < 0.0 {
                (-1.0 / d2).sqrt()
            } else if d1 != 0.0 {
                1.0 / d1.abs()
            } else {
                span
            };
            best = w;
            // accept once the probe is well inside the width
            if h < 0.1 * w {
                return w;
            }
        }
        h /= 10.0;
    }
    best
}

/// `ln Γ(x + a) − ln Γ(x)` without cancellation for large `x`.
pub fn ln_gamma_ratio(x: f64, a: f64) -> f64 {
    if x < 1e5 || a.abs() > 1e-2 * x {
        return ln_gamma(x + a) - ln_gamma(x);
    }
    // Stirling: lnΓ(z) = (z-½)ln z - z + ½ln(2π) + 1/(12z) - 1/(360z³) + ...
    let y = x + a;
    let ratio = (a / x).ln_1p();
    let main = (x - 0.5) * ratio + a * y.ln() - a;
    let corr = |z: f64| 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z * z);
    main + corr(y) - corr(x)
}

/// `ln(e^x − 1)` for `x > 0`.
pub fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}
