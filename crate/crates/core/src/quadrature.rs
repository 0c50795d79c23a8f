//! Numerical integration.
//!
//! Three layers are provided:
//!
//! * [`gauss_kronrod`]: globally adaptive 7/15-point Gauss–Kronrod on a finite interval.
//! * [`integrate`]: integrals over arbitrary, possibly unbounded, intervals whose integrand
//!   may be singular at the origin or slowly decaying at infinity. The interval is split at
//!   zero and walked one decade at a time in the variable `s = ln|y|`, which turns power
//!   singularities into exponentials. Each decade is integrated with Gauss–Kronrod; the
//!   walk stops when the decade contributions become negligible, extrapolates a geometric
//!   tail when the contributions decay geometrically, and reports [`Moment::Infinite`] when
//!   they do not decay.
//! * trapezoid helpers used by the grid solvers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::LN_10;

/// An integral that is either a finite number or divergent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    /// The finite value, or `+inf`.
    pub fn value(&self) -> f64 {
        match *self {
            Moment::Finite(v) => v,
            Moment::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Moment::Finite(v) => Some(v),
            Moment::Infinite => None,
        }
    }

    pub fn add(self, other: Moment) -> Moment {
        match (self, other) {
            (Moment::Finite(a), Moment::Finite(b)) => Moment::Finite(a + b),
            _ => Moment::Infinite,
        }
    }
}

impl std::fmt::Display for Moment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Moment::Finite(v) => write!(f, "{v}"),
            Moment::Infinite => write!(f, "inf"),
        }
    }
}

/// Relative tolerance used by default for measure functionals.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// A partial sum whose magnitude exceeds this multiple of the largest decade is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Maximum number of decades walked towards zero or infinity.
const MAX_DECADES: usize = 300;

/// Subdivision budget of the Gauss–Kronrod rule inside one decade.
const MAX_SUBDIVISIONS_PER_DECADE: usize = 2_000;

/// Power-law exponents of the decade contributions at or below this value are treated as a
/// non-summable tail (`d_k ~ L^{-σ}` with `σ <= 1` diverges).
const POWER_TAIL_DIVERGENCE: f64 = 1.1;

// Kronrod abscissae and weights of the 15-point rule; the odd-indexed abscissae together with
// the centre are the 7-point Gauss nodes.
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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Outcome of a finite-interval adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub subdivisions: usize,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        kronrod += w * (f1 + f2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The segment with the largest error estimate is bisected until the summed estimate drops
/// below `max(abs_tol, rel_tol·|I|)` or `max_subdivisions` bisections have been spent.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, converged: true, subdivisions: 0 };
    }
    let (value, error) = kronrod15(f, a, b);
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut subdivisions = 0;
    loop {
        if !total.is_finite() {
            return QuadResult { value: total, error: f64::INFINITY, converged: false, subdivisions };
        }
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return QuadResult { value: total, error: total_err, converged: true, subdivisions };
        }
        if subdivisions >= max_subdivisions {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod15(f, worst.a, mid);
        let (v2, e2) = kronrod15(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        subdivisions += 1;
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    QuadResult {
        value,
        error,
        converged: error <= abs_tol.max(rel_tol * value.abs()),
        subdivisions,
    }
}

/// Integral of `f` over `(lo, hi)`; either end may be infinite.
///
/// Finite endpoints away from zero are treated as ordinary boundaries. Zero (when interior or
/// an endpoint) and infinite endpoints are approached decade by decade.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rel_tol: f64) -> Moment {
    assert!(lo <= hi, "integration bounds out of order: ({lo}, {hi})");
    if lo == hi {
        return Moment::Finite(0.0);
    }
    if lo >= 0.0 {
        return integrate_positive(f, lo, hi, rel_tol);
    }
    let mirrored = |w: f64| f(-w);
    if hi <= 0.0 {
        return integrate_positive(&mirrored, -hi, -lo, rel_tol);
    }
    integrate_positive(&mirrored, 0.0, -lo, rel_tol).add(integrate_positive(f, 0.0, hi, rel_tol))
}

/// Integral over `(lo, hi)` with `0 <= lo < hi <= inf`.
fn integrate_positive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rel_tol: f64) -> Moment {
    debug_assert!(lo >= 0.0 && lo < hi);
    if hi.is_infinite() {
        let anchor = if lo > 0.0 { lo } else { 1.0 };
        let head = if lo > 0.0 { Moment::Finite(0.0) } else { integrate_positive(f, 0.0, 1.0, rel_tol) };
        return head.add(decades_to_infinity(f, anchor, rel_tol));
    }
    if lo == 0.0 {
        return decades_to_zero(f, hi, rel_tol);
    }
    Moment::Finite(log_span(f, lo, hi, rel_tol))
}

/// Integral over `[lo, hi]`, `0 < lo < hi < inf`, decade by decade in `s = ln y`.
fn log_span<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    let g = |s: f64| {
        let y = s.exp();
        f(y) * y
    };
    let (s_lo, s_hi) = (lo.ln(), hi.ln());
    let pieces = ((s_hi - s_lo) / LN_10).ceil().max(1.0) as usize;
    let width = (s_hi - s_lo) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let a = s_lo + width * k as f64;
            let b = if k + 1 == pieces { s_hi } else { a + width };
            gauss_kronrod(&g, a, b, rel_tol, 0.0, MAX_SUBDIVISIONS_PER_DECADE).value
        })
        .sum()
}

fn decades_to_zero<F: Fn(f64) -> f64>(f: &F, top: f64, rel_tol: f64) -> Moment {
    let g = |s: f64| {
        let y = s.exp();
        f(y) * y
    };
    let start = top.ln();
    decade_walk(&g, start, -1.0, rel_tol)
}

fn decades_to_infinity<F: Fn(f64) -> f64>(f: &F, bottom: f64, rel_tol: f64) -> Moment {
    let g = |s: f64| {
        let y = s.exp();
        f(y) * y
    };
    let start = bottom.ln();
    decade_walk(&g, start, 1.0, rel_tol)
}

/// Walks decades of the log variable from `start` in `direction` (±1).
fn decade_walk<G: Fn(f64) -> f64>(g: &G, start: f64, direction: f64, rel_tol: f64) -> Moment {
    // |ln y| <= ln(1e100): densities up to y^{-3} stay representable.
    const S_LIMIT: f64 = 230.3;
    let mut sum = 0.0;
    let mut incs: Vec<f64> = Vec::new();
    let mut depth: Vec<f64> = Vec::new();
    let mut edge = start;
    for k in 0..MAX_DECADES {
        let next = edge + direction * LN_10;
        if next.abs() > S_LIMIT {
            break;
        }
        let (a, b) = if direction < 0.0 { (next, edge) } else { (edge, next) };
        let d = gauss_kronrod(g, a, b, rel_tol, 0.0, MAX_SUBDIVISIONS_PER_DECADE).value;
        if !d.is_finite() {
            if k >= 8 {
                break;
            }
            return Moment::Infinite;
        }
        sum += d;
        incs.push(d);
        depth.push((0.5 * (a + b)).abs());
        edge = next;

        let scale = incs.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
        if sum.abs() > DIVERGENCE_THRESHOLD * scale {
            return Moment::Infinite;
        }
        if k < 2 {
            continue;
        }
        let tol = rel_tol * sum.abs();
        let prev = incs[k - 1];
        if d == 0.0 && prev == 0.0 && sum != 0.0 {
            return Moment::Finite(sum);
        }
        if d.abs() <= tol && prev.abs() <= 10.0 * tol {
            return Moment::Finite(sum);
        }
        let r1 = d / prev;
        let r0 = prev / incs[k - 2];
        if r1 > 0.0 && r1 < 1.0 && r0 > 0.0 && r0 < 1.0 {
            let tail = d * r1 / (1.0 - r1);
            let tail_err = tail.abs() * (r1 - r0).abs() / ((1.0 - r1) * (1.0 - r1));
            if tail_err <= tol {
                return Moment::Finite(sum + tail);
            }
        }
        if k >= 5 && steady_growth(&incs[k - 5..=k]) {
            return Moment::Infinite;
        }
    }
    power_tail(sum, &incs, &depth)
}

/// Contributions growing by a roughly constant factor, the signature of a power singularity
/// that is not integrable. Bulk-then-decay integrands (`e^{-zy}` seen from far away) grow by
/// wildly varying factors and are not flagged.
fn steady_growth(incs: &[f64]) -> bool {
    let ratios: Vec<f64> = incs.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().any(|r| !(*r >= 1.0) || !r.is_finite()) {
        return false;
    }
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    hi <= 2.0 * lo
}

/// Fallback when the walk ran out of decades: fit `d_k ≈ C·L_k^{-σ}` on the last decades and
/// either add the integrated tail or declare divergence.
fn power_tail(sum: f64, incs: &[f64], depth: &[f64]) -> Moment {
    let n = incs.len();
    if n < 8 {
        return Moment::Finite(sum);
    }
    let window = 20.min(n / 2);
    let (xs, ys): (Vec<f64>, Vec<f64>) = incs[n - window..]
        .iter()
        .zip(&depth[n - window..])
        .filter(|(d, l)| **d != 0.0 && **l > 1.0)
        .map(|(d, l)| (l.ln(), d.abs().ln()))
        .unzip();
    if xs.len() < 4 {
        return Moment::Finite(sum);
    }
    let sigma = -least_squares_slope(&xs, &ys);
    if sigma <= POWER_TAIL_DIVERGENCE {
        return Moment::Infinite;
    }
    let last = incs[n - 1];
    let l_last = depth[n - 1];
    Moment::Finite(sum + last * l_last / ((sigma - 1.0) * LN_10))
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    least_squares_line(xs, ys).0
}

/// Ordinary least-squares line `(slope, intercept)` of `ys` against `xs`.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Composite trapezoid rule for samples on a uniform grid with spacing `step`.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let interior: f64 = values[1..n - 1].iter().sum();
            step * (0.5 * (values[0] + values[n - 1]) + interior)
        }
    }
}

/// Running trapezoid integrals: `out[k]` integrates `values[0..=k]`.
pub fn cumulative_trapezoid(values: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * step * (values[k - 1] + v);
        }
        out.push(acc);
    }
    out
}
