//! The Laplace exponent `J` of the driving noise and the growth classes of `J'`.
//!
//! With the compensation on `(-1, 1)`,
//!
//! ```text
//! J'(z)  = -a + q·z + ∫_{|y|<1} y (1 - e^{-zy}) ν(dy) - ∫_{|y|>=1} y e^{-zy} ν(dy)
//! J''(z) =  q + ∫ y² e^{-zy} ν(dy)
//! ```
//!
//! The integral is split into four pieces: `(-inf, -1]`, `(-1, 0)`, `(0, 1)` and `[1, inf)`.
//! Positive small jumps and the uniform density have closed forms; everything else goes
//! through [`crate::quadrature::integrate`].

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::levy_model::{Evaluation, LevyMeasureSpec, LevyModel, Span};
use crate::quadrature::{gauss_kronrod, Moment};
use crate::special::{ein, lower_gamma};

/// Anything that provides `J`, `J'` and `J''` on `[0, inf)`.
pub trait Exponent: Send + Sync {
    fn j(&self, z: f64) -> f64;
    fn jprime(&self, z: f64) -> f64;

    /// Second derivative; defaults to a central difference of `J'`.
    fn jsecond(&self, z: f64) -> f64 {
        let h = 1e-5 * z.max(1e-3);
        let lo = (z - h).max(0.0);
        (self.jprime(z + h) - self.jprime(lo)) / (z + h - lo)
    }

    fn describe(&self) -> String {
        "exponent".to_string()
    }
}

impl<E: Exponent + ?Sized> Exponent for &E {
    fn j(&self, z: f64) -> f64 {
        (**self).j(z)
    }
    fn jprime(&self, z: f64) -> f64 {
        (**self).jprime(z)
    }
    fn jsecond(&self, z: f64) -> f64 {
        (**self).jsecond(z)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<E: Exponent + ?Sized> Exponent for Arc<E> {
    fn j(&self, z: f64) -> f64 {
        (**self).j(z)
    }
    fn jprime(&self, z: f64) -> f64 {
        (**self).jprime(z)
    }
    fn jsecond(&self, z: f64) -> f64 {
        (**self).jsecond(z)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Below this `|zy|` the kernels switch to Taylor series.
const SERIES_CUTOFF: f64 = 1e-3;

/// `e^{-x} - 1 + x`
fn comp_kernel(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        x * x * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0)
    } else {
        (-x).exp_m1() + x
    }
}

/// `1 - e^{-x}`
fn one_minus_exp(x: f64) -> f64 {
    -(-x).exp_m1()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Order {
    J,
    First,
    Second,
}

/// `J` built from a [`LevyModel`].
#[derive(Debug, Clone)]
pub struct LaplaceExponent {
    model: LevyModel,
    mode: Evaluation,
}

impl LaplaceExponent {
    /// Rejects models whose large jumps have an infinite first moment (then `J'(0) = -inf`).
    pub fn new(model: LevyModel) -> Result<Self> {
        Self::with_evaluation(model, Evaluation::Auto)
    }

    pub fn with_evaluation(model: LevyModel, mode: Evaluation) -> Result<Self> {
        model.measure.validate()?;
        if !model.measure.integrate_kernel(|y| y, Span::POS_LARGE).is_finite() {
            return Err(Error::InfiniteJPrimeAtZero);
        }
        Ok(LaplaceExponent { model, mode })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn evaluation(&self) -> Evaluation {
        self.mode
    }

    /// The same exponent forced onto the quadrature route.
    pub fn quadrature_only(&self) -> Self {
        LaplaceExponent { model: self.model.clone(), mode: Evaluation::Quadrature }
    }

    /// Contributions of the four jump regions to `J'(z)`:
    /// `[(-inf,-1], (-1,0), (0,1), [1,inf)]`.
    pub fn jprime_pieces(&self, z: f64) -> [f64; 4] {
        self.pieces(z, Order::First)
    }

    /// `J'(z)` from a single quadrature of the whole integrand (no splitting, no closed forms).
    pub fn jprime_direct(&self, z: f64) -> f64 {
        let kernel = |y: f64| if y.abs() < 1.0 { -y * (-z * y).exp_m1() } else { -y * (-z * y).exp() };
        let s = Span::open(f64::NEG_INFINITY, f64::INFINITY);
        let integral = self.model.measure.integrate_split(kernel, s, &kernel_breaks(z));
        -self.model.drift + self.model.gaussian_q * z + integral.value()
    }

    fn pieces(&self, z: f64, order: Order) -> [f64; 4] {
        let spans = [Span::NEG_LARGE, Span::NEG_SMALL, Span::POS_SMALL, Span::POS_LARGE];
        let mut out = [0.0; 4];
        for (k, span) in spans.iter().enumerate() {
            let compensated = k == 1 || k == 2;
            out[k] = self
                .closed_piece(z, *span, compensated, order)
                .unwrap_or_else(|| self.quadrature_piece(z, *span, compensated, order));
        }
        out
    }

    fn quadrature_piece(&self, z: f64, span: Span, compensated: bool, order: Order) -> f64 {
        let m = &self.model.measure;
        let breaks = kernel_breaks(z);
        let value = match (order, compensated) {
            (Order::J, true) => m.integrate_split(|y| comp_kernel(z * y), span, &breaks),
            (Order::J, false) => m.integrate_split(|y| (-z * y).exp_m1(), span, &breaks),
            (Order::First, true) => m.integrate_split(|y| y * one_minus_exp(z * y), span, &breaks),
            (Order::First, false) => m.integrate_split(|y| -y * (-z * y).exp(), span, &breaks),
            (Order::Second, _) => m.integrate_split(|y| y * y * (-z * y).exp(), span, &breaks),
        };
        value.value()
    }

    fn closed_piece(&self, z: f64, span: Span, compensated: bool, order: Order) -> Option<f64> {
        if self.mode == Evaluation::Quadrature {
            return None;
        }
        match self.model.measure {
            LevyMeasureSpec::TruncatedStable { p } if span == Span::POS_SMALL => truncated_stable_piece(p, z, order),
            LevyMeasureSpec::TruncatedStable { .. } => Some(0.0),
            LevyMeasureSpec::UniformDensity { c, lower, upper } => {
                let a = lower.max(span.lo);
                let b = upper.min(span.hi);
                if a >= b {
                    return Some(0.0);
                }
                Some(c * match order {
                    Order::First => {
                        let comp = if compensated { (b * b - a * a) / 2.0 } else { 0.0 };
                        comp - exp_moment(1, a, b, z)
                    }
                    Order::Second => exp_moment(2, a, b, z),
                    Order::J => return None,
                })
            }
            LevyMeasureSpec::FiniteAtoms { .. } => Some(self.quadrature_piece(z, span, compensated, order)),
            _ => None,
        }
    }
}

/// Split points around the scale `1/z` where `e^{-zy}` turns over.
fn kernel_breaks(z: f64) -> Vec<f64> {
    if z > 0.0 && z.is_finite() {
        let b = 1e-3 / z;
        vec![-b, b]
    } else {
        Vec::new()
    }
}

/// Closed forms for `y^{-1-p}` on `(0, 1)`.
fn truncated_stable_piece(p: f64, z: f64, order: Order) -> Option<f64> {
    match order {
        Order::First => {
            if z < 2.0 {
                // Σ_{k>=1} (-1)^{k+1} z^k / (k! (k+1-p))
                let mut term = 1.0;
                let mut sum = 0.0;
                for k in 1..100 {
                    term *= z / k as f64;
                    let contrib = term / (k as f64 + 1.0 - p);
                    sum += if k % 2 == 1 { contrib } else { -contrib };
                    if contrib < 1e-18 * sum.abs() {
                        break;
                    }
                }
                Some(sum)
            } else if p == 1.0 {
                Some(ein(z))
            } else if (p - 1.0).abs() < 1e-3 {
                None
            } else {
                Some((one_minus_exp(z) - z.powf(p - 1.0) * lower_gamma(2.0 - p, z)) / (1.0 - p))
            }
        }
        Order::Second => {
            if z == 0.0 {
                Some(1.0 / (2.0 - p))
            } else {
                Some(z.powf(p - 2.0) * lower_gamma(2.0 - p, z))
            }
        }
        Order::J => {
            if z < 2.0 {
                // Σ_{k>=2} (-z)^k / (k! (k-p))
                let mut term = z;
                let mut sum = 0.0;
                for k in 2..100 {
                    term *= z / k as f64;
                    let contrib = term / (k as f64 - p);
                    sum += if k % 2 == 0 { contrib } else { -contrib };
                    if contrib < 1e-18 * sum.abs() {
                        break;
                    }
                }
                Some(sum)
            } else {
                None
            }
        }
    }
}

/// `∫_a^b y^m e^{-zy} dy` for `m ∈ {1, 2}`.
fn exp_moment(m: i32, a: f64, b: f64, z: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if z * scale < 1.0 {
        // Σ_k (-z)^k / k! · (b^{k+m+1} - a^{k+m+1}) / (k+m+1)
        let mut sum = 0.0;
        let mut coeff = 1.0;
        for k in 0..60 {
            if k > 0 {
                coeff *= -z / k as f64;
            }
            let n = k + m + 1;
            let contrib = coeff * (b.powi(n) - a.powi(n)) / n as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let anti = |y: f64| match m {
            1 => -(-z * y).exp() * (z * y + 1.0) / (z * z),
            _ => -(-z * y).exp() * (z * z * y * y + 2.0 * z * y + 2.0) / (z * z * z),
        };
        anti(b) - anti(a)
    }
}

impl Exponent for LaplaceExponent {
    fn j(&self, z: f64) -> f64 {
        let m = &self.model;
        -m.drift * z + 0.5 * m.gaussian_q * z * z + self.pieces(z, Order::J).iter().sum::<f64>()
    }

    fn jprime(&self, z: f64) -> f64 {
        let m = &self.model;
        -m.drift + m.gaussian_q * z + self.pieces(z, Order::First).iter().sum::<f64>()
    }

    fn jsecond(&self, z: f64) -> f64 {
        self.model.gaussian_q + self.pieces(z, Order::Second).iter().sum::<f64>()
    }

    fn describe(&self) -> String {
        format!(
            "Laplace exponent of drift {}, q {}, ν {:?}",
            self.model.drift, self.model.gaussian_q, self.model.measure
        )
    }
}

type ScalarClosure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An exponent given directly through `J'`, bypassing the Lévy measure.
///
/// `J` defaults to `∫_0^z J'` by quadrature and `J''` to a finite difference of `J'`.
#[derive(Clone)]
pub struct UserExponent {
    label: String,
    jprime: ScalarClosure,
    j: Option<ScalarClosure>,
    jsecond: Option<ScalarClosure>,
}

impl fmt::Debug for UserExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UserExponent({})", self.label)
    }
}

impl UserExponent {
    pub fn new<F>(label: impl Into<String>, jprime: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        UserExponent { label: label.into(), jprime: Arc::new(jprime), j: None, jsecond: None }
    }

    pub fn with_j<F>(mut self, j: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.j = Some(Arc::new(j));
        self
    }

    pub fn with_jsecond<F>(mut self, jsecond: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.jsecond = Some(Arc::new(jsecond));
        self
    }

    /// `J' ≡ c`.
    pub fn constant(c: f64) -> Self {
        UserExponent::new(format!("J' = {c}"), move |_| c).with_j(move |z| c * z).with_jsecond(|_| 0.0)
    }

    /// `J'(z) = slope·z`.
    pub fn linear(slope: f64) -> Self {
        UserExponent::new(format!("J'(z) = {slope} z"), move |z| slope * z)
            .with_j(move |z| 0.5 * slope * z * z)
            .with_jsecond(move |_| slope)
    }

    /// `J'(z) = α ln³(γ(z + e²)) + β`.
    pub fn cube_log(alpha: f64, gamma: f64, beta: f64) -> Self {
        UserExponent::new(format!("J'(z) = {alpha} ln³({gamma}(z+e²)) {beta:+}"), move |z| {
            alpha * (gamma * (z + E * E)).ln().powi(3) + beta
        })
        .with_jsecond(move |z| 3.0 * alpha * (gamma * (z + E * E)).ln().powi(2) / (z + E * E))
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl Exponent for UserExponent {
    fn j(&self, z: f64) -> f64 {
        if let Some(j) = &self.j {
            return j(z);
        }
        if z == 0.0 {
            return 0.0;
        }
        gauss_kronrod(&|w| (self.jprime)(w), 0.0, z, 1e-12, 0.0, 1_000).value
    }

    fn jprime(&self, z: f64) -> f64 {
        (self.jprime)(z)
    }

    fn jsecond(&self, z: f64) -> f64 {
        match &self.jsecond {
            Some(js) => js(z),
            None => {
                let h = 1e-5 * z.max(1e-3);
                let lo = (z - h).max(0.0);
                ((self.jprime)(z + h) - (self.jprime)(lo)) / (z + h - lo)
            }
        }
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// `factor · J` for another exponent; used as a deliberately wrong drift.
#[derive(Debug, Clone)]
pub struct Scaled<E> {
    pub inner: E,
    pub factor: f64,
}

impl<E: Exponent> Exponent for Scaled<E> {
    fn j(&self, z: f64) -> f64 {
        self.factor * self.inner.j(z)
    }
    fn jprime(&self, z: f64) -> f64 {
        self.factor * self.inner.jprime(z)
    }
    fn jsecond(&self, z: f64) -> f64 {
        self.factor * self.inner.jsecond(z)
    }
    fn describe(&self) -> String {
        format!("{} × ({})", self.factor, self.inner.describe())
    }
}

/// Growth class of `J'` at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthKind {
    /// `ln z - λ̄T*·J'(z)` unbounded above: a bounded solution exists.
    SubLog,
    /// `J'` grows at least like a positive multiple of `ln³ z`: no solution.
    SuperCubeLog,
    Inconclusive,
}

impl fmt::Display for GrowthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrowthKind::SubLog => "SUBLOG",
            GrowthKind::SuperCubeLog => "SUPERCUBELOG",
            GrowthKind::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Grid and thresholds of [`growth_classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthOptions {
    pub z_min: f64,
    pub z_max: f64,
    pub points_per_decade: usize,
    /// `ln z - λ̄T*·J'(z)` must exceed this at the top of the grid.
    pub margin: f64,
    /// Allowed relative decay of the `J'`-versus-`ln³ z` slope across the top half.
    pub cube_slack: f64,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions { z_min: 10.0, z_max: 1e12, points_per_decade: 1, margin: 10.0, cube_slack: 0.1 }
    }
}

impl GrowthOptions {
    pub fn grid(&self) -> Vec<f64> {
        let decades = (self.z_max / self.z_min).log10();
        let n = (decades * self.points_per_decade as f64).round().max(1.0) as usize;
        (0..=n).map(|k| self.z_min * 10f64.powf(decades * k as f64 / n as f64)).collect()
    }
}

/// Growth class with the sampled diagnostics it was decided from.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthVerdict {
    pub kind: GrowthKind,
    pub z: Vec<f64>,
    pub jprime: Vec<f64>,
    /// `ln z - λ̄T*·J'(z)`
    pub log_gap: Vec<f64>,
    /// `J'(z) / ln³ z`
    pub cube_ratio: Vec<f64>,
    pub reason: String,
}

/// Decides the growth class of `J'` on a geometric grid.
///
/// * `SubLog`: the gap `ln z - λ̄T*·J'(z)` increases over the top half of the grid and ends
///   above `margin`.
/// * `SuperCubeLog`: over the top half, the secant slopes of `J'` against `ln³ z` are
///   positive and the last one is at least `(1 - cube_slack)` times the first.
pub fn growth_classify(exponent: &dyn Exponent, lambda_bar: f64, t_star: f64, opts: &GrowthOptions) -> GrowthVerdict {
    let z = opts.grid();
    let jprime: Vec<f64> = z.iter().map(|&v| exponent.jprime(v)).collect();
    let scale = lambda_bar * t_star;
    let log_gap: Vec<f64> = z.iter().zip(&jprime).map(|(v, jp)| v.ln() - scale * jp).collect();
    let cube_ratio: Vec<f64> = z.iter().zip(&jprime).map(|(v, jp)| jp / v.ln().powi(3)).collect();
    let mut verdict = GrowthVerdict {
        kind: GrowthKind::Inconclusive,
        z,
        jprime,
        log_gap,
        cube_ratio,
        reason: String::new(),
    };
    if verdict.jprime.iter().any(|v| !v.is_finite()) {
        verdict.reason = "J' overflowed on the grid".into();
        return verdict;
    }
    let top = verdict.z.len() / 2;
    let gap = &verdict.log_gap[top..];
    let increasing = gap.windows(2).all(|w| w[1] > w[0]);
    let last_gap = *gap.last().unwrap();
    if increasing && last_gap > opts.margin {
        verdict.kind = GrowthKind::SubLog;
        verdict.reason = format!("ln z - λ̄T*J'(z) increases to {last_gap:.3} > {}", opts.margin);
        return verdict;
    }
    let cubes: Vec<f64> = verdict.z[top..].iter().map(|v| v.ln().powi(3)).collect();
    let jp = &verdict.jprime[top..];
    let slopes: Vec<f64> = (1..cubes.len()).map(|k| (jp[k] - jp[k - 1]) / (cubes[k] - cubes[k - 1])).collect();
    if let (Some(&first), Some(&last)) = (slopes.first(), slopes.last()) {
        if slopes.iter().all(|s| *s > 0.0) && last >= (1.0 - opts.cube_slack) * first {
            verdict.kind = GrowthKind::SuperCubeLog;
            verdict.reason = format!("slope of J' against ln³ z stays in [{last:.4}, {first:.4}] > 0");
            return verdict;
        }
    }
    verdict.reason = format!(
        "gap ends at {last_gap:.3} (increasing: {increasing}); no sustained ln³ growth"
    );
    verdict
}

/// `∫ y² ν` over `[1, inf)`; finiteness makes `J'` Lipschitz on `[0, inf)`.
pub fn large_jump_square(model: &LevyModel) -> Moment {
    model.measure.integrate_kernel(|y| y * y, Span::POS_LARGE)
}

/// `J'` of a model integrated numerically without any closed form; a reference for tests.
pub fn jprime_reference(model: &LevyModel, z: f64) -> f64 {
    let m = &model.measure;
    let breaks = kernel_breaks(z);
    let piece = |span: Span, compensated: bool| {
        if compensated {
            m.integrate_split(|y| y * one_minus_exp(z * y), span, &breaks).value()
        } else {
            m.integrate_split(|y| -y * (-z * y).exp(), span, &breaks).value()
        }
    };
    -model.drift
        + model.gaussian_q * z
        + piece(Span::NEG_LARGE, false)
        + piece(Span::NEG_SMALL, true)
        + piece(Span::POS_SMALL, true)
        + piece(Span::POS_LARGE, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(measure: LevyMeasureSpec) -> LevyModel {
        LevyModel::new(0.0, 0.0, measure).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn drift_only_exponent() {
        let e = LaplaceExponent::new(LevyModel::drift_only(0.7)).unwrap();
        for z in [0.0, 0.5, 3.0, 1e6] {
            assert_eq!(e.jprime(z), -0.7);
            assert!((e.j(z) + 0.7 * z).abs() <= 1e-15 * z.max(1.0));
            assert_eq!(e.jsecond(z), 0.0);
        }
    }

    #[test]
    fn truncated_stable_one_is_ein() {
        let e = LaplaceExponent::new(model(LevyMeasureSpec::truncated_stable(1.0).unwrap())).unwrap();
        assert_eq!(e.jprime(0.0), 0.0);
        for z in [0.1, 1.0, 2.5, 10.0, 100.0] {
            let oracle = gauss_kronrod(&|v: f64| -(-v).exp_m1() / v, 0.0, z, 1e-14, 0.0, 1000).value;
            assert!(rel(e.jprime(z), oracle) < 1e-12, "z={z}: {} vs {oracle}", e.jprime(z));
        }
    }

    #[test]
    fn uniform_unit_density_first_derivative() {
        let e = LaplaceExponent::new(model(LevyMeasureSpec::uniform(1.0, 0.0, 1.0).unwrap())).unwrap();
        for z in [1e-6f64, 0.01, 0.9, 1.0, 5.0, 40.0] {
            let oracle = if z < 1e-3 {
                z / 3.0 - z * z / 8.0 + z * z * z / 30.0
            } else {
                0.5 - (1.0 - (1.0 + z) * (-z).exp()) / (z * z)
            };
            let tol = if z < 0.1 { 1e-9 } else { 1e-12 };
            assert!((e.jprime(z) - oracle).abs() < tol * oracle.abs().max(1e-6), "z={z}");
            assert!(rel(e.quadrature_only().jprime(z), e.jprime(z)) < 1e-10, "z={z}");
        }
    }

    #[test]
    fn truncated_stable_closed_form_matches_quadrature() {
        for p in [0.3, 0.5, 0.9995, 1.3, 1.7] {
            let e = LaplaceExponent::new(model(LevyMeasureSpec::truncated_stable(p).unwrap())).unwrap();
            let q = e.quadrature_only();
            for z in [0.01, 0.7, 1.99, 2.0, 13.0, 1e3, 1e6] {
                assert!(rel(e.jprime(z), q.jprime(z)) < 1e-9, "p={p} z={z}: {} vs {}", e.jprime(z), q.jprime(z));
                assert!(rel(e.jsecond(z), q.jsecond(z)) < 1e-9, "p={p} z={z}: {} vs {}", e.jsecond(z), q.jsecond(z));
            }
            for z in [0.01, 0.7, 1.5] {
                assert!(rel(e.j(z), q.j(z)) < 1e-9, "p={p} z={z}");
            }
        }
    }

    #[test]
    fn atoms_are_exact_sums() {
        let e = LaplaceExponent::new(
            LevyModel::new(0.6, 0.0, LevyMeasureSpec::atoms(vec![0.3, 1.5], vec![2.0, 0.1]).unwrap()).unwrap(),
        )
        .unwrap();
        let z = 2.0;
        let jp = -0.6 + 2.0 * 0.3 * (1.0 - (-0.6f64).exp()) - 0.1 * 1.5 * (-3.0f64).exp();
        assert!((e.jprime(z) - jp).abs() < 1e-15);
        let j = -1.2 + 2.0 * ((-0.6f64).exp() - 1.0 + 0.6) + 0.1 * ((-3.0f64).exp() - 1.0);
        assert!((e.j(z) - j).abs() < 1e-15);
    }

    #[test]
    fn decomposition_matches_direct_quadrature() {
        let spec = LevyMeasureSpec::user_density(|y: f64| (-y.abs()).exp() / y.abs().powf(1.2), -0.4, 3.0).unwrap();
        let e = LaplaceExponent::new(model(spec)).unwrap();
        for z in [0.0, 0.3, 1.0, 7.0] {
            let split: f64 = e.jprime_pieces(z).iter().sum();
            assert!((split - e.jprime_direct(z)).abs() <= 1e-8 * split.abs().max(1e-8), "z={z}");
        }
    }

    #[test]
    fn large_first_moment_is_rejected() {
        let heavy = LevyMeasureSpec::user_density(|y| y.powf(-1.9), 1.0, f64::INFINITY).unwrap();
        assert!(matches!(LaplaceExponent::new(model(heavy)), Err(Error::InfiniteJPrimeAtZero)));
    }

    #[test]
    fn growth_of_bounded_jprime_is_sublog() {
        let e = LaplaceExponent::new(
            LevyModel::new(0.1, 0.0, LevyMeasureSpec::atoms(vec![0.3], vec![2.0]).unwrap()).unwrap(),
        )
        .unwrap();
        let v = growth_classify(&e, 1.0, 1.0, &GrowthOptions::default());
        assert_eq!(v.kind, GrowthKind::SubLog, "{}", v.reason);
    }

    #[test]
    fn synthetic_cube_log_is_supercubelog() {
        let e = UserExponent::new("2 ln³ z + 1", |z: f64| 2.0 * z.ln().powi(3) + 1.0);
        let v = growth_classify(&e, 1.0, 1.0, &GrowthOptions::default());
        assert_eq!(v.kind, GrowthKind::SuperCubeLog, "{}", v.reason);
    }

    #[test]
    fn intermediate_growth_is_inconclusive() {
        let e = UserExponent::new("ln² z", |z: f64| z.ln().powi(2));
        let v = growth_classify(&e, 1.0, 1.0, &GrowthOptions::default());
        assert_eq!(v.kind, GrowthKind::Inconclusive, "{}", v.reason);
        let overflow = UserExponent::new("e^z", f64::exp);
        assert_eq!(growth_classify(&overflow, 1.0, 1.0, &GrowthOptions::default()).kind, GrowthKind::Inconclusive);
    }

    #[test]
    fn truncated_stable_one_growth_depends_on_horizon() {
        let e = LaplaceExponent::new(model(LevyMeasureSpec::truncated_stable(1.0).unwrap())).unwrap();
        assert_eq!(growth_classify(&e, 1.0, 0.5, &GrowthOptions::default()).kind, GrowthKind::SubLog);
        assert_eq!(growth_classify(&e, 1.0, 1.0, &GrowthOptions::default()).kind, GrowthKind::Inconclusive);
    }

    #[test]
    fn cube_log_derivatives() {
        let e = UserExponent::cube_log(2.0, 4.0, -1.0);
        for z in [0.5f64, 1.0, 50.0] {
            let h = 1e-5 * z;
            let fd = (e.jprime(z + h) - e.jprime((z - h).max(0.0))) / (z + h - (z - h).max(0.0));
            assert!(rel(e.jsecond(z), fd) < 1e-6);
            let jd = (e.j(z + h) - e.j((z - h).max(0.0))) / (z + h - (z - h).max(0.0));
            assert!(rel(jd, e.jprime(z)) < 1e-6);
        }
    }
}
