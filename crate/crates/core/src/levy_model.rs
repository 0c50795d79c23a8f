//! The driving Lévy noise: drift, Gaussian coefficient and Lévy measure.
//!
//! The Laplace exponent is taken in the form
//!
//! ```text
//! J(z) = -a·z + q·z²/2 + ∫ (e^{-zy} - 1 + z·y·1{|y|<1}) ν(dy)
//! ```
//!
//! Every functional of `ν` used by the crate (the truncated second moment `U_ν`, first
//! moments, masses, the integrals behind `J`) is available through two routes: a closed form
//! for the families that admit one, and quadrature against the density (or a finite sum for
//! atoms). [`Evaluation`] selects the route; `Auto` prefers the closed form.

use std::fmt;
use std::sync::Arc;

use crate::curves::{InitialCurve, VolatilitySurface};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Moment, DEFAULT_REL_TOL};

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which route evaluates a measure functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    /// Closed form when the family has one, quadrature otherwise.
    #[default]
    Auto,
    /// Always integrate numerically against the density.
    Quadrature,
}

/// Lévy measure families.
#[derive(Clone)]
pub enum LevyMeasureSpec {
    /// `ν(dy) = y^{-1-p} dy` on `(0, 1)`, `0 < p < 2`.
    TruncatedStable { p: f64 },
    /// `ν(dy) = dy / (y² |ln y|^γ)` on `(0, 1/2)`, `γ > 0`.
    LogModified { gamma: f64 },
    /// Density `(L^{-γ} + γ L^{-γ-1}) / y²` with `L = ln(1/y)` on `(0, upper)`, `upper < 1`,
    /// chosen so that `U_ν(x) = x·L(x)^{-γ}`.
    LogPowerDensity { gamma: f64, upper: f64 },
    /// Constant density `c` on `(lower, upper)`.
    UniformDensity { c: f64, lower: f64, upper: f64 },
    /// `Σ masses[k]·δ_{points[k]}`; the empty list is the zero measure.
    FiniteAtoms { points: Vec<f64>, masses: Vec<f64> },
    /// Arbitrary density on `(lower, upper)`.
    UserDensity { density: DensityFn, lower: f64, upper: f64 },
}

impl fmt::Debug for LevyMeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevyMeasureSpec::TruncatedStable { p } => write!(f, "TruncatedStable(p={p})"),
            LevyMeasureSpec::LogModified { gamma } => write!(f, "LogModified(gamma={gamma})"),
            LevyMeasureSpec::LogPowerDensity { gamma, upper } => {
                write!(f, "LogPowerDensity(gamma={gamma}, upper={upper})")
            }
            LevyMeasureSpec::UniformDensity { c, lower, upper } => {
                write!(f, "UniformDensity(c={c}, support=({lower}, {upper}))")
            }
            LevyMeasureSpec::FiniteAtoms { points, masses } => {
                write!(f, "FiniteAtoms(points={points:?}, masses={masses:?})")
            }
            LevyMeasureSpec::UserDensity { lower, upper, .. } => {
                write!(f, "UserDensity(support=({lower}, {upper}))")
            }
        }
    }
}

/// A set of jump sizes with explicit closedness at each end (matters for atoms only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
    pub include_lo: bool,
    pub include_hi: bool,
}

impl Span {
    pub fn open(lo: f64, hi: f64) -> Self {
        Span { lo, hi, include_lo: false, include_hi: false }
    }

    /// `(lo, hi]`
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Span { lo, hi, include_lo: false, include_hi: true }
    }

    /// `[lo, hi)`
    pub fn right_open(lo: f64, hi: f64) -> Self {
        Span { lo, hi, include_lo: true, include_hi: false }
    }

    pub fn contains(&self, y: f64) -> bool {
        let above = y > self.lo || (self.include_lo && y == self.lo);
        let below = y < self.hi || (self.include_hi && y == self.hi);
        above && below
    }

    /// Jumps compensated in the Laplace exponent on the negative side: `(-1, 0)`.
    pub const NEG_SMALL: Span = Span { lo: -1.0, hi: 0.0, include_lo: false, include_hi: false };
    /// Uncompensated negative jumps: `(-inf, -1]`.
    pub const NEG_LARGE: Span =
        Span { lo: f64::NEG_INFINITY, hi: -1.0, include_lo: false, include_hi: true };
    /// Compensated positive jumps: `(0, 1)`.
    pub const POS_SMALL: Span = Span { lo: 0.0, hi: 1.0, include_lo: false, include_hi: false };
    /// Uncompensated positive jumps: `[1, inf)`.
    pub const POS_LARGE: Span =
        Span { lo: 1.0, hi: f64::INFINITY, include_lo: true, include_hi: false };
}

/// Support interval of a measure; `lower_attained` is true when an atom sits at `lower`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
    pub lower_attained: bool,
}

fn check_interval(lower: f64, upper: f64) -> Result<()> {
    if lower.is_nan() || upper.is_nan() || lower >= upper || lower == f64::INFINITY {
        return Err(Error::MalformedSupport { lower, upper });
    }
    Ok(())
}

impl LevyMeasureSpec {
    pub fn zero() -> Self {
        LevyMeasureSpec::FiniteAtoms { points: Vec::new(), masses: Vec::new() }
    }

    pub fn truncated_stable(p: f64) -> Result<Self> {
        let spec = LevyMeasureSpec::TruncatedStable { p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn log_modified(gamma: f64) -> Result<Self> {
        let spec = LevyMeasureSpec::LogModified { gamma };
        spec.validate()?;
        Ok(spec)
    }

    /// The log-power density truncated at `upper = 1/2`.
    pub fn log_power_density(gamma: f64) -> Result<Self> {
        let spec = LevyMeasureSpec::LogPowerDensity { gamma, upper: 0.5 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(c: f64, lower: f64, upper: f64) -> Result<Self> {
        let spec = LevyMeasureSpec::UniformDensity { c, lower, upper };
        spec.validate()?;
        Ok(spec)
    }

    pub fn atoms(points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let spec = LevyMeasureSpec::FiniteAtoms { points, masses };
        spec.validate()?;
        Ok(spec)
    }

    pub fn user_density<F>(density: F, lower: f64, upper: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let spec = LevyMeasureSpec::UserDensity { density: Arc::new(density), lower, upper };
        spec.validate()?;
        Ok(spec)
    }

    /// Parameter ranges, nonnegativity, and `∫ min(y², 1) ν(dy) < ∞`.
    pub fn validate(&self) -> Result<()> {
        match self {
            LevyMeasureSpec::TruncatedStable { p } => {
                if !(*p > 0.0 && *p < 2.0) {
                    return Err(Error::InvalidParameter(format!("truncated-stable exponent p={p} outside (0, 2)")));
                }
            }
            LevyMeasureSpec::LogModified { gamma } => {
                if !(*gamma > 0.0) {
                    return Err(Error::InvalidParameter(format!("log-modified exponent gamma={gamma} must be positive")));
                }
            }
            LevyMeasureSpec::LogPowerDensity { gamma, upper } => {
                if !(*gamma > 0.0) {
                    return Err(Error::InvalidParameter(format!("log-power exponent gamma={gamma} must be positive")));
                }
                check_interval(0.0, *upper)?;
                if *upper >= 1.0 {
                    // U_ν(x) = x (ln 1/x)^{-γ} blows up as x → 1.
                    return Err(Error::NotLevyMeasure(format!(
                        "log-power density needs upper < 1 to have finite second moment, got {upper}"
                    )));
                }
            }
            LevyMeasureSpec::UniformDensity { c, lower, upper } => {
                check_interval(*lower, *upper)?;
                if !(*c >= 0.0) {
                    return Err(Error::InvalidParameter(format!("uniform density c={c} must be nonnegative")));
                }
                if lower.is_infinite() || upper.is_infinite() {
                    return Err(Error::NotLevyMeasure("uniform density on an unbounded interval has infinite mass".into()));
                }
            }
            LevyMeasureSpec::FiniteAtoms { points, masses } => {
                if points.len() != masses.len() {
                    return Err(Error::InvalidParameter("atoms need one mass per point".into()));
                }
                if points.iter().any(|y| !y.is_finite() || *y == 0.0) {
                    return Err(Error::InvalidParameter("atom locations must be finite and nonzero".into()));
                }
                if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
                    return Err(Error::InvalidParameter("atom masses must be finite and nonnegative".into()));
                }
            }
            LevyMeasureSpec::UserDensity { density, lower, upper } => {
                check_interval(*lower, *upper)?;
                for y in probe_points(*lower, *upper) {
                    let v = density(y);
                    if !(v >= 0.0) {
                        return Err(Error::InvalidParameter(format!("density is negative or NaN at y={y}: {v}")));
                    }
                }
                let truncated = self.integrate_with(
                    |y| (y * y).min(1.0),
                    Span::open(f64::NEG_INFINITY, f64::INFINITY),
                    Evaluation::Quadrature,
                );
                if !truncated.is_finite() {
                    return Err(Error::NotLevyMeasure("∫ min(y², 1) ν(dy) diverges".into()));
                }
            }
        }
        Ok(())
    }

    pub fn support(&self) -> Support {
        let interval = |lower: f64, upper: f64| Support { lower, upper, lower_attained: false };
        match self {
            LevyMeasureSpec::TruncatedStable { .. } => interval(0.0, 1.0),
            LevyMeasureSpec::LogModified { .. } => interval(0.0, 0.5),
            LevyMeasureSpec::LogPowerDensity { upper, .. } => interval(0.0, *upper),
            LevyMeasureSpec::UniformDensity { c, lower, upper } => {
                if *c == 0.0 {
                    interval(0.0, 0.0)
                } else {
                    interval(*lower, *upper)
                }
            }
            LevyMeasureSpec::UserDensity { lower, upper, .. } => interval(*lower, *upper),
            LevyMeasureSpec::FiniteAtoms { points, masses } => {
                let charged = points.iter().zip(masses).filter(|(_, m)| **m > 0.0).map(|(y, _)| *y);
                let (lo, hi) = charged.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
                if lo > hi {
                    interval(0.0, 0.0)
                } else {
                    Support { lower: lo, upper: hi, lower_attained: true }
                }
            }
        }
    }

    /// Whether the measure charges nothing.
    pub fn is_zero(&self) -> bool {
        let s = self.support();
        s.lower == 0.0 && s.upper == 0.0 && !s.lower_attained
    }

    pub fn has_density(&self) -> bool {
        !matches!(self, LevyMeasureSpec::FiniteAtoms { .. })
    }

    /// Density at `y` (zero outside the support); `None` for atomic measures.
    pub fn density(&self, y: f64) -> Option<f64> {
        let inside = |lo: f64, hi: f64| y > lo && y < hi;
        Some(match self {
            LevyMeasureSpec::TruncatedStable { p } => {
                if inside(0.0, 1.0) {
                    y.powf(-1.0 - p)
                } else {
                    0.0
                }
            }
            LevyMeasureSpec::LogModified { gamma } => {
                if inside(0.0, 0.5) {
                    1.0 / (y * y * (-y.ln()).powf(*gamma))
                } else {
                    0.0
                }
            }
            LevyMeasureSpec::LogPowerDensity { gamma, upper } => {
                if inside(0.0, *upper) {
                    let l = -y.ln();
                    (l.powf(-gamma) + gamma * l.powf(-gamma - 1.0)) / (y * y)
                } else {
                    0.0
                }
            }
            LevyMeasureSpec::UniformDensity { c, lower, upper } => {
                if inside(*lower, *upper) {
                    *c
                } else {
                    0.0
                }
            }
            LevyMeasureSpec::UserDensity { density, lower, upper } => {
                if inside(*lower, *upper) {
                    density(y)
                } else {
                    0.0
                }
            }
            LevyMeasureSpec::FiniteAtoms { .. } => return None,
        })
    }

    /// `∫_span kernel(y) ν(dy)` by quadrature (densities) or summation (atoms).
    pub fn integrate_with<K: Fn(f64) -> f64>(&self, kernel: K, span: Span, _mode: Evaluation) -> Moment {
        self.integrate_split(kernel, span, &[])
    }

    /// As [`Self::integrate_kernel`], with the density integral split at `breaks`.
    ///
    /// Kernels that change character at a known scale (`e^{-zy}` near `y = 1/z`) need the
    /// split: the decade walk towards zero extrapolates from the decades it has seen.
    pub fn integrate_split<K: Fn(f64) -> f64>(&self, kernel: K, span: Span, breaks: &[f64]) -> Moment {
        if let LevyMeasureSpec::FiniteAtoms { points, masses } = self {
            let total = points
                .iter()
                .zip(masses)
                .filter(|(y, _)| span.contains(**y))
                .map(|(y, m)| m * kernel(*y))
                .sum();
            return Moment::Finite(total);
        }
        let support = self.support();
        let lo = span.lo.max(support.lower);
        let hi = span.hi.min(support.upper);
        if lo >= hi {
            return Moment::Finite(0.0);
        }
        let f = |y: f64| {
            let d = self.density(y).unwrap_or(0.0);
            if d == 0.0 {
                0.0
            } else {
                kernel(y) * d
            }
        };
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi && *b != 0.0).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![lo];
        edges.extend(cuts);
        edges.push(hi);
        edges
            .windows(2)
            .map(|w| integrate(&f, w[0], w[1], DEFAULT_REL_TOL))
            .fold(Moment::Finite(0.0), Moment::add)
    }

    /// `∫_span kernel dν` by quadrature/summation.
    pub fn integrate_kernel<K: Fn(f64) -> f64>(&self, kernel: K, span: Span) -> Moment {
        self.integrate_with(kernel, span, Evaluation::Quadrature)
    }

    /// `U_ν(x) = ∫_{(0, x]} y² ν(dy)`.
    pub fn u_nu(&self, x: f64) -> f64 {
        self.u_nu_with(x, Evaluation::Auto)
    }

    pub fn u_nu_with(&self, x: f64, mode: Evaluation) -> f64 {
        assert!(x > 0.0, "U_ν needs x > 0, got {x}");
        if mode == Evaluation::Auto {
            match *self {
                LevyMeasureSpec::TruncatedStable { p } => return x.min(1.0).powf(2.0 - p) / (2.0 - p),
                LevyMeasureSpec::LogPowerDensity { gamma, upper } => {
                    let x = x.min(upper);
                    return x * (-x.ln()).powf(-gamma);
                }
                LevyMeasureSpec::UniformDensity { c, lower, upper } => {
                    let a = lower.max(0.0);
                    let b = upper.min(x);
                    return if b > a { c * (b.powi(3) - a.powi(3)) / 3.0 } else { 0.0 };
                }
                _ => {}
            }
        }
        self.integrate_kernel(|y| y * y, Span::left_open(0.0, x)).value()
    }

    /// `ν([eps, inf))`, the intensity of jumps of size at least `eps`.
    pub fn mass_above(&self, eps: f64) -> Moment {
        self.mass_above_with(eps, Evaluation::Auto)
    }

    pub fn mass_above_with(&self, eps: f64, mode: Evaluation) -> Moment {
        assert!(eps > 0.0, "mass above needs eps > 0");
        if mode == Evaluation::Auto {
            match *self {
                LevyMeasureSpec::TruncatedStable { p } => {
                    return Moment::Finite(if eps >= 1.0 { 0.0 } else { (eps.powf(-p) - 1.0) / p })
                }
                LevyMeasureSpec::UniformDensity { c, lower, upper } => {
                    let a = lower.max(eps);
                    return Moment::Finite(if upper > a { c * (upper - a) } else { 0.0 });
                }
                _ => {}
            }
        }
        self.integrate_kernel(|_| 1.0, Span::right_open(eps, f64::INFINITY))
    }

    /// `∫_{[a, b)} y ν(dy)` for `0 < a < b <= inf`.
    pub fn first_moment_between(&self, a: f64, b: f64) -> Moment {
        self.first_moment_between_with(a, b, Evaluation::Auto)
    }

    pub fn first_moment_between_with(&self, a: f64, b: f64, mode: Evaluation) -> Moment {
        assert!(a > 0.0 && a <= b, "first moment needs 0 < a <= b");
        if a == b {
            return Moment::Finite(0.0);
        }
        if mode == Evaluation::Auto {
            match *self {
                LevyMeasureSpec::TruncatedStable { p } => {
                    let b = b.min(1.0);
                    if a >= b {
                        return Moment::Finite(0.0);
                    }
                    return Moment::Finite(if p == 1.0 {
                        (b / a).ln()
                    } else {
                        (b.powf(1.0 - p) - a.powf(1.0 - p)) / (1.0 - p)
                    });
                }
                LevyMeasureSpec::LogModified { gamma } => {
                    let b = b.min(0.5);
                    if a >= b {
                        return Moment::Finite(0.0);
                    }
                    // ∫ dy / (y L^γ) = ∫ L^{-γ} dL with L = -ln y
                    let (la, lb) = (-a.ln(), -b.ln());
                    return Moment::Finite(if gamma == 1.0 {
                        (la / lb).ln()
                    } else {
                        (la.powf(1.0 - gamma) - lb.powf(1.0 - gamma)) / (1.0 - gamma)
                    });
                }
                LevyMeasureSpec::UniformDensity { c, lower, upper } => {
                    let lo = lower.max(a);
                    let hi = upper.min(b);
                    return Moment::Finite(if hi > lo { c * (hi * hi - lo * lo) / 2.0 } else { 0.0 });
                }
                _ => {}
            }
        }
        self.integrate_kernel(|y| y, Span::right_open(a, b))
    }

    /// Moment functionals entering the standing assumptions and the classifier.
    pub fn moment_integrals(&self) -> MomentIntegrals {
        self.moment_integrals_with(Evaluation::Auto)
    }

    pub fn moment_integrals_with(&self, mode: Evaluation) -> MomentIntegrals {
        let tail_first = self.integrate_kernel(|y| y, Span::POS_LARGE);
        let neg_mass = self.integrate_kernel(|_| 1.0, Span::open(f64::NEG_INFINITY, 0.0));
        let neg_square = self.integrate_kernel(|y| y * y, Span::open(f64::NEG_INFINITY, 0.0));
        let numeric_small_square = || self.integrate_kernel(|y| y * y, Span::POS_SMALL);
        let numeric_small_first = || self.integrate_kernel(|y| y, Span::POS_SMALL);
        let (small_square, small_first) = if mode == Evaluation::Quadrature {
            (numeric_small_square(), numeric_small_first())
        } else {
            match *self {
                LevyMeasureSpec::TruncatedStable { p } => (
                    Moment::Finite(1.0 / (2.0 - p)),
                    if p < 1.0 { Moment::Finite(1.0 / (1.0 - p)) } else { Moment::Infinite },
                ),
                LevyMeasureSpec::LogModified { gamma } => (
                    numeric_small_square(),
                    if gamma > 1.0 {
                        Moment::Finite(std::f64::consts::LN_2.powf(1.0 - gamma) / (gamma - 1.0))
                    } else {
                        Moment::Infinite
                    },
                ),
                LevyMeasureSpec::LogPowerDensity { gamma, upper } => {
                    let lb = -upper.ln();
                    (
                        Moment::Finite(upper * lb.powf(-gamma)),
                        if gamma > 1.0 {
                            Moment::Finite(lb.powf(1.0 - gamma) / (gamma - 1.0) + lb.powf(-gamma))
                        } else {
                            Moment::Infinite
                        },
                    )
                }
                LevyMeasureSpec::UniformDensity { c, lower, upper } => {
                    let a = lower.max(0.0);
                    let b = upper.min(1.0);
                    if b > a {
                        (
                            Moment::Finite(c * (b.powi(3) - a.powi(3)) / 3.0),
                            Moment::Finite(c * (b * b - a * a) / 2.0),
                        )
                    } else {
                        (Moment::Finite(0.0), Moment::Finite(0.0))
                    }
                }
                _ => (numeric_small_square(), numeric_small_first()),
            }
        };
        MomentIntegrals { tail_first, small_square, small_first, neg_mass, neg_square }
    }

    /// Whether a closed form exists for `U_ν` (used by the cross-check suites).
    pub fn has_closed_form_u(&self) -> bool {
        matches!(
            self,
            LevyMeasureSpec::TruncatedStable { .. }
                | LevyMeasureSpec::LogPowerDensity { .. }
                | LevyMeasureSpec::UniformDensity { .. }
        )
    }
}

/// Log-spaced probe points inside `(lower, upper)` for sanity checks of user densities.
fn probe_points(lower: f64, upper: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut push_side = |lo: f64, hi: f64, sign: f64| {
        // lo, hi are magnitudes on one side of zero, 0 <= lo < hi
        let a = if lo > 0.0 { lo } else { 1e-12_f64.min(hi * 1e-6) };
        let b = if hi.is_finite() { hi } else { a.max(1.0) * 1e6 };
        for k in 1..64 {
            let y = a * (b / a).powf(k as f64 / 64.0);
            out.push(sign * y);
        }
    };
    if upper > 0.0 {
        push_side(lower.max(0.0), upper, 1.0);
    }
    if lower < 0.0 {
        push_side((-upper).max(0.0), -lower, -1.0);
    }
    out
}

/// Moment functionals of `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentIntegrals {
    /// `∫_{[1,∞)} y ν(dy)`
    pub tail_first: Moment,
    /// `∫_{(0,1)} y² ν(dy)`
    pub small_square: Moment,
    /// `∫_{(0,1)} y ν(dy)`; finite exactly for subordinator-type small jumps.
    pub small_first: Moment,
    /// `ν((-∞, 0))`
    pub neg_mass: Moment,
    /// `∫_{(-∞,0)} y² ν(dy)`
    pub neg_square: Moment,
}

/// Drift `a`, Gaussian coefficient `q` and Lévy measure `ν`.
#[derive(Debug, Clone)]
pub struct LevyModel {
    pub drift: f64,
    pub gaussian_q: f64,
    pub measure: LevyMeasureSpec,
}

impl LevyModel {
    pub fn new(drift: f64, gaussian_q: f64, measure: LevyMeasureSpec) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::InvalidParameter(format!("drift must be finite, got {drift}")));
        }
        if !(gaussian_q >= 0.0) || !gaussian_q.is_finite() {
            return Err(Error::InvalidParameter(format!("Gaussian coefficient q={gaussian_q} must be >= 0")));
        }
        measure.validate()?;
        Ok(LevyModel { drift, gaussian_q, measure })
    }

    /// Pure drift `L(t) = a·t`.
    pub fn drift_only(drift: f64) -> Self {
        LevyModel { drift, gaussian_q: 0.0, measure: LevyMeasureSpec::zero() }
    }

    pub fn u_nu(&self, x: f64) -> f64 {
        self.measure.u_nu(x)
    }

    pub fn moment_integrals(&self) -> MomentIntegrals {
        self.measure.moment_integrals()
    }
}

/// Outcome of checking the standing assumptions for a model, volatility and initial curve.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// Initial curve positive (and continuous by representation).
    pub a1_ok: bool,
    /// Support of `ν` inside `(-1/λ̄, ∞)`.
    pub a2_ok: bool,
    /// Both moment conditions finite.
    pub a4_ok: bool,
    /// Structural statement about the volatility family.
    pub a3_note: String,
    pub f0_min: f64,
    pub lambda_bar: f64,
    pub support_lower: f64,
    pub support_lower_attained: bool,
    /// `∫_{(-1/λ̄, 1)} y² ν(dy)`
    pub a4_small_square: Moment,
    /// `∫_{[1, ∞)} y ν(dy)`
    pub a4_tail_first: Moment,
}

impl AssumptionReport {
    /// Support condition recomputed from the stored diagnostics.
    pub fn a2_from_diagnostics(&self) -> bool {
        let threshold = -1.0 / self.lambda_bar;
        self.support_lower > threshold || (self.support_lower == threshold && !self.support_lower_attained)
    }

    /// Moment condition recomputed from the stored diagnostics.
    pub fn a4_from_diagnostics(&self) -> bool {
        self.a4_small_square.is_finite() && self.a4_tail_first.is_finite()
    }

    pub fn all_ok(&self) -> bool {
        self.a1_ok && self.a2_ok && self.a4_ok
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "positivity of f0: {} (min {}), support in (-1/λ̄, ∞): {} (lower {}, λ̄ {}), moments: {} (∫y²={}, ∫_1^∞ y={}), volatility: {}",
            self.a1_ok,
            self.f0_min,
            self.a2_ok,
            self.support_lower,
            self.lambda_bar,
            self.a4_ok,
            self.a4_small_square,
            self.a4_tail_first,
            self.a3_note
        )
    }
}

/// Checks positivity of the initial curve, the support condition, the moment condition and
/// records the structural status of the volatility.
pub fn validate_assumptions(
    model: &LevyModel,
    lam: &VolatilitySurface,
    f0: &InitialCurve,
    t_star: f64,
) -> Result<AssumptionReport> {
    if !(t_star > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon T* must be positive, got {t_star}")));
    }
    let (_, lambda_bar) = lam.checked_bounds(t_star)?;
    Ok(assumption_report(model, lambda_bar, f0, t_star, lam.a3_note()))
}

/// Same checks with `λ̄` given directly.
pub fn assumption_report(
    model: &LevyModel,
    lambda_bar: f64,
    f0: &InitialCurve,
    t_star: f64,
    a3_note: String,
) -> AssumptionReport {
    let f0_min = f0.min_on(t_star);
    let support = model.measure.support();
    let threshold = -1.0 / lambda_bar;
    let a4_small_square = model
        .measure
        .integrate_kernel(|y| y * y, Span::open(threshold, 1.0));
    let a4_tail_first = model.measure.integrate_kernel(|y| y, Span::POS_LARGE);
    let mut report = AssumptionReport {
        a1_ok: f0_min > 0.0 && f0_min.is_finite(),
        a2_ok: false,
        a4_ok: false,
        a3_note,
        f0_min,
        lambda_bar,
        support_lower: support.lower,
        support_lower_attained: support.lower_attained,
        a4_small_square,
        a4_tail_first,
    };
    report.a2_ok = model.measure.is_zero() || report.a2_from_diagnostics();
    report.a4_ok = report.a4_from_diagnostics();
    report
}
