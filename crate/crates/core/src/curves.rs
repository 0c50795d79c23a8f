//! Deterministic inputs: the volatility coefficient `λ(t, T)` and the initial curve `f0(T)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Scalar building block for separable volatility terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFn {
    Constant(f64),
    /// `intercept + slope·x`
    Affine { intercept: f64, slope: f64 },
    /// `scale·exp(rate·x)`
    Exp { scale: f64, rate: f64 },
}

impl ScalarFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ScalarFn::Constant(c) => c,
            ScalarFn::Affine { intercept, slope } => intercept + slope * x,
            ScalarFn::Exp { scale, rate } => scale * (rate * x).exp(),
        }
    }
}

/// Volatility coefficient `λ(t, T)`, deterministic and positive on the triangle.
#[derive(Clone)]
pub enum VolatilitySurface {
    Constant(f64),
    /// `Σ a_n(t)·b_n(T)`; stored as `(a_n, b_n)` pairs.
    Separable(Vec<(ScalarFn, ScalarFn)>),
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for VolatilitySurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolatilitySurface::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            VolatilitySurface::Separable(terms) => f.debug_tuple("Separable").field(terms).finish(),
            VolatilitySurface::Custom(_) => f.write_str("Custom(<fn>)"),
        }
    }
}

/// Sampling resolution (per axis) for bounds of non-constant surfaces.
const BOUND_SAMPLES: usize = 200;

impl VolatilitySurface {
    pub fn value(&self, t: f64, maturity: f64) -> f64 {
        match self {
            VolatilitySurface::Constant(c) => *c,
            VolatilitySurface::Separable(terms) => {
                terms.iter().map(|(a, b)| a.eval(t) * b.eval(maturity)).sum()
            }
            VolatilitySurface::Custom(func) => func(t, maturity),
        }
    }

    /// `(inf λ, sup λ)` over `0 <= t <= T <= t_star`; exact for constants, sampled otherwise.
    pub fn bounds(&self, t_star: f64) -> (f64, f64) {
        if let VolatilitySurface::Constant(c) = self {
            return (*c, *c);
        }
        let step = t_star / BOUND_SAMPLES as f64;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=BOUND_SAMPLES {
            for j in i..=BOUND_SAMPLES {
                let v = self.value(i as f64 * step, j as f64 * step);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// Positive lower and finite upper bound, or an error.
    pub fn checked_bounds(&self, t_star: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.bounds(t_star);
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "volatility must be positive and bounded on the triangle, found range [{lo}, {hi}]"
            )));
        }
        Ok((lo, hi))
    }

    /// Whether `λ` belongs to the separable family `Σ a_n(t) b_n(T)` with continuous factors.
    pub fn is_separable(&self) -> bool {
        !matches!(self, VolatilitySurface::Custom(_))
    }

    /// Structural note on continuity/boundedness of `∫_0^t λ(s, T) dL(s)` in `T`.
    pub fn a3_note(&self) -> String {
        match self {
            VolatilitySurface::Constant(_) => "holds: constant volatility".to_string(),
            VolatilitySurface::Separable(terms) => {
                format!("holds: separable volatility with {} continuous term(s)", terms.len())
            }
            VolatilitySurface::Custom(_) => {
                "not verified: continuity of λ alone does not imply the condition".to_string()
            }
        }
    }
}

/// Initial forward curve `f0(T)` on `[0, T*]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCurve {
    Constant(f64),
    Affine { intercept: f64, slope: f64 },
    /// Linear interpolation through `(times[k], values[k])`, flat outside the sample range.
    Samples { times: Vec<f64>, values: Vec<f64> },
}

impl InitialCurve {
    pub fn samples(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidParameter(
                "initial curve samples need equal, nonzero numbers of times and values".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("initial curve times must be strictly increasing".into()));
        }
        Ok(InitialCurve::Samples { times, values })
    }

    pub fn value(&self, maturity: f64) -> f64 {
        match self {
            InitialCurve::Constant(c) => *c,
            InitialCurve::Affine { intercept, slope } => intercept + slope * maturity,
            InitialCurve::Samples { times, values } => {
                let k = times.partition_point(|&t| t <= maturity);
                if k == 0 {
                    values[0]
                } else if k == times.len() {
                    values[k - 1]
                } else {
                    let w = (maturity - times[k - 1]) / (times[k] - times[k - 1]);
                    values[k - 1] + w * (values[k] - values[k - 1])
                }
            }
        }
    }

    /// Minimum over `[0, t_star]`. Piecewise-linear curves attain it at a knot or an endpoint.
    pub fn min_on(&self, t_star: f64) -> f64 {
        match self {
            InitialCurve::Constant(c) => *c,
            InitialCurve::Affine { .. } => self.value(0.0).min(self.value(t_star)),
            InitialCurve::Samples { times, .. } => times
                .iter()
                .copied()
                .filter(|&t| (0.0..=t_star).contains(&t))
                .chain([0.0, t_star])
                .map(|t| self.value(t))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_surface_bounds() {
        let lam = VolatilitySurface::Separable(vec![(
            ScalarFn::Constant(0.5),
            ScalarFn::Affine { intercept: 1.0, slope: 1.0 },
        )]);
        let (lo, hi) = lam.bounds(1.0);
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        assert!(lam.is_separable());
        assert_eq!(VolatilitySurface::Constant(0.3).bounds(2.0), (0.3, 0.3));
    }

    #[test]
    fn nonpositive_volatility_is_rejected() {
        let lam = VolatilitySurface::Separable(vec![(
            ScalarFn::Constant(1.0),
            ScalarFn::Affine { intercept: -0.1, slope: 1.0 },
        )]);
        assert!(lam.checked_bounds(1.0).is_err());
    }

    #[test]
    fn custom_surface_is_not_certified() {
        let lam = VolatilitySurface::Custom(Arc::new(|t, big_t| 1.0 + (t * big_t).sin().abs()));
        assert!(!lam.is_separable());
        assert!(lam.a3_note().starts_with("not verified"));
    }

    #[test]
    fn sampled_curve_interpolates_and_finds_minimum() {
        let f0 = InitialCurve::samples(vec![0.0, 0.5, 1.0], vec![0.03, 0.01, 0.04]).unwrap();
        assert!((f0.value(0.25) - 0.02).abs() < 1e-15);
        assert_eq!(f0.value(2.0), 0.04);
        assert_eq!(f0.min_on(1.0), 0.01);
        assert!(InitialCurve::samples(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }
}
