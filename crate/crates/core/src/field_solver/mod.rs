//! Monotone fixed-point construction of the forward field and the blow-up machinery.
//!
//! The solution is a fixed point of
//!
//! ```text
//! (A h)(t, T) = a(t, T) · exp( ∫_0^t J'( ∫_s^T λ(s, u) h(s, u) du ) λ(s, T) ds )
//! ```
//!
//! `A` is order-preserving, so `h_0 = 0, h_{k+1} = A h_k` increases to the minimal fixed point.
//! Both integrals are composite trapezoids over the grid nodes. Rows of the inner integral are
//! independent and are evaluated in parallel; every node value is computed by the same
//! sequence of floating-point operations regardless of scheduling.

pub mod minorant;

use std::io::{self, Write};

use rayon::prelude::*;

use crate::curves::VolatilitySurface;
use crate::error::{Error, Result};
use crate::grid::{AField, ForwardField, GridField, TriangularGrid};
use crate::laplace_exponent::Exponent;

pub use minorant::{g_at, g_field, verify_minorant_dominance, DominanceReport, MinorantParams};

/// `λ` sampled on the nodes of a grid.
pub fn volatility_on_grid(lam: &VolatilitySurface, grid: &TriangularGrid) -> GridField {
    GridField::from_fn(*grid, |i, j| lam.value(grid.time(i), grid.time(j)))
}

/// The operator `A` for one input field `a`, volatility and exponent.
pub struct OperatorA<'a> {
    a: &'a AField,
    lam: GridField,
    exponent: &'a dyn Exponent,
}

impl<'a> OperatorA<'a> {
    pub fn new(a: &'a AField, lam: &VolatilitySurface, exponent: &'a dyn Exponent) -> Self {
        let lam = volatility_on_grid(lam, a.grid());
        OperatorA { a, lam, exponent }
    }

    pub fn grid(&self) -> &TriangularGrid {
        self.a.grid()
    }

    /// `J'(∫_{t_i}^{T_j} λ h du)·λ(t_i, T_j)` for every node, rows computed in parallel.
    fn outer_integrand(&self, h: &ForwardField) -> Vec<Vec<f64>> {
        let grid = *self.grid();
        let dt = grid.step();
        (0..=grid.n())
            .into_par_iter()
            .map(|i| {
                let hs = h.row(i);
                let ls = self.lam.row(i);
                let mut inner = 0.0;
                let mut prev = ls[0] * hs[0];
                let mut out = Vec::with_capacity(hs.len());
                for k in 0..hs.len() {
                    let sigma = ls[k] * hs[k];
                    if k > 0 {
                        inner += 0.5 * dt * (prev + sigma);
                    }
                    prev = sigma;
                    let jp = self.exponent.jprime(inner);
                    let jp = if jp.is_nan() { f64::INFINITY } else { jp };
                    out.push(jp * ls[k]);
                }
                out
            })
            .collect()
    }

    pub fn apply(&self, h: &ForwardField) -> ForwardField {
        let grid = *self.grid();
        let n = grid.n();
        let dt = grid.step();
        let phi = self.outer_integrand(h);
        let mut out = GridField::zeros(grid);
        for j in 0..=n {
            let mut acc = 0.0;
            // phi[i] is stored from column i, so node (i, j) sits at phi[i][j - i]
            let mut prev = phi[0][j];
            out.set(0, j, self.a.get(0, j));
            for m in 1..=j {
                let cur = phi[m][j - m];
                acc += 0.5 * dt * (prev + cur);
                prev = cur;
                out.set(m, j, self.a.get(m, j) * acc.exp());
            }
        }
        out
    }

    /// The sequence `h0, A h0, A² h0, ...` (without `h0` itself).
    pub fn iterates(&self, h0: ForwardField) -> Iterates<'_, 'a> {
        Iterates { op: self, current: h0 }
    }
}

/// Iterator over `A^k h0`, `k >= 1`.
pub struct Iterates<'o, 'a> {
    op: &'o OperatorA<'a>,
    current: ForwardField,
}

impl Iterator for Iterates<'_, '_> {
    type Item = ForwardField;

    fn next(&mut self) -> Option<ForwardField> {
        let next = self.op.apply(&self.current);
        self.current = next.clone();
        Some(next)
    }
}

/// One application of `A` to `h`.
pub fn apply_a(h: &ForwardField, a: &AField, lam: &VolatilitySurface, exponent: &dyn Exponent) -> Result<ForwardField> {
    if h.grid() != a.grid() {
        return Err(Error::DegenerateGrid("h and a live on different grids".into()));
    }
    Ok(OperatorA::new(a, lam, exponent).apply(h))
}

/// Stopping parameters of [`solve_fixed_point`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Sup-norm change between iterates below which the iteration stops.
    pub tol: f64,
    pub max_iters: usize,
    /// A node above this value (or infinite) stops the iteration as diverged.
    pub blowup_threshold: f64,
    /// Upper end of the search for the bound constant `c`.
    pub c_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-9, max_iters: 500, blowup_threshold: 1e12, c_max: 1e30 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Converged { iterations: usize, residual: f64 },
    Diverged { node: (usize, usize), time: (f64, f64), iteration: usize },
    Stalled { iterations: usize, residual: f64 },
}

impl SolveStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, SolveStatus::Converged { .. })
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, SolveStatus::Diverged { .. })
    }
}

/// Result of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Last iterate; for `Diverged` the iterate that crossed the threshold.
    pub field: ForwardField,
    /// Previous iterate (the last one below the threshold when diverged).
    pub previous: ForwardField,
    /// Bound constant `c` with `A h <= c` whenever `h <= c`, if one exists below `c_max`.
    pub bound_c: Option<f64>,
    /// Sup-norm change of every step.
    pub residual_history: Vec<f64>,
}

impl SolveOutcome {
    /// CSV with header `iteration,residual`.
    pub fn write_residuals_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iteration,residual")?;
        for (k, r) in self.residual_history.iter().enumerate() {
            writeln!(out, "{},{}", k + 1, r)?;
        }
        Ok(())
    }
}

/// Iterates `A` from `h0 ≡ 0`.
pub fn solve_fixed_point(
    a: &AField,
    lam: &VolatilitySurface,
    exponent: &dyn Exponent,
    options: &SolverOptions,
) -> Result<SolveOutcome> {
    solve_fixed_point_from(GridField::zeros(*a.grid()), a, lam, exponent, options)
}

/// Iterates `A` from an arbitrary nonnegative starting field.
pub fn solve_fixed_point_from(
    h0: ForwardField,
    a: &AField,
    lam: &VolatilitySurface,
    exponent: &dyn Exponent,
    options: &SolverOptions,
) -> Result<SolveOutcome> {
    if h0.grid() != a.grid() {
        return Err(Error::DegenerateGrid("h0 and a live on different grids".into()));
    }
    if !(a.min() > 0.0) {
        return Err(Error::InvalidParameter("the input field a must be positive".into()));
    }
    if !(exponent.jprime(0.0).is_finite()) {
        return Err(Error::InfiniteJPrimeAtZero);
    }
    let grid = *a.grid();
    let op = OperatorA::new(a, lam, exponent);
    let lambda_bar = op.lam.max();
    let bound_c = bound_constant_c(a.max(), exponent, lambda_bar, grid.t_star(), options.c_max);

    let mut history = Vec::new();
    let mut h = h0;
    for iteration in 1..=options.max_iters {
        let next = op.apply(&h);
        if let Some((i, j)) = next.first_exceeding(options.blowup_threshold) {
            history.push(f64::INFINITY);
            return Ok(SolveOutcome {
                status: SolveStatus::Diverged { node: (i, j), time: (grid.time(i), grid.time(j)), iteration },
                field: next,
                previous: h,
                bound_c,
                residual_history: history,
            });
        }
        let residual = next.sup_distance(&h);
        history.push(residual);
        let previous = std::mem::replace(&mut h, next);
        if residual < options.tol {
            return Ok(SolveOutcome {
                status: SolveStatus::Converged { iterations: iteration, residual },
                field: h,
                previous,
                bound_c,
                residual_history: history,
            });
        }
        if iteration == options.max_iters {
            return Ok(SolveOutcome {
                status: SolveStatus::Stalled { iterations: iteration, residual },
                field: h,
                previous,
                bound_c,
                residual_history: history,
            });
        }
    }
    // max_iters == 0
    Ok(SolveOutcome {
        status: SolveStatus::Stalled { iterations: 0, residual: f64::INFINITY },
        previous: h.clone(),
        field: h,
        bound_c,
        residual_history: history,
    })
}

/// Growth factor of the geometric search for `c`.
const C_SEARCH_RATIO: f64 = 1.01;

/// Smallest `c` in `[K, c_max]` with `ln K + λ̄T*·J'(λ̄cT*) <= ln c`.
///
/// A geometric grid brackets the first admissible point, which is then refined by bisection.
pub fn bound_constant_c(k: f64, exponent: &dyn Exponent, lambda_bar: f64, t_star: f64, c_max: f64) -> Option<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return None;
    }
    let scale = lambda_bar * t_star;
    let admissible = |c: f64| {
        let jp = exponent.jprime(scale * c);
        jp.is_finite() && k.ln() + scale * jp <= c.ln()
    };
    if admissible(k) {
        return Some(k);
    }
    let mut lo = k;
    let mut hi = k * C_SEARCH_RATIO;
    while hi <= c_max {
        if admissible(hi) {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if admissible(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        lo = hi;
        hi *= C_SEARCH_RATIO;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::InitialCurve;
    use crate::laplace_exponent::{LaplaceExponent, UserExponent};
    use crate::levy_model::{LevyMeasureSpec, LevyModel};
    use crate::levy_path::{a_field, JumpPath, PathSimulator};
    use crate::quadrature::gauss_kronrod;

    fn grid(n: usize) -> TriangularGrid {
        TriangularGrid::new(n, 1.0).unwrap()
    }

    #[test]
    fn zero_exponent_returns_a() {
        let g = grid(8);
        let a = GridField::from_fn(g, |i, j| 1.0 + 0.1 * i as f64 + 0.01 * j as f64);
        let h = GridField::from_fn(g, |i, j| (i * j) as f64);
        let zero = UserExponent::constant(0.0);
        let out = apply_a(&h, &a, &VolatilitySurface::Constant(0.7), &zero).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn constant_exponent_gives_exponential_factor() {
        let g = grid(10);
        let a = GridField::constant(g, 2.0);
        let h = GridField::from_fn(g, |i, j| (i + j) as f64);
        let out = apply_a(&h, &a, &VolatilitySurface::Constant(0.5), &UserExponent::constant(1.5)).unwrap();
        for (i, j) in g.nodes() {
            let expected = 2.0 * (1.5 * 0.5 * g.time(i)).exp();
            assert!((out.get(i, j) - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn three_by_three_grid_by_hand() {
        // n = 2, Δ = 1/2, h ≡ 1, λ ≡ 1, J'(z) = z, a ≡ 1
        let g = grid(2);
        let out = apply_a(
            &GridField::constant(g, 1.0),
            &GridField::constant(g, 1.0),
            &VolatilitySurface::Constant(1.0),
            &UserExponent::linear(1.0),
        )
        .unwrap();
        // node (t=Δ, T=2Δ): inner integrals ∫_0^{2Δ} 1 = 1 at s = 0 and ∫_Δ^{2Δ} 1 = 1/2 at s = Δ
        let expected = (0.25 * (1.0 + 0.5f64)).exp();
        assert!((out.get(1, 2) - expected).abs() < 1e-15);
        // independent nested trapezoid
        let brute = |i: usize, j: usize| -> f64 {
            let d = 0.5;
            let inner = |s: usize| (j - s) as f64 * d;
            let outer: f64 = (0..i).map(|s| 0.5 * d * (inner(s) + inner(s + 1))).sum();
            outer.exp()
        };
        for (i, j) in g.nodes() {
            assert!((out.get(i, j) - brute(i, j)).abs() < 1e-15, "({i},{j})");
        }
    }

    #[test]
    fn drift_only_is_static() {
        let g = grid(40);
        let model = LevyModel::drift_only(0.8);
        let lam = VolatilitySurface::Constant(0.6);
        let f0 = InitialCurve::Affine { intercept: 0.02, slope: 0.01 };
        let a = a_field(&JumpPath::no_jumps(0.8, 1.0), &lam, &f0, &g).unwrap();
        let e = LaplaceExponent::new(model).unwrap();
        let out = solve_fixed_point(&a, &lam, &e, &SolverOptions::default()).unwrap();
        assert!(out.status.is_converged());
        for (i, j) in g.nodes() {
            assert!((out.field.get(i, j) - f0.value(g.time(j))).abs() < 1e-12);
        }
    }

    #[test]
    fn bound_constant_examples() {
        assert_eq!(bound_constant_c(3.0, &UserExponent::constant(-1.0), 1.0, 1.0, 1e30), Some(3.0));
        let m = 0.7;
        let c = bound_constant_c(3.0, &UserExponent::constant(m), 2.0, 0.5, 1e30).unwrap();
        let exact = 3.0 * (2.0f64 * 0.5 * m).exp();
        assert!(c <= exact * (1.0 + 1e-12) && c >= exact * (1.0 - 1e-9), "{c} vs {exact}");
        let cube = UserExponent::new("ln³ z", |z: f64| if z > 1.0 { z.ln().powi(3) } else { 0.0 });
        assert_eq!(bound_constant_c(1e6, &cube, 1.0, 1.0, 1e30), None);
    }

    #[test]
    fn compound_poisson_converges_below_bound() {
        let g = grid(30);
        let model = LevyModel::new(0.2, 0.0, LevyMeasureSpec::atoms(vec![0.3], vec![2.0]).unwrap()).unwrap();
        let lam = VolatilitySurface::Constant(0.5);
        let sim = PathSimulator::new(&model, 1.0, 0.01).unwrap();
        let path = sim.simulate(42, 0);
        let a = a_field(&path, &lam, &InitialCurve::Constant(0.05), &g).unwrap();
        let e = LaplaceExponent::new(model).unwrap();
        let out = solve_fixed_point(&a, &lam, &e, &SolverOptions::default()).unwrap();
        assert!(out.status.is_converged(), "{:?}", out.status);
        let c = out.bound_c.unwrap();
        assert!(out.field.max() <= c);
    }

    #[test]
    fn cube_log_exponent_diverges_near_diagonal() {
        let g = grid(100);
        let e = UserExponent::cube_log(2.0, 4.0, -2.0 * (4.0 * std::f64::consts::E.powi(2)).ln().powi(3));
        let a = GridField::constant(g, 1e6);
        let out = solve_fixed_point(&a, &VolatilitySurface::Constant(1.0), &e, &SolverOptions::default()).unwrap();
        match out.status {
            SolveStatus::Diverged { node: (i, j), .. } => assert!(j - i <= 2, "({i}, {j})"),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn trapezoid_matches_quadrature_for_smooth_input() {
        // J'(z) = z, λ ≡ 1, h ≡ 1: ∫_0^t (T - s) ds = tT - t²/2
        let g = grid(200);
        let out = apply_a(
            &GridField::constant(g, 1.0),
            &GridField::constant(g, 1.0),
            &VolatilitySurface::Constant(1.0),
            &UserExponent::linear(1.0),
        )
        .unwrap();
        let exact = gauss_kronrod(&|s: f64| 1.0 - s, 0.0, 0.5, 1e-14, 0.0, 100).value.exp();
        assert!((out.get(100, 200) - exact).abs() < 1e-12);
    }
}
