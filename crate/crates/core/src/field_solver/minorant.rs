//! Explicit minorant for the super-cube-log blow-up construction.
//!
//! On the triangle `𝒯_{x,y} = {t <= x, T <= y, t <= T}` put
//!
//! ```text
//! h(t, T) = exp(1 / (x - t + y - T)),        h(x, y) = ∞
//! R(z)    = α ln³(γ (z + e²))
//! g(t, T) = exp(-∫_0^t R(∫_s^T h(s, u) du) ds) · h(t, T),   g(x, y) = 0
//! ```
//!
//! With `λ ≡ 1` and `J' = R + β`, a solution satisfies `f = e^{∫R(∫f)} e^{βt} a`. If
//! `e^{βt} a >= g` on `𝒯_{x,y}` then the comparison argument gives `f >= h` on `𝒯_{x,y-δ}`
//! for every `δ > 0`, and `h` is unbounded near `(x, y)`.

use std::f64::consts::E;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{AField, ForwardField, GridField, TriangularGrid};
use crate::quadrature::gauss_kronrod;

const NODE_SLACK: f64 = 1e-12;

/// Parameters `(α, γ, x, y)` of the minorant on the horizon `T*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinorantParams {
    pub alpha: f64,
    pub gamma: f64,
    pub x: f64,
    pub y: f64,
    pub t_star: f64,
}

impl MinorantParams {
    /// Checks `α > 0, γ >= 1, αγ > 2, γT* > 1, 0 < x < y < min(α/2, T*), γ(y - x) > 1`.
    pub fn new(alpha: f64, gamma: f64, x: f64, y: f64, t_star: f64) -> Result<Self> {
        let fail = |what: &str| Err(Error::MinorantRegime(what.to_string()));
        if !(alpha > 0.0) {
            return fail("alpha must be positive");
        }
        if !(gamma >= 1.0) {
            return fail("gamma must be at least 1");
        }
        if !(alpha * gamma > 2.0) {
            return fail("alpha * gamma must exceed 2");
        }
        if !(gamma * t_star > 1.0) {
            return fail("gamma * T* must exceed 1");
        }
        if !(0.0 < x && x < y && y < (alpha / 2.0).min(t_star)) {
            return fail("need 0 < x < y < min(alpha/2, T*)");
        }
        if !(gamma * (y - x) > 1.0) {
            return fail("gamma * (y - x) must exceed 1");
        }
        Ok(MinorantParams { alpha, gamma, x, y, t_star })
    }

    /// The demonstration setting `T* = 1, α = 2, γ = 4, x = 0.3, y = 0.8`.
    pub fn demo() -> Self {
        MinorantParams::new(2.0, 4.0, 0.3, 0.8, 1.0).expect("demo parameters are in the regime")
    }

    /// Whether `(t, T)` lies in `𝒯_{x, y - δ}`.
    pub fn contains(&self, t: f64, maturity: f64, delta: f64) -> bool {
        t <= maturity + NODE_SLACK && t <= self.x + NODE_SLACK && maturity <= self.y - delta + NODE_SLACK
    }

    fn is_corner(&self, t: f64, maturity: f64) -> bool {
        (t - self.x).abs() <= NODE_SLACK && (maturity - self.y).abs() <= NODE_SLACK
    }

    /// `h(t, T)` on `𝒯_{x,y}`, zero elsewhere.
    pub fn h(&self, t: f64, maturity: f64) -> f64 {
        if !self.contains(t, maturity, 0.0) {
            return 0.0;
        }
        if self.is_corner(t, maturity) {
            return f64::INFINITY;
        }
        (1.0 / (self.x - t + self.y - maturity)).exp()
    }

    pub fn r(&self, z: f64) -> f64 {
        self.alpha * (self.gamma * (z + E * E)).ln().powi(3)
    }

    /// Lipschitz constant of `R` on `[0, ∞)`, attained at `z = 0`.
    pub fn lipschitz(&self) -> f64 {
        3.0 * self.alpha * (2.0 + self.gamma.ln()).powi(2) / (E * E)
    }

    /// `∫_s^T h(s, u) du`.
    pub fn inner_integral(&self, s: f64, maturity: f64) -> f64 {
        if maturity <= s {
            return 0.0;
        }
        if self.is_corner(s, maturity) {
            return f64::INFINITY;
        }
        let c = self.x - s + self.y;
        gauss_kronrod(&|u: f64| (1.0 / (c - u)).exp(), s, maturity, 1e-11, 0.0, 2_000).value
    }

    /// `ln g(t, T)`; `-∞` outside the triangle and at the corner.
    pub fn ln_g(&self, t: f64, maturity: f64) -> f64 {
        if !self.contains(t, maturity, 0.0) || self.is_corner(t, maturity) {
            return f64::NEG_INFINITY;
        }
        let damping = if t > 0.0 {
            gauss_kronrod(&|s: f64| self.r(self.inner_integral(s, maturity)), 0.0, t, 1e-10, 0.0, 500).value
        } else {
            0.0
        };
        1.0 / (self.x - t + self.y - maturity) - damping
    }
}

/// `g(t, T)` by nested adaptive quadrature.
pub fn g_at(params: &MinorantParams, t: f64, maturity: f64) -> f64 {
    params.ln_g(t, maturity).exp()
}

/// `g` on the grid by nested trapezoids over the grid nodes; zero outside `𝒯_{x,y}`.
pub fn g_field(params: &MinorantParams, grid: &TriangularGrid) -> GridField {
    let dt = grid.step();
    let h = GridField::from_fn(*grid, |i, j| params.h(grid.time(i), grid.time(j)));
    GridField::from_fn(*grid, |i, j| {
        let (t, maturity) = (grid.time(i), grid.time(j));
        if !params.contains(t, maturity, 0.0) || params.is_corner(t, maturity) {
            return 0.0;
        }
        let inner = |k: usize| -> f64 {
            let row = &h.row(k)[..=j - k];
            row.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum()
        };
        let damping: f64 = (0..i).map(|k| 0.5 * dt * (params.r(inner(k)) + params.r(inner(k + 1)))).sum();
        (1.0 / (params.x - t + params.y - maturity) - damping).exp()
    })
}

/// Outcome of [`verify_minorant_dominance`].
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    /// `e^{βt} a(t, T) >= g(t, T)` on every grid node of `𝒯_{x,y}`.
    pub hypothesis_ok: bool,
    pub hypothesis_nodes: usize,
    /// `min ln(e^{βt} a / g)` over those nodes.
    pub hypothesis_log_margin: f64,
    /// Grid nodes of `𝒯_{x,y-δ}`.
    pub nodes_checked: usize,
    /// Per field, nodes of `𝒯_{x,y-δ}` with `f >= h`.
    pub satisfied: Vec<usize>,
    /// Largest `h - f` over all fields and nodes, `0` when none.
    pub max_violation: f64,
}

impl DominanceReport {
    /// Smallest fraction of satisfied nodes over the checked fields.
    pub fn fraction(&self) -> f64 {
        if self.nodes_checked == 0 {
            return 1.0;
        }
        self.satisfied.iter().map(|&s| s as f64 / self.nodes_checked as f64).fold(1.0, f64::min)
    }

    pub fn holds(&self) -> bool {
        self.hypothesis_ok && self.fraction() == 1.0
    }
}

/// Checks the initial condition `e^{βt} a >= g` and the dominance `f >= h` on `𝒯_{x,y-δ}` for
/// each field in `fields`.
pub fn verify_minorant_dominance(
    fields: &[ForwardField],
    a: &AField,
    params: &MinorantParams,
    beta: f64,
    delta: f64,
) -> Result<DominanceReport> {
    if !(delta > 0.0 && delta < params.y - params.x) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, y - x), got {delta}")));
    }
    let grid = *a.grid();
    if fields.iter().any(|f| *f.grid() != grid) {
        return Err(Error::DegenerateGrid("fields and a live on different grids".into()));
    }
    let hyp_nodes: Vec<(usize, usize)> = grid
        .nodes()
        .filter(|&(i, j)| {
            let (t, m) = (grid.time(i), grid.time(j));
            params.contains(t, m, 0.0) && !params.is_corner(t, m)
        })
        .collect();
    let margins: Vec<f64> = hyp_nodes
        .par_iter()
        .map(|&(i, j)| {
            let t = grid.time(i);
            beta * t + a.get(i, j).ln() - params.ln_g(t, grid.time(j))
        })
        .collect();
    let hypothesis_log_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);

    let dom_nodes: Vec<(usize, usize)> =
        grid.nodes().filter(|&(i, j)| params.contains(grid.time(i), grid.time(j), delta)).collect();
    let mut satisfied = Vec::with_capacity(fields.len());
    let mut max_violation = 0.0f64;
    for f in fields {
        let mut ok = 0;
        for &(i, j) in &dom_nodes {
            let h = params.h(grid.time(i), grid.time(j));
            let v = f.get(i, j);
            if v >= h {
                ok += 1;
            } else {
                max_violation = max_violation.max(if v.is_nan() { f64::INFINITY } else { h - v });
            }
        }
        satisfied.push(ok);
    }
    Ok(DominanceReport {
        hypothesis_ok: margins.iter().all(|&m| m >= 0.0),
        hypothesis_nodes: hyp_nodes.len(),
        hypothesis_log_margin,
        nodes_checked: dom_nodes.len(),
        satisfied,
        max_violation,
    })
}

/// `g(x - ε, y - ε)` for each `ε`, approaching the corner along the diagonal direction.
pub fn corner_approach(params: &MinorantParams, epsilons: &[f64]) -> Vec<(f64, f64)> {
    epsilons.iter().map(|&e| (e, g_at(params, params.x - e, params.y - e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regime_checks() {
        assert!(MinorantParams::new(2.0, 4.0, 0.3, 0.8, 1.0).is_ok());
        assert!(matches!(MinorantParams::new(2.0, 4.0, 0.3, 0.5, 1.0), Err(Error::MinorantRegime(_))));
        assert!(MinorantParams::new(0.5, 4.0, 0.05, 0.24, 1.0).is_err());
        assert!(MinorantParams::new(2.0, 0.5, 0.3, 0.8, 1.0).is_err());
        assert!(MinorantParams::new(2.0, 4.0, 0.3, 0.8, 0.7).is_err());
    }

    #[test]
    fn h_and_g_at_corner() {
        let p = MinorantParams::demo();
        assert_eq!(p.h(0.3, 0.8), f64::INFINITY);
        assert_eq!(g_at(&p, 0.3, 0.8), 0.0);
        assert_eq!(p.h(0.4, 0.8), 0.0);
        assert!((p.h(0.0, 0.0) - (1.0f64 / 1.1).exp()).abs() < 1e-15);
    }

    #[test]
    fn inner_integral_against_substitution() {
        // ∫ exp(1/(c-u)) du with w = 1/(c-u): ∫ e^w / w² dw
        let p = MinorantParams::demo();
        let (s, m) = (0.1, 0.6);
        let c = p.x - s + p.y;
        let (w0, w1) = (1.0 / (c - s), 1.0 / (c - m));
        let alt = gauss_kronrod(&|w: f64| w.exp() / (w * w), w0, w1, 1e-13, 0.0, 500).value;
        assert!((p.inner_integral(s, m) - alt).abs() < 1e-9 * alt);
    }

    #[test]
    fn g_vanishes_towards_corner() {
        let p = MinorantParams::demo();
        let eps: Vec<f64> = (0..8).map(|k| 0.1 * 0.5f64.powi(k)).collect();
        let profile = corner_approach(&p, &eps);
        assert!(profile.last().unwrap().1 < 1e-3, "{profile:?}");
    }

    #[test]
    fn grid_g_tracks_quadrature_away_from_corner() {
        let p = MinorantParams::demo();
        let grid = TriangularGrid::new(400, 1.0).unwrap();
        let g = g_field(&p, &grid);
        let (i, j) = (40, 200);
        let exact = g_at(&p, grid.time(i), grid.time(j));
        assert!((g.get(i, j) - exact).abs() < 1e-3 * exact, "{} vs {exact}", g.get(i, j));
        assert_eq!(g.get(200, 300), 0.0);
    }

    #[test]
    fn demo_hypothesis_and_dominance() {
        let p = MinorantParams::demo();
        let grid = TriangularGrid::new(50, 1.0).unwrap();
        let a = GridField::constant(grid, 1e6);
        let beta = -p.r(0.0);
        let report = verify_minorant_dominance(std::slice::from_ref(&a), &a, &p, beta, 0.1).unwrap();
        assert!(report.hypothesis_ok, "{report:?}");
        assert!(report.holds());
        let small = GridField::constant(grid, 1.0);
        let bad = verify_minorant_dominance(std::slice::from_ref(&small), &small, &p, beta, 0.1).unwrap();
        assert!(bad.fraction() < 1.0);
    }

    proptest! {
        #[test]
        fn r_is_lipschitz(z1 in 0.0f64..1e4, z2 in 0.0f64..1e4) {
            let p = MinorantParams::demo();
            prop_assert!((p.r(z1) - p.r(z2)).abs() <= p.lipschitz() * (z1 - z2).abs() + 1e-12);
        }

        #[test]
        fn r_is_concave(zs in proptest::collection::vec(0.0f64..1e6, 2..20)) {
            let p = MinorantParams::demo();
            let mean = zs.iter().sum::<f64>() / zs.len() as f64;
            let mean_r = zs.iter().map(|&z| p.r(z)).sum::<f64>() / zs.len() as f64;
            prop_assert!(p.r(mean) >= mean_r - 1e-9 * mean_r.abs());
        }
    }
}
