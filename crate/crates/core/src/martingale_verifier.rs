//! Monte Carlo check that discounted bond prices keep a constant mean.
//!
//! Each path is simulated, turned into an input field, solved, and priced:
//!
//! ```text
//! P̂(t, T) = exp(-∫_0^t f(s, s) ds - ∫_t^T f(t, u) du)
//! ```
//!
//! The test compares the sample mean of `P̂(t, T)` with `P(0, T)` at every grid time `t <= T`.
//! Constancy of the mean is a necessary condition for the martingale property, not a proof of it.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::curves::{InitialCurve, VolatilitySurface};
use crate::error::{Error, Result};
use crate::field_solver::{solve_fixed_point, volatility_on_grid, SolveStatus, SolverOptions};
use crate::grid::{ForwardField, TriangularGrid};
use crate::laplace_exponent::Exponent;
use crate::levy_model::LevyModel;
use crate::levy_path::{a_field, PathSimulator};

/// Band used for the per-node pass decision.
pub const Z_BAND: f64 = 3.0;
/// Share of nodes inside the band below which a failure is called structural.
pub const STRUCTURAL_SHARE: f64 = 0.95;

/// `max |∫_t^T α(t, u) du - J(∫_t^T σ(t, u) du)|` over the nodes, with
/// `σ = λ f` and `α(t, u) = J'(∫_t^u σ) σ(t, u)`.
pub fn drift_consistency(field: &ForwardField, lam: &VolatilitySurface, exponent: &dyn Exponent) -> f64 {
    let grid = *field.grid();
    let dt = grid.step();
    let lam = volatility_on_grid(lam, &grid);
    (0..=grid.n())
        .into_par_iter()
        .map(|i| {
            let sigma: Vec<f64> = field.row(i).iter().zip(lam.row(i)).map(|(f, l)| f * l).collect();
            let mut s_int = 0.0;
            let mut a_int = 0.0;
            let mut prev_alpha = exponent.jprime(0.0) * sigma[0];
            let mut worst = (a_int - exponent.j(s_int)).abs();
            for k in 1..sigma.len() {
                s_int += 0.5 * dt * (sigma[k - 1] + sigma[k]);
                let alpha = exponent.jprime(s_int) * sigma[k];
                a_int += 0.5 * dt * (prev_alpha + alpha);
                prev_alpha = alpha;
                worst = worst.max((a_int - exponent.j(s_int)).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

fn checked(field: &ForwardField, i: usize, j: usize) -> Result<f64> {
    let v = field.get(i, j);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InfiniteNode { i, j })
    }
}

fn log_bond_nodes(field: &ForwardField, i: usize, j: usize) -> Result<f64> {
    let dt = field.grid().step();
    let mut acc = 0.0;
    for k in i..j {
        acc += 0.5 * dt * (checked(field, i, k)? + checked(field, i, k + 1)?);
    }
    Ok(-acc)
}

fn log_discount_nodes(field: &ForwardField, i: usize) -> Result<f64> {
    let dt = field.grid().step();
    let mut acc = 0.0;
    for k in 0..i {
        acc += 0.5 * dt * (checked(field, k, k)? + checked(field, k + 1, k + 1)?);
    }
    Ok(-acc)
}

fn nodes_of(field: &ForwardField, t: f64, maturity: f64) -> Result<(usize, usize)> {
    let grid = field.grid();
    let i = grid.node_of_time(t)?;
    let j = grid.node_of_time(maturity)?;
    if i > j {
        return Err(Error::InvalidParameter(format!("bond price needs t <= T, got t = {t}, T = {maturity}")));
    }
    Ok((i, j))
}

/// `P(t, T) = exp(-∫_t^T f(t, u) du)` at grid times.
pub fn bond_price(field: &ForwardField, t: f64, maturity: f64) -> Result<f64> {
    let (i, j) = nodes_of(field, t, maturity)?;
    Ok(log_bond_nodes(field, i, j)?.exp())
}

/// `P̂(t, T) = exp(-∫_0^t f(s, s) ds) · P(t, T)` at grid times.
pub fn discounted_bond(field: &ForwardField, t: f64, maturity: f64) -> Result<f64> {
    let (i, j) = nodes_of(field, t, maturity)?;
    Ok((log_discount_nodes(field, i)? + log_bond_nodes(field, i, j)?).exp())
}

/// Monte Carlo settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleOptions {
    pub n_paths: usize,
    pub seed: u64,
    /// Jumps below this size are replaced by their compensator.
    pub epsilon_cut: f64,
    pub solver: SolverOptions,
}

impl Default for MartingaleOptions {
    fn default() -> Self {
        MartingaleOptions { n_paths: 10_000, seed: 1, epsilon_cut: 1e-3, solver: SolverOptions::default() }
    }
}

/// Statistics at one `(t, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleRow {
    pub t: f64,
    pub maturity: f64,
    pub mean: f64,
    pub se: f64,
    /// `P(0, T)` from the initial curve.
    pub target: f64,
    pub z: f64,
}

/// Sources of bias that the standard error does not capture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasDiagnostics {
    pub epsilon_cut: f64,
    /// `∫_{(0, ε)} y² ν(dy)`, the variance of the replaced small jumps per unit time.
    pub truncation_variance: f64,
    pub grid_step: f64,
    /// [`drift_consistency`] on the field of the first path.
    pub drift_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleReport {
    pub maturities: Vec<f64>,
    pub rows: Vec<MartingaleRow>,
    /// All `|z| <= 3`.
    pub pass: bool,
    pub n_paths: usize,
    pub seed: u64,
    pub bias: BiasDiagnostics,
}

impl MartingaleReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }

    /// Share of rows with `|z| <= 3`.
    pub fn share_in_band(&self) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        self.rows.iter().filter(|r| r.z.abs() <= Z_BAND).count() as f64 / self.rows.len() as f64
    }

    /// Fewer than 95% of rows in band: the failure is not a few isolated nodes.
    pub fn structural_failure(&self) -> bool {
        self.share_in_band() < STRUCTURAL_SHARE
    }

    /// CSV with header `t,T,mean,se,z`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,T,mean,se,z")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.t, r.maturity, r.mean, r.se, r.z)?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} paths, seed {}, max |z| = {:.3}, {:.1}% of {} nodes in band",
            if self.pass { "PASS" } else { "FAIL" },
            self.n_paths,
            self.seed,
            self.max_abs_z(),
            100.0 * self.share_in_band(),
            self.rows.len()
        )
    }
}

/// `z = (mean - target) / se`; with `se = 0` an exact match (relative `1e-12`) counts as `0`.
pub fn z_score(mean: f64, se: f64, target: f64) -> f64 {
    let diff = mean - target;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 * target.abs() {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Runs the Monte Carlo test with the model's own exponent passed as `exponent`.
///
/// Passing a different exponent (for example a scaled one) gives a negative control.
pub fn martingale_test(
    model: &LevyModel,
    exponent: &dyn Exponent,
    lam: &VolatilitySurface,
    f0: &InitialCurve,
    grid: &TriangularGrid,
    maturities: &[f64],
    options: &MartingaleOptions,
) -> Result<MartingaleReport> {
    if options.n_paths < 2 {
        return Err(Error::InvalidParameter("the martingale test needs at least two paths".into()));
    }
    let cols: Vec<usize> = maturities.iter().map(|&m| grid.node_of_time(m)).collect::<Result<_>>()?;
    let sim = PathSimulator::new(model, grid.t_star(), options.epsilon_cut)?;
    let nodes: Vec<(usize, usize)> = cols.iter().flat_map(|&j| (0..=j).map(move |i| (i, j))).collect();

    let initial = ForwardField::from_fn(*grid, |_, j| f0.value(grid.time(j)));
    let targets: Vec<f64> = nodes.iter().map(|&(_, j)| log_bond_nodes(&initial, 0, j).map(f64::exp)).collect::<Result<_>>()?;

    let solve_path = |p: usize| -> Result<ForwardField> {
        let path = sim.simulate(options.seed, p as u64);
        let a = a_field(&path, lam, f0, grid)?;
        let out = solve_fixed_point(&a, lam, exponent, &options.solver)?;
        match out.status {
            SolveStatus::Converged { .. } => Ok(out.field),
            _ => Err(Error::PathDiverged { path: p as u64, seed: options.seed }),
        }
    };

    let samples: Vec<Vec<f64>> = (0..options.n_paths)
        .into_par_iter()
        .map(|p| {
            let field = solve_path(p)?;
            nodes
                .iter()
                .map(|&(i, j)| Ok((log_discount_nodes(&field, i)? + log_bond_nodes(&field, i, j)?).exp()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    // Welford in path order so the result does not depend on scheduling
    let mut mean = vec![0.0; nodes.len()];
    let mut m2 = vec![0.0; nodes.len()];
    for (k, sample) in samples.iter().enumerate() {
        let count = (k + 1) as f64;
        for (idx, &x) in sample.iter().enumerate() {
            let delta = x - mean[idx];
            mean[idx] += delta / count;
            m2[idx] += delta * (x - mean[idx]);
        }
    }
    let n = options.n_paths as f64;
    let rows: Vec<MartingaleRow> = nodes
        .iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let se = (m2[idx] / (n - 1.0)).max(0.0).sqrt() / n.sqrt();
            MartingaleRow {
                t: grid.time(i),
                maturity: grid.time(j),
                mean: mean[idx],
                se,
                target: targets[idx],
                z: z_score(mean[idx], se, targets[idx]),
            }
        })
        .collect();

    let first = solve_path(0)?;
    let bias = BiasDiagnostics {
        epsilon_cut: options.epsilon_cut,
        truncation_variance: sim.truncation_variance(),
        grid_step: grid.step(),
        drift_residual: drift_consistency(&first, lam, exponent),
    };
    Ok(MartingaleReport {
        maturities: cols.iter().map(|&j| grid.time(j)).collect(),
        pass: rows.iter().all(|r| r.z.abs() <= Z_BAND),
        rows,
        n_paths: options.n_paths,
        seed: options.seed,
        bias,
    })
}
