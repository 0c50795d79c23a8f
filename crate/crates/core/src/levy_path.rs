//! Simulation of the driving noise and of the input field `a(t, T)`.
//!
//! Under the existence regime the noise has no Gaussian part and only positive jumps. Jumps
//! of size at least `ε` form a compound Poisson process with intensity `Λ(ε) = ν([ε, ∞))`.
//! The jumps below `ε` are dropped together with their compensator, so the truncated path is
//!
//! ```text
//! L_ε(t) = (a - ∫_{[ε,1)} y ν(dy))·t + Σ_{s <= t, ΔL(s) >= ε} ΔL(s)
//! ```
//!
//! which differs from `L` by a martingale with variance `t·∫_0^ε y² ν(dy)`.
//!
//! Each path draws from `ChaCha8Rng::seed_from_u64(seed)` switched to stream `path_index`, so
//! results do not depend on which thread simulates which path.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::curves::{InitialCurve, VolatilitySurface};
use crate::error::{Error, Result};
use crate::grid::{AField, GridField, TriangularGrid};
use crate::levy_model::{LevyMeasureSpec, LevyModel, Span};
use crate::quadrature::cumulative_trapezoid;

/// One simulated trajectory of the ε-truncated noise on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    pub horizon: f64,
    /// Drift of the model, `a`.
    pub drift: f64,
    pub jump_times: Vec<f64>,
    pub jump_sizes: Vec<f64>,
    pub small_jump_cutoff: f64,
    /// Added to `drift` per unit time: `-∫_{[ε,1)} y ν(dy)`.
    pub compensator_adjustment: f64,
    /// `∫_0^ε y² ν(dy)`, variance per unit time of what the truncation drops.
    pub truncation_variance: f64,
    pub seed: u64,
    pub path_index: u64,
}

impl JumpPath {
    /// Deterministic path `L(t) = drift·t`.
    pub fn no_jumps(drift: f64, horizon: f64) -> Self {
        JumpPath {
            horizon,
            drift,
            jump_times: Vec::new(),
            jump_sizes: Vec::new(),
            small_jump_cutoff: 0.0,
            compensator_adjustment: 0.0,
            truncation_variance: 0.0,
            seed: 0,
            path_index: 0,
        }
    }

    /// A path with prescribed jumps and no compensation, e.g. for hand-built fixtures.
    pub fn from_jumps(drift: f64, horizon: f64, times: Vec<f64>, sizes: Vec<f64>) -> Result<Self> {
        if times.len() != sizes.len() {
            return Err(Error::InvalidParameter("one size per jump time is required".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) || times.iter().any(|t| !(*t > 0.0 && *t <= horizon)) {
            return Err(Error::InvalidParameter("jump times must increase strictly inside (0, horizon]".into()));
        }
        let mut path = JumpPath::no_jumps(drift, horizon);
        path.jump_times = times;
        path.jump_sizes = sizes;
        Ok(path)
    }

    /// Drift actually applied between jumps.
    pub fn effective_drift(&self) -> f64 {
        self.drift + self.compensator_adjustment
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    /// `L_ε(t)`.
    pub fn value_at(&self, t: f64) -> f64 {
        let jumps: f64 = self
            .jump_times
            .iter()
            .zip(&self.jump_sizes)
            .take_while(|(s, _)| **s <= t)
            .map(|(_, y)| y)
            .sum();
        self.effective_drift() * t + jumps
    }

    /// CSV with header `time,size`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "time,size")?;
        for (t, y) in self.jump_times.iter().zip(&self.jump_sizes) {
            writeln!(out, "{t},{y}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum SizeLaw {
    None,
    TruncatedStable { p: f64, eps: f64 },
    Uniform { lo: f64, hi: f64 },
    Atoms { points: Vec<f64>, cumulative: Vec<f64> },
    /// Cumulative masses on a log grid of sizes, interpolated linearly in `ln y`.
    Table { sizes: Vec<f64>, cumulative: Vec<f64> },
}

/// Cells per decade of the tabulated size law.
const TABLE_CELLS_PER_DECADE: usize = 64;

impl SizeLaw {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self {
            SizeLaw::None => unreachable!("no jumps to draw"),
            SizeLaw::TruncatedStable { p, eps } => {
                let top = eps.powf(-p);
                (top - u * (top - 1.0)).powf(-1.0 / p)
            }
            SizeLaw::Uniform { lo, hi } => lo + u * (hi - lo),
            SizeLaw::Atoms { points, cumulative } => {
                let target = u * cumulative[cumulative.len() - 1];
                let k = cumulative.partition_point(|c| *c <= target).min(points.len() - 1);
                points[k]
            }
            SizeLaw::Table { sizes, cumulative } => {
                let target = u * cumulative[cumulative.len() - 1];
                let k = cumulative.partition_point(|c| *c <= target).clamp(1, cumulative.len() - 1);
                let (c0, c1) = (cumulative[k - 1], cumulative[k]);
                let w = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
                (sizes[k - 1].ln() + w * (sizes[k].ln() - sizes[k - 1].ln())).exp()
            }
        }
    }
}

/// Precomputed intensity, compensator and size law for a model and cutoff.
#[derive(Debug, Clone)]
pub struct PathSimulator {
    model: LevyModel,
    horizon: f64,
    epsilon: f64,
    intensity: f64,
    compensator_adjustment: f64,
    truncation_variance: f64,
    law: SizeLaw,
}

impl PathSimulator {
    /// Rejects Gaussian parts, negative jumps, `ε <= 0` and an infinite jump intensity.
    pub fn new(model: &LevyModel, horizon: f64, epsilon: f64) -> Result<Self> {
        if model.gaussian_q > 0.0 {
            return Err(Error::OutsideExistenceRegime(format!(
                "q = {} > 0 has no bounded solution; run the classifier first",
                model.gaussian_q
            )));
        }
        let support = model.measure.support();
        if support.lower < 0.0 && !model.measure.is_zero() {
            return Err(Error::OutsideExistenceRegime(
                "negative jumps have no bounded solution; run the classifier first".into(),
            ));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("the small-jump cutoff must be positive, got {epsilon}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("horizon must be positive and finite, got {horizon}")));
        }
        let intensity = model.measure.mass_above(epsilon).finite().ok_or_else(|| {
            Error::NotLevyMeasure(format!("ν([{epsilon}, ∞)) is infinite"))
        })?;
        if model.measure.integrate_kernel(|y| y, Span::POS_LARGE).finite().is_none() {
            return Err(Error::InfiniteJPrimeAtZero);
        }
        let compensated = if epsilon < 1.0 {
            model.measure.first_moment_between(epsilon, 1.0).value()
        } else {
            0.0
        };
        let truncation_variance = model.measure.integrate_kernel(|y| y * y, Span::open(0.0, epsilon)).value();
        let law = if intensity == 0.0 { SizeLaw::None } else { size_law(&model.measure, epsilon)? };
        Ok(PathSimulator {
            model: model.clone(),
            horizon,
            epsilon,
            intensity,
            compensator_adjustment: -compensated,
            truncation_variance,
            law,
        })
    }

    /// `Λ(ε) = ν([ε, ∞))`
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `∫_{(0, ε)} y² ν(dy)`
    pub fn truncation_variance(&self) -> f64 {
        self.truncation_variance.abs()
    }

    pub fn simulate(&self, seed: u64, path_index: u64) -> JumpPath {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        let mut jump_times = Vec::new();
        let mut jump_sizes = Vec::new();
        if self.intensity > 0.0 {
            let wait = Exp::new(self.intensity).expect("positive finite intensity");
            let mut t = 0.0;
            loop {
                t += wait.sample(&mut rng);
                if t > self.horizon {
                    break;
                }
                jump_times.push(t);
                jump_sizes.push(self.law.sample(&mut rng));
            }
        }
        JumpPath {
            horizon: self.horizon,
            drift: self.model.drift,
            jump_times,
            jump_sizes,
            small_jump_cutoff: self.epsilon,
            compensator_adjustment: self.compensator_adjustment,
            truncation_variance: self.truncation_variance,
            seed,
            path_index,
        }
    }

    /// The path truncated at a larger cutoff, coupled to `path` by dropping its jumps below
    /// `coarse_eps` and recompensating.
    pub fn coarsen(&self, path: &JumpPath, coarse_eps: f64) -> Result<JumpPath> {
        if !(coarse_eps >= path.small_jump_cutoff) {
            return Err(Error::InvalidParameter(format!(
                "coarser cutoff {coarse_eps} is below the path cutoff {}",
                path.small_jump_cutoff
            )));
        }
        let coarse = PathSimulator::new(&self.model, self.horizon, coarse_eps)?;
        let (times, sizes): (Vec<f64>, Vec<f64>) = path
            .jump_times
            .iter()
            .zip(&path.jump_sizes)
            .filter(|(_, y)| **y >= coarse_eps)
            .map(|(t, y)| (*t, *y))
            .unzip();
        Ok(JumpPath {
            jump_times: times,
            jump_sizes: sizes,
            small_jump_cutoff: coarse_eps,
            compensator_adjustment: coarse.compensator_adjustment,
            truncation_variance: coarse.truncation_variance,
            ..path.clone()
        })
    }
}

fn size_law(measure: &LevyMeasureSpec, eps: f64) -> Result<SizeLaw> {
    Ok(match measure {
        LevyMeasureSpec::TruncatedStable { p } => SizeLaw::TruncatedStable { p: *p, eps },
        LevyMeasureSpec::UniformDensity { lower, upper, .. } => SizeLaw::Uniform { lo: lower.max(eps), hi: *upper },
        LevyMeasureSpec::FiniteAtoms { points, masses } => {
            let mut chosen: Vec<(f64, f64)> = points
                .iter()
                .zip(masses)
                .filter(|(y, m)| **y >= eps && **m > 0.0)
                .map(|(y, m)| (*y, *m))
                .collect();
            chosen.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut acc = 0.0;
            let cumulative = chosen
                .iter()
                .map(|(_, m)| {
                    acc += m;
                    acc
                })
                .collect();
            SizeLaw::Atoms { points: chosen.into_iter().map(|(y, _)| y).collect(), cumulative }
        }
        _ => {
            let support = measure.support();
            let lo = eps.max(support.lower);
            let total = measure.mass_above(lo).value();
            let hi = if support.upper.is_finite() {
                support.upper
            } else {
                // push the table end out until the remaining mass is negligible
                let mut hi = lo.max(1.0) * 10.0;
                while measure.mass_above(hi).value() > 1e-12 * total {
                    hi *= 10.0;
                    if hi > 1e100 {
                        return Err(Error::NotLevyMeasure("jump-size tail too heavy to tabulate".into()));
                    }
                }
                hi
            };
            let cells = (((hi / lo).log10() * TABLE_CELLS_PER_DECADE as f64).ceil() as usize).max(16);
            let sizes: Vec<f64> = (0..=cells).map(|k| lo * (hi / lo).powf(k as f64 / cells as f64)).collect();
            let mut cumulative = vec![0.0];
            let mut acc = 0.0;
            for w in sizes.windows(2) {
                acc += measure.integrate_kernel(|_| 1.0, Span::right_open(w[0], w[1])).value();
                cumulative.push(acc);
            }
            SizeLaw::Table { sizes, cumulative }
        }
    })
}

/// Simulates path `0` of `seed`; see [`PathSimulator`] for batches.
pub fn simulate_path(model: &LevyModel, horizon: f64, seed: u64, epsilon_cut: f64) -> Result<JumpPath> {
    Ok(PathSimulator::new(model, horizon, epsilon_cut)?.simulate(seed, 0))
}

/// `a(t_i, T_j) = f0(T_j)·exp(b_ε ∫_0^{t_i} λ(s, T_j) ds + Σ_{s_k <= t_i} ln(1 + λ(s_k, T_j) Y_k))`.
///
/// Jump times are used exactly; the drift integral is a trapezoid over the grid.
pub fn a_field(path: &JumpPath, lam: &VolatilitySurface, f0: &InitialCurve, grid: &TriangularGrid) -> Result<AField> {
    let n = grid.n();
    let dt = grid.step();
    let b = path.effective_drift();
    let mut field = GridField::zeros(*grid);
    for j in 0..=n {
        let maturity = grid.time(j);
        let column: Vec<f64> = (0..=j).map(|i| lam.value(grid.time(i), maturity)).collect();
        let drift_part = cumulative_trapezoid(&column, dt);
        let log_f0 = f0.value(maturity).ln();
        let mut jump_log = 0.0;
        let mut k = 0;
        for i in 0..=j {
            let t = grid.time(i);
            while k < path.jump_times.len() && path.jump_times[k] <= t {
                let s = path.jump_times[k];
                let y = path.jump_sizes[k];
                let factor = 1.0 + lam.value(s, maturity) * y;
                if !(factor > 0.0) {
                    return Err(Error::NonPositiveJumpFactor { time: s, size: y, factor });
                }
                jump_log += factor.ln();
                k += 1;
            }
            field.set(i, j, (log_f0 + b * drift_part[i] + jump_log).exp());
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TriangularGrid {
        TriangularGrid::new(n, 1.0).unwrap()
    }

    #[test]
    fn drift_only_path_and_field() {
        let model = LevyModel::drift_only(0.3);
        let path = simulate_path(&model, 1.0, 7, 0.01).unwrap();
        assert_eq!(path.jump_count(), 0);
        assert!((path.value_at(0.5) - 0.15).abs() < 1e-15);
        let lam = VolatilitySurface::Constant(2.0);
        let a = a_field(&path, &lam, &InitialCurve::Constant(0.04), &grid(10)).unwrap();
        for (i, j) in grid(10).nodes() {
            let t = grid(10).time(i);
            let expected = 0.04 * (2.0 * 0.3 * t).exp();
            assert!((a.get(i, j) - expected).abs() <= 1e-14 * expected);
        }
    }

    #[test]
    fn single_jump_field() {
        let path = JumpPath::from_jumps(0.0, 1.0, vec![0.4], vec![0.5]).unwrap();
        let g = grid(10);
        let a = a_field(&path, &VolatilitySurface::Constant(1.0), &InitialCurve::Constant(1.0), &g).unwrap();
        for (i, j) in g.nodes() {
            let expected = if g.time(i) < 0.4 - 1e-12 { 1.0 } else { 1.5 };
            assert!((a.get(i, j) - expected).abs() < 1e-14, "({i},{j})");
        }
    }

    #[test]
    fn two_jump_product() {
        let path = JumpPath::from_jumps(0.0, 1.0, vec![0.25, 0.55], vec![0.2, 0.3]).unwrap();
        let g = grid(20);
        let a = a_field(&path, &VolatilitySurface::Constant(2.0), &InitialCurve::Constant(1.0), &g).unwrap();
        assert!((a.get(12, 20) - 2.24).abs() < 1e-14);
        assert!((a.get(6, 20) - 1.4).abs() < 1e-14);
    }

    #[test]
    fn non_positive_factor_aborts() {
        let path = JumpPath::from_jumps(0.0, 1.0, vec![0.5], vec![-0.6]).unwrap();
        let r = a_field(&path, &VolatilitySurface::Constant(2.0), &InitialCurve::Constant(1.0), &grid(4));
        assert!(matches!(r, Err(Error::NonPositiveJumpFactor { .. })));
    }

    #[test]
    fn truncated_stable_intensity() {
        let model = LevyModel::new(0.0, 0.0, LevyMeasureSpec::truncated_stable(0.5).unwrap()).unwrap();
        let sim = PathSimulator::new(&model, 1.0, 0.01).unwrap();
        assert!((sim.intensity() - 18.0).abs() < 1e-12);
        let path = sim.simulate(3, 0);
        assert!(path.jump_sizes.iter().all(|y| *y >= 0.01 && *y < 1.0));
        // ∫_{[0.01,1)} y^{-0.5} dy = 2(1 - 0.1)
        assert!((path.compensator_adjustment + 1.8).abs() < 1e-12);
    }

    #[test]
    fn regime_violations_rejected() {
        let gauss = LevyModel::new(0.0, 0.1, LevyMeasureSpec::zero()).unwrap();
        assert!(matches!(simulate_path(&gauss, 1.0, 1, 0.01), Err(Error::OutsideExistenceRegime(_))));
        let neg = LevyModel::new(0.0, 0.0, LevyMeasureSpec::uniform(1.0, -0.2, 0.3).unwrap()).unwrap();
        assert!(matches!(simulate_path(&neg, 1.0, 1, 0.01), Err(Error::OutsideExistenceRegime(_))));
        assert!(simulate_path(&LevyModel::drift_only(0.0), 1.0, 1, 0.0).is_err());
    }

    #[test]
    fn paths_are_reproducible_and_streams_differ() {
        let model = LevyModel::new(0.1, 0.0, LevyMeasureSpec::atoms(vec![0.3], vec![2.0]).unwrap()).unwrap();
        let sim = PathSimulator::new(&model, 1.0, 0.01).unwrap();
        assert_eq!(sim.simulate(11, 4), sim.simulate(11, 4));
        let distinct = (0..20).map(|k| sim.simulate(11, k).jump_times).collect::<Vec<_>>();
        assert!(distinct.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn tabulated_sizes_follow_the_measure() {
        let model = LevyModel::new(0.0, 0.0, LevyMeasureSpec::log_modified(2.0).unwrap()).unwrap();
        let sim = PathSimulator::new(&model, 50.0, 0.05).unwrap();
        let sizes: Vec<f64> = (0..40).flat_map(|k| sim.simulate(5, k).jump_sizes).collect();
        // fraction of jumps above 0.2 against the exact ratio of masses
        let above = sizes.iter().filter(|y| **y >= 0.2).count() as f64 / sizes.len() as f64;
        let m = &model.measure;
        let expected = m.mass_above(0.2).value() / m.mass_above(0.05).value();
        let se = (expected * (1.0 - expected) / sizes.len() as f64).sqrt();
        assert!((above - expected).abs() < 4.0 * se, "{above} vs {expected}");
        assert!(sizes.iter().all(|y| *y >= 0.05 && *y <= 0.5));
    }

    #[test]
    fn coarsening_keeps_large_jumps() {
        let model = LevyModel::new(0.0, 0.0, LevyMeasureSpec::truncated_stable(0.5).unwrap()).unwrap();
        let sim = PathSimulator::new(&model, 1.0, 0.01).unwrap();
        let fine = sim.simulate(9, 0);
        let coarse = sim.coarsen(&fine, 0.02).unwrap();
        assert!(coarse.jump_sizes.iter().all(|y| *y >= 0.02));
        assert_eq!(
            coarse.jump_count(),
            fine.jump_sizes.iter().filter(|y| **y >= 0.02).count()
        );
        assert!(sim.coarsen(&fine, 0.005).is_err());
    }

    #[test]
    fn csv_export() {
        let path = JumpPath::from_jumps(0.0, 1.0, vec![0.25], vec![0.5]).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time,size\n0.25,0.5\n");
    }
}
