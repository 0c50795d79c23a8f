//! Decides whether a bounded forward field exists.
//!
//! Rules are applied in a fixed order and the first conclusive one wins:
//!
//! 1. a Gaussian part (`q > 0`) excludes bounded solutions;
//! 2. so does any mass of `ν` on `(-1/λ̄, 0)`;
//! 3. positive jumps with `∫_0^1 y ν(dy) < ∞` (subordinator plus drift) give a bounded `J'`;
//! 4. the index `ρ` of regular variation of `U_ν` at zero: `ρ > 1` gives existence, `ρ < 1`
//!    non-existence, and `ρ = 1` gives existence when the slowly varying factor `M` tends to
//!    zero with `∫_0^1 M(x)/x dx = ∞` (density measures only);
//! 5. the growth class of `J'` at infinity.
//!
//! The index `ρ` for the truncated-stable family `y^{-1-p}` is `2 - p`.

use std::fmt;

use crate::curves::InitialCurve;
use crate::error::{Error, Result};
use crate::laplace_exponent::{growth_classify, GrowthKind, GrowthOptions, GrowthVerdict, LaplaceExponent};
use crate::levy_model::{assumption_report, LevyModel, Span};
use crate::quadrature::{least_squares_line, least_squares_slope, Moment};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Exists,
    NotExists,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Exists => "EXISTS",
            Verdict::NotExists => "NOT_EXISTS",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    GaussianPart,
    NegativeJumps,
    Subordinator,
    TauberIndex,
    Growth,
}

impl Rule {
    pub fn id(&self) -> &'static str {
        match self {
            Rule::GaussianPart => "gaussian",
            Rule::NegativeJumps => "negative-jumps",
            Rule::Subordinator => "subordinator",
            Rule::TauberIndex => "tauber",
            Rule::Growth => "growth",
        }
    }

    /// The statement the rule relies on.
    pub fn basis(&self) -> &'static str {
        match self {
            Rule::GaussianPart => "q > 0 excludes bounded solutions",
            Rule::NegativeJumps => "ν((-1/λ̄, 0)) > 0 excludes bounded solutions",
            Rule::Subordinator => "subordinator plus drift has bounded J'",
            Rule::TauberIndex => "U_ν(x) ~ x^ρ M(x): ρ > 1 exists, ρ < 1 does not; ρ = 1 needs M → 0 and ∫ M/x = ∞",
            Rule::Growth => "J' below ln z / (λ̄T*) infinitely often exists; J' above c·ln³ z does not",
        }
    }
}

/// One evaluated rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub rule: Rule,
    /// `Some` when the rule decided the verdict.
    pub outcome: Option<Verdict>,
    pub diagnostics: Vec<(String, f64)>,
    pub note: String,
}

/// Classifier outcome with per-rule evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceVerdict {
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
    pub rho_hat: Option<f64>,
    pub tauber: Option<TauberEstimate>,
    pub growth: Option<GrowthVerdict>,
}

impl ExistenceVerdict {
    pub fn deciding_rule(&self) -> Option<Rule> {
        self.evidence.iter().find(|e| e.outcome.is_some()).map(|e| e.rule)
    }
}

/// Regular-variation diagnostics of `U_ν` at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TauberEstimate {
    /// Least-squares slope of `ln U_ν(x)` against `ln x`.
    pub rho_hat: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub x_grid: Vec<f64>,
    pub u_values: Vec<f64>,
    /// `U_ν(x) / x^{ρ̂}`
    pub m_values: Vec<f64>,
    /// `U_ν(x) / x`, the slowly varying factor for `ρ = 1`.
    pub m_unit: Vec<f64>,
    /// Slope of `ln(U_ν(x)/x)` against `ln ln(1/x)`; `M ~ (ln 1/x)^{slope}`.
    pub m_log_slope: f64,
    /// `U_ν(x)/x` decreases along the grid.
    pub m_monotone: bool,
    pub m_tends_to_zero: bool,
    /// Partial integrals of `M(x)/x` from the first grid point down to each grid point.
    pub m_integral_partial: Vec<f64>,
    /// `∫_0 M(x)/x dx = ∞`, read off the fitted log-power `M ~ (ln 1/x)^{-κ}` with `κ <= 1`.
    pub m_integral_divergent: bool,
    /// `x^ε < M(x) < x^{-ε}` on the grid with `ε = 0.1`.
    pub slowly_varying: bool,
}

/// Threshold on the log-log slope of `M` for `M → 0`.
const M_SLOPE_THRESHOLD: f64 = 0.05;
const SLOW_VARIATION_EPS: f64 = 0.1;

/// `count_per_decade` log-spaced points from `hi` down to `lo`.
pub fn log_grid(hi: f64, lo: f64, count_per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * count_per_decade as f64).round() as usize;
    (0..=n).map(|k| hi * 10f64.powf(-decades * k as f64 / n as f64)).collect()
}

/// Fits the index of regular variation of `U_ν` at zero on a decreasing grid.
pub fn estimate_rho(model: &LevyModel, x_grid: &[f64]) -> Result<TauberEstimate> {
    if x_grid.len() < 4 {
        return Err(Error::DegenerateGrid(format!("{} points; at least 4 are needed", x_grid.len())));
    }
    if x_grid.windows(2).any(|w| !(w[1] < w[0])) || !(x_grid[x_grid.len() - 1] > 0.0) || x_grid[0] > 1.0 {
        return Err(Error::DegenerateGrid("the x-grid must decrease inside (0, 1]".into()));
    }
    if (x_grid[0] / x_grid[x_grid.len() - 1]).log10() < 2.0 {
        return Err(Error::DegenerateGrid("the x-grid must span at least two decades".into()));
    }
    let support = model.measure.support();
    if support.lower < 0.0 {
        return Err(Error::InvalidParameter("the index estimate needs support in [0, inf)".into()));
    }
    let u_values: Vec<f64> = x_grid.iter().map(|&x| model.u_nu(x)).collect();
    if u_values.iter().any(|u| !(*u > 0.0) || !u.is_finite()) {
        return Err(Error::InvalidParameter("U_ν vanishes or is infinite on the x-grid".into()));
    }
    let ln_x: Vec<f64> = x_grid.iter().map(|x| x.ln()).collect();
    let ln_u: Vec<f64> = u_values.iter().map(|u| u.ln()).collect();
    let (rho_hat, intercept) = least_squares_line(&ln_x, &ln_u);
    let residual = (ln_x
        .iter()
        .zip(&ln_u)
        .map(|(x, u)| (u - rho_hat * x - intercept).powi(2))
        .sum::<f64>()
        / ln_x.len() as f64)
        .sqrt();
    let m_values: Vec<f64> = x_grid.iter().zip(&u_values).map(|(x, u)| u / x.powf(rho_hat)).collect();
    let m_unit: Vec<f64> = x_grid.iter().zip(&u_values).map(|(x, u)| u / x).collect();

    let lnln: Vec<f64> = x_grid.iter().map(|x| (-x.ln()).ln()).collect();
    let ln_m: Vec<f64> = m_unit.iter().map(|m| m.ln()).collect();
    let m_log_slope = least_squares_slope(&lnln, &ln_m);
    let m_monotone = m_unit.windows(2).all(|w| w[1] <= w[0]);
    let m_tends_to_zero = m_monotone && m_log_slope < -M_SLOPE_THRESHOLD;

    // ∫ M(x)/x dx = ∫ M d(-ln x): trapezoid in ln x
    let mut m_integral_partial = Vec::with_capacity(x_grid.len());
    let mut acc = 0.0;
    m_integral_partial.push(0.0);
    for k in 1..x_grid.len() {
        acc += 0.5 * (m_unit[k] + m_unit[k - 1]) * (ln_x[k - 1] - ln_x[k]);
        m_integral_partial.push(acc);
    }
    let m_integral_divergent = -m_log_slope <= 1.0;

    let slowly_varying = x_grid
        .iter()
        .zip(&m_values)
        .all(|(x, m)| x.powf(SLOW_VARIATION_EPS) < *m && *m < x.powf(-SLOW_VARIATION_EPS));

    Ok(TauberEstimate {
        rho_hat,
        intercept,
        residual,
        x_grid: x_grid.to_vec(),
        u_values,
        m_values,
        m_unit,
        m_log_slope,
        m_monotone,
        m_tends_to_zero,
        m_integral_partial,
        m_integral_divergent,
        slowly_varying,
    })
}

/// Options of [`classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierOptions {
    /// Half-width of the band around `ρ = 1` where the index alone does not decide.
    pub margin: f64,
    /// Decreasing x-grid for the index fit.
    pub x_grid: Vec<f64>,
    pub growth: GrowthOptions,
}

impl Default for ClassifierOptions {
    fn default() -> Self {
        ClassifierOptions { margin: 0.05, x_grid: log_grid(1e-4, 1e-80, 2), growth: GrowthOptions::default() }
    }
}

fn record(rule: Rule, outcome: Option<Verdict>, diagnostics: Vec<(&str, f64)>, note: impl Into<String>) -> Evidence {
    Evidence {
        rule,
        outcome,
        diagnostics: diagnostics.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        note: note.into(),
    }
}

/// Classifies the existence of a bounded solution.
///
/// Fails with [`Error::Assumptions`] when the support or moment conditions do not hold.
pub fn classify(
    model: &LevyModel,
    lambda_bounds: (f64, f64),
    t_star: f64,
    options: &ClassifierOptions,
) -> Result<ExistenceVerdict> {
    let (lambda_lo, lambda_bar) = lambda_bounds;
    if !(lambda_lo > 0.0) || !(lambda_bar >= lambda_lo) || !lambda_bar.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "volatility bounds must satisfy 0 < λ_lo <= λ_bar < inf, got ({lambda_lo}, {lambda_bar})"
        )));
    }
    if !(t_star > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon T* must be positive, got {t_star}")));
    }
    let report = assumption_report(model, lambda_bar, &InitialCurve::Constant(1.0), t_star, "not assessed".into());
    if !report.a2_ok || !report.a4_ok {
        return Err(Error::Assumptions(Box::new(report)));
    }

    let mut out = ExistenceVerdict {
        verdict: Verdict::Inconclusive,
        evidence: Vec::new(),
        rho_hat: None,
        tauber: None,
        growth: None,
    };
    let decide = |out: &mut ExistenceVerdict, ev: Evidence| -> bool {
        let done = ev.outcome.is_some();
        if let Some(v) = ev.outcome {
            out.verdict = v;
        }
        out.evidence.push(ev);
        done
    };

    // 1
    let q = model.gaussian_q;
    let outcome = (q > 0.0).then_some(Verdict::NotExists);
    if decide(&mut out, record(Rule::GaussianPart, outcome, vec![("q", q)], "")) {
        return Ok(out);
    }

    // 2
    let neg = model.measure.integrate_kernel(|_| 1.0, Span::open(-1.0 / lambda_bar, 0.0));
    let neg_value = neg.value();
    let outcome = (neg_value > 0.0).then_some(Verdict::NotExists);
    if decide(&mut out, record(Rule::NegativeJumps, outcome, vec![("negative_mass", neg_value)], "")) {
        return Ok(out);
    }

    // 3
    let support = model.measure.support();
    let small_first = model.moment_integrals().small_first;
    let subordinator = support.lower >= 0.0 && small_first.is_finite();
    let outcome = subordinator.then_some(Verdict::Exists);
    let diag = vec![("support_lower", support.lower), ("small_first", small_first.value())];
    if decide(&mut out, record(Rule::Subordinator, outcome, diag, "")) {
        return Ok(out);
    }

    // 4
    let ev = match estimate_rho(model, &options.x_grid) {
        Ok(est) => {
            let rho = est.rho_hat;
            out.rho_hat = Some(rho);
            let mut note = String::new();
            let outcome = if rho > 1.0 + options.margin {
                Some(Verdict::Exists)
            } else if rho < 1.0 - options.margin {
                Some(Verdict::NotExists)
            } else if !model.measure.has_density() {
                note = "index near 1 and the measure has no density".into();
                None
            } else if est.m_tends_to_zero && est.m_integral_divergent {
                Some(Verdict::Exists)
            } else {
                note = format!(
                    "index near 1: M → 0 is {}, ∫ M/x = ∞ is {}",
                    est.m_tends_to_zero, est.m_integral_divergent
                );
                None
            };
            let diag = vec![
                ("rho_hat", rho),
                ("fit_residual", est.residual),
                ("m_log_slope", est.m_log_slope),
                ("m_tends_to_zero", f64::from(u8::from(est.m_tends_to_zero))),
                ("m_integral_divergent", f64::from(u8::from(est.m_integral_divergent))),
            ];
            out.tauber = Some(est);
            record(Rule::TauberIndex, outcome, diag, note)
        }
        Err(e) => record(Rule::TauberIndex, None, vec![], format!("not applicable: {e}")),
    };
    if decide(&mut out, ev) {
        return Ok(out);
    }

    // 5
    let exponent = LaplaceExponent::new(model.clone())?;
    let growth = growth_classify(&exponent, lambda_bar, t_star, &options.growth);
    let outcome = match growth.kind {
        GrowthKind::SubLog => Some(Verdict::Exists),
        GrowthKind::SuperCubeLog => Some(Verdict::NotExists),
        GrowthKind::Inconclusive => None,
    };
    let last = growth.z.len() - 1;
    let diag = vec![
        ("z_max", growth.z[last]),
        ("log_gap_at_z_max", growth.log_gap[last]),
        ("cube_ratio_at_z_max", growth.cube_ratio[last]),
    ];
    let ev = record(Rule::Growth, outcome, diag, format!("{}: {}", growth.kind, growth.reason));
    out.growth = Some(growth);
    decide(&mut out, ev);
    Ok(out)
}

/// `∫_0^1 y ν(dy)`; for density measures with `ρ = 1` its finiteness is equivalent to
/// `∫_0^1 M(x)/x dx < ∞`.
pub fn small_jump_first_moment(model: &LevyModel) -> Moment {
    model.moment_integrals().small_first
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::LevyMeasureSpec;

    fn ts(p: f64) -> LevyModel {
        LevyModel::new(0.0, 0.0, LevyMeasureSpec::truncated_stable(p).unwrap()).unwrap()
    }

    #[test]
    fn gaussian_part_wins() {
        let m = LevyModel::new(0.0, 0.5, LevyMeasureSpec::truncated_stable(0.5).unwrap()).unwrap();
        let v = classify(&m, (1.0, 1.0), 1.0, &ClassifierOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::NotExists);
        assert_eq!(v.deciding_rule(), Some(Rule::GaussianPart));
        assert_eq!(v.evidence.len(), 1);
    }

    #[test]
    fn negative_jumps_exclude() {
        let m = LevyModel::new(0.0, 0.0, LevyMeasureSpec::uniform(1.0, -0.5, 0.5).unwrap()).unwrap();
        let v = classify(&m, (1.0, 1.0), 1.0, &ClassifierOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::NotExists);
        assert_eq!(v.deciding_rule(), Some(Rule::NegativeJumps));
    }

    #[test]
    fn assumptions_abort() {
        let m = LevyModel::new(0.0, 0.0, LevyMeasureSpec::uniform(1.0, -2.0, 0.5).unwrap()).unwrap();
        assert!(matches!(
            classify(&m, (1.0, 1.0), 1.0, &ClassifierOptions::default()),
            Err(Error::Assumptions(_))
        ));
    }

    #[test]
    fn truncated_stable_table() {
        let opts = ClassifierOptions::default();
        assert_eq!(classify(&ts(0.5), (1.0, 1.0), 1.0, &opts).unwrap().verdict, Verdict::Exists);
        let v = classify(&ts(1.5), (1.0, 1.0), 1.0, &opts).unwrap();
        assert_eq!(v.verdict, Verdict::NotExists);
        assert_eq!(v.deciding_rule(), Some(Rule::TauberIndex));
        let v = classify(&ts(1.0), (1.0, 1.0), 0.5, &opts).unwrap();
        assert_eq!(v.verdict, Verdict::Exists);
        assert_eq!(v.deciding_rule(), Some(Rule::Growth));
        assert!(!v.tauber.as_ref().unwrap().m_tends_to_zero);
        let v = classify(&ts(1.0), (1.0, 1.0), 1.0, &opts).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn log_modified_without_first_moment_exists_through_tauber() {
        let m = LevyModel::new(0.0, 0.0, LevyMeasureSpec::log_modified(0.5).unwrap()).unwrap();
        let v = classify(&m, (1.0, 1.0), 1.0, &ClassifierOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Exists);
        assert_eq!(v.deciding_rule(), Some(Rule::TauberIndex));
    }

    #[test]
    fn rho_for_truncated_stable() {
        let est = estimate_rho(&ts(0.5), &log_grid(1e-1, 1e-6, 4)).unwrap();
        assert!((est.rho_hat - 1.5).abs() < 0.01);
        assert!(est.residual < 1e-10);
    }

    #[test]
    fn rho_for_log_power_density() {
        let m = LevyModel::new(0.0, 0.0, LevyMeasureSpec::log_power_density(2.0).unwrap()).unwrap();
        let est = estimate_rho(&m, &ClassifierOptions::default().x_grid).unwrap();
        assert!((est.rho_hat - 1.0).abs() < 0.05, "{}", est.rho_hat);
        assert!(est.m_tends_to_zero);
        assert!((est.m_log_slope + 2.0).abs() < 1e-9);
        assert!(!est.m_integral_divergent);
    }

    #[test]
    fn degenerate_grids_rejected() {
        assert!(estimate_rho(&ts(0.5), &[0.1, 0.01, 0.001]).is_err());
        assert!(estimate_rho(&ts(0.5), &[0.1, 0.09, 0.08, 0.07]).is_err());
        assert!(estimate_rho(&LevyModel::drift_only(0.0), &log_grid(1e-1, 1e-6, 2)).is_err());
    }
}
