//! Built-in example models with their known existence verdicts.

use crate::curves::VolatilitySurface;
use crate::error::Result;
use crate::existence_classifier::{classify, ClassifierOptions, ExistenceVerdict, Verdict};
use crate::levy_model::{LevyMeasureSpec, LevyModel};

/// A model, volatility and horizon with the verdict the theory predicts.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub model: LevyModel,
    pub lambda: VolatilitySurface,
    pub t_star: f64,
    pub expected: Verdict,
}

impl Fixture {
    fn new(
        name: &'static str,
        description: &'static str,
        drift: f64,
        q: f64,
        measure: LevyMeasureSpec,
        lambda: f64,
        expected: Verdict,
    ) -> Self {
        Fixture {
            name,
            description,
            model: LevyModel::new(drift, q, measure).expect("built-in fixture is valid"),
            lambda: VolatilitySurface::Constant(lambda),
            t_star: 1.0,
            expected,
        }
    }

    pub fn lambda_bounds(&self) -> (f64, f64) {
        self.lambda.bounds(self.t_star)
    }

    pub fn classify(&self, options: &ClassifierOptions) -> Result<ExistenceVerdict> {
        classify(&self.model, self.lambda_bounds(), self.t_star, options)
    }
}

/// The example table: truncated-stable `p ∈ {0.5, 1, 1.5}`, log-modified `γ ∈ {0.5, 2}`, a
/// compound-Poisson subordinator, a drift-only model, a Gaussian part and negative jumps.
pub fn examples() -> Vec<Fixture> {
    use Verdict::*;
    let ts = |p| LevyMeasureSpec::truncated_stable(p).unwrap();
    let lm = |g| LevyMeasureSpec::log_modified(g).unwrap();
    vec![
        Fixture::new("truncated-stable-0.5", "y^{-1.5} on (0,1), λ = 1", 0.0, 0.0, ts(0.5), 1.0, Exists),
        Fixture::new("truncated-stable-1.0", "y^{-2} on (0,1), λ̄T* = 0.5", 0.0, 0.0, ts(1.0), 0.5, Exists),
        Fixture::new("truncated-stable-1.5", "y^{-2.5} on (0,1), λ = 1", 0.0, 0.0, ts(1.5), 1.0, NotExists),
        Fixture::new("log-modified-0.5", "y^{-2} |ln y|^{-0.5} on (0,1/2)", 0.0, 0.0, lm(0.5), 1.0, Exists),
        Fixture::new("log-modified-2.0", "y^{-2} |ln y|^{-2} on (0,1/2)", 0.0, 0.0, lm(2.0), 1.0, Exists),
        Fixture::new(
            "subordinator",
            "atoms {0.3: 2}, drift 0.6",
            0.6,
            0.0,
            LevyMeasureSpec::atoms(vec![0.3], vec![2.0]).unwrap(),
            0.2,
            Exists,
        ),
        Fixture::new("drift-only", "ν = 0, q = 0, drift 0.5", 0.5, 0.0, LevyMeasureSpec::zero(), 1.0, Exists),
        Fixture::new("gaussian", "q = 0.5 with y^{-1.5} jumps", 0.0, 0.5, ts(0.5), 1.0, NotExists),
        Fixture::new(
            "negative-jumps",
            "uniform density on (-0.5, 0.5)",
            0.0,
            0.0,
            LevyMeasureSpec::uniform(1.0, -0.5, 0.5).unwrap(),
            1.0,
            NotExists,
        ),
    ]
}

/// One row of [`run_examples`].
#[derive(Debug, Clone)]
pub struct ExampleOutcome {
    pub name: &'static str,
    pub expected: Verdict,
    pub verdict: ExistenceVerdict,
}

impl ExampleOutcome {
    pub fn matches(&self) -> bool {
        self.verdict.verdict == self.expected
    }
}

pub fn run_examples(options: &ClassifierOptions) -> Result<Vec<ExampleOutcome>> {
    examples()
        .into_iter()
        .map(|f| Ok(ExampleOutcome { name: f.name, expected: f.expected, verdict: f.classify(options)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_example_matches() {
        for row in run_examples(&ClassifierOptions::default()).unwrap() {
            assert!(row.matches(), "{}: expected {}, got {}", row.name, row.expected, row.verdict.verdict);
        }
    }
}
