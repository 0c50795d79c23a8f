//! Run configuration: TOML with defaults for every key, dotted overrides and a content hash.

use std::fmt;
use std::path::Path;

use hjm_levy::{InitialCurve, LevyMeasureSpec, LevyModel, ScalarFn, SolverOptions, VolatilitySurface};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A configuration problem, with the dotted key it concerns when known.
#[derive(Debug)]
pub struct ConfigError {
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(key: &str, message: impl Into<String>) -> Self {
        ConfigError { key: Some(key.to_string()), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        ConfigError { key: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(key) => write!(f, "config error at `{key}`: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub t_star: f64,
    pub model: ModelConfig,
    pub lambda: LambdaConfig,
    pub f0: CurveConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub mc: McConfig,
    pub growth: GrowthConfig,
    pub exponent: ExponentConfig,
    pub minorant: MinorantConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_star: 1.0,
            model: ModelConfig::default(),
            lambda: LambdaConfig::default(),
            f0: CurveConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            mc: McConfig::default(),
            growth: GrowthConfig::default(),
            exponent: ExponentConfig::default(),
            minorant: MinorantConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Zero,
    TruncatedStable,
    LogModified,
    LogPower,
    Uniform,
    Atoms,
}

/// Lévy triple. Family parameters that the family does not use must be absent.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub family: Family,
    pub drift: f64,
    pub q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            family: Family::Zero,
            drift: 0.0,
            q: 0.0,
            p: None,
            gamma: None,
            c: None,
            lower: None,
            upper: None,
            points: None,
            masses: None,
        }
    }
}

fn need<T: Clone>(value: &Option<T>, key: &str) -> Result<T, ConfigError> {
    value.clone().ok_or_else(|| ConfigError::at(key, "required by this family"))
}

impl ModelConfig {
    fn check_unused(&self, used: &[&str]) -> Result<(), ConfigError> {
        let present = [
            ("p", self.p.is_some()),
            ("gamma", self.gamma.is_some()),
            ("c", self.c.is_some()),
            ("lower", self.lower.is_some()),
            ("upper", self.upper.is_some()),
            ("points", self.points.is_some()),
            ("masses", self.masses.is_some()),
        ];
        for (name, set) in present {
            if set && !used.contains(&name) {
                return Err(ConfigError::at(&format!("model.{name}"), "not a parameter of this family"));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<LevyModel, ConfigError> {
        let lib = |e: hjm_levy::Error| ConfigError::at("model", e.to_string());
        let measure = match self.family {
            Family::Zero => {
                self.check_unused(&[])?;
                LevyMeasureSpec::zero()
            }
            Family::TruncatedStable => {
                self.check_unused(&["p"])?;
                LevyMeasureSpec::truncated_stable(need(&self.p, "model.p")?).map_err(lib)?
            }
            Family::LogModified => {
                self.check_unused(&["gamma"])?;
                LevyMeasureSpec::log_modified(need(&self.gamma, "model.gamma")?).map_err(lib)?
            }
            Family::LogPower => {
                self.check_unused(&["gamma"])?;
                LevyMeasureSpec::log_power_density(need(&self.gamma, "model.gamma")?).map_err(lib)?
            }
            Family::Uniform => {
                self.check_unused(&["c", "lower", "upper"])?;
                LevyMeasureSpec::uniform(
                    need(&self.c, "model.c")?,
                    need(&self.lower, "model.lower")?,
                    need(&self.upper, "model.upper")?,
                )
                .map_err(lib)?
            }
            Family::Atoms => {
                self.check_unused(&["points", "masses"])?;
                LevyMeasureSpec::atoms(need(&self.points, "model.points")?, need(&self.masses, "model.masses")?)
                    .map_err(lib)?
            }
        };
        LevyModel::new(self.drift, self.q, measure).map_err(lib)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarConfig {
    Constant(f64),
    Affine { intercept: f64, slope: f64 },
    Exp { scale: f64, rate: f64 },
}

impl From<ScalarConfig> for ScalarFn {
    fn from(c: ScalarConfig) -> Self {
        match c {
            ScalarConfig::Constant(v) => ScalarFn::Constant(v),
            ScalarConfig::Affine { intercept, slope } => ScalarFn::Affine { intercept, slope },
            ScalarConfig::Exp { scale, rate } => ScalarFn::Exp { scale, rate },
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    /// Factor in `t`.
    pub a: ScalarConfig,
    /// Factor in `T`.
    pub b: ScalarConfig,
}

/// `λ ≡ value`, or `Σ a_n(t) b_n(T)` when `terms` is non-empty.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LambdaConfig {
    pub value: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
}

impl Default for LambdaConfig {
    fn default() -> Self {
        LambdaConfig { value: 1.0, terms: Vec::new() }
    }
}

impl LambdaConfig {
    pub fn build(&self, t_star: f64) -> Result<VolatilitySurface, ConfigError> {
        let surface = if self.terms.is_empty() {
            VolatilitySurface::Constant(self.value)
        } else {
            VolatilitySurface::Separable(self.terms.iter().map(|t| (t.a.into(), t.b.into())).collect())
        };
        surface.checked_bounds(t_star).map_err(|e| ConfigError::at("lambda", e.to_string()))?;
        Ok(surface)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Constant,
    Affine,
    Samples,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CurveConfig {
    pub kind: CurveKind,
    /// Level of a constant curve.
    pub value: f64,
    pub intercept: f64,
    pub slope: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            kind: CurveKind::Constant,
            value: 0.03,
            intercept: 0.03,
            slope: 0.0,
            times: Vec::new(),
            values: Vec::new(),
        }
    }
}

impl CurveConfig {
    pub fn build(&self) -> Result<InitialCurve, ConfigError> {
        Ok(match self.kind {
            CurveKind::Constant => InitialCurve::Constant(self.value),
            CurveKind::Affine => InitialCurve::Affine { intercept: self.intercept, slope: self.slope },
            CurveKind::Samples => InitialCurve::samples(self.times.clone(), self.values.clone())
                .map_err(|e| ConfigError::at("f0.times", e.to_string()))?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 50 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub blowup_threshold: f64,
    pub c_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverConfig { tol: d.tol, max_iters: d.max_iters, blowup_threshold: d.blowup_threshold, c_max: d.c_max }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            blowup_threshold: self.blowup_threshold,
            c_max: self.c_max,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub paths: usize,
    pub seed: u64,
    /// Index of the path used by `simulate` and `solve`.
    pub path_index: u64,
    pub epsilon_cut: f64,
    pub maturities: Vec<f64>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { paths: 10_000, seed: 1, path_index: 0, epsilon_cut: 1e-3, maturities: vec![0.5, 1.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthConfig {
    pub z_max: f64,
    pub margin: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        let d = hjm_levy::GrowthOptions::default();
        GrowthConfig { z_max: d.z_max, margin: d.margin }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    /// The Laplace exponent of the model.
    Model,
    /// `factor ·` the model exponent.
    Scaled,
    /// `α ln³(γ(z + e²)) + β`, independent of the model.
    CubeLog,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExponentConfig {
    pub kind: ExponentKind,
    pub factor: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Defaults to `-α ln³(γ e²)` so that `J'(0) = 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        ExponentConfig { kind: ExponentKind::Model, factor: 1.0, alpha: 2.0, gamma: 4.0, beta: None }
    }
}

impl ExponentConfig {
    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| -self.alpha * (self.gamma * std::f64::consts::E.powi(2)).ln().powi(3))
    }
}

/// Blow-up point and margin for the minorant check after a diverged `solve`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MinorantConfig {
    pub x: f64,
    pub y: f64,
    pub delta: f64,
}

impl Default for MinorantConfig {
    fn default() -> Self {
        MinorantConfig { x: 0.3, y: 0.8, delta: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".to_string() }
    }
}

/// Parses `raw` as a TOML value, falling back to a plain string.
fn parse_override_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key was just written"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `a.b.c=value` to a TOML table, creating intermediate tables.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::general(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::at(key, "empty path segment"));
    }
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| ConfigError::at(key, format!("`{part}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), parse_override_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    /// Reads `path` (or starts from defaults), applies overrides and validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError::general(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| ConfigError::general(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, ConfigError> {
        let text = toml::to_string(&table).map_err(|e| ConfigError::general(e.to_string()))?;
        let de = toml::Deserializer::parse(&text).map_err(|e| ConfigError::general(e.to_string()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError { key: (path != ".").then_some(path), message: e.into_inner().message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.t_star > 0.0) || !self.t_star.is_finite() {
            return Err(ConfigError::at("t_star", "must be positive and finite"));
        }
        if self.grid.n == 0 {
            return Err(ConfigError::at("grid.n", "must be at least 1"));
        }
        if self.mc.paths < 2 {
            return Err(ConfigError::at("mc.paths", "must be at least 2"));
        }
        if !(self.mc.epsilon_cut > 0.0) {
            return Err(ConfigError::at("mc.epsilon_cut", "must be positive"));
        }
        if !(self.solver.tol >= 0.0) {
            return Err(ConfigError::at("solver.tol", "must be nonnegative"));
        }
        self.model.build()?;
        self.lambda.build(self.t_star)?;
        self.f0.build()?;
        Ok(())
    }

    /// The effective configuration with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// First 12 hex digits of the SHA-256 of the command and the effective configuration.
    /// The output directory does not take part.
    pub fn hash(&self, command: &str) -> String {
        let content = RunConfig { output: OutputConfig::default(), ..self.clone() };
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update(b"\n");
        hasher.update(content.to_toml().as_bytes());
        hex::encode(hasher.finalize())[..12].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> toml::Table {
        text.parse().unwrap()
    }

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_table(table(&cfg.to_toml())).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected_with_path() {
        let err = RunConfig::from_table(table("[model]\nfamliy = \"zero\"")).unwrap_err();
        assert!(err.to_string().contains("famliy"), "{err}");
        assert_eq!(err.key.as_deref(), Some("model.famliy"));
    }

    #[test]
    fn family_parameters_are_checked() {
        let err = RunConfig::from_table(table("[model]\nfamily = \"truncated_stable\"")).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("model.p"));
        let err = RunConfig::from_table(table("[model]\nfamily = \"zero\"\np = 0.5")).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("model.p"));
    }

    #[test]
    fn overrides_apply_dotted_paths() {
        let mut t = table("[model]\nfamily = \"zero\"");
        apply_override(&mut t, "model.family=truncated_stable").unwrap();
        apply_override(&mut t, "model.p = 0.5").unwrap();
        apply_override(&mut t, "mc.maturities=[0.25, 1.0]").unwrap();
        let cfg = RunConfig::from_table(t).unwrap();
        assert_eq!(cfg.model.family, Family::TruncatedStable);
        assert_eq!(cfg.model.p, Some(0.5));
        assert_eq!(cfg.mc.maturities, vec![0.25, 1.0]);
    }

    #[test]
    fn separable_lambda_parses() {
        let cfg = RunConfig::from_table(table(
            "[[lambda.terms]]\na = { constant = 1.0 }\nb = { exp = { scale = 0.5, rate = -0.2 } }",
        ))
        .unwrap();
        let lam = cfg.lambda.build(1.0).unwrap();
        assert!((lam.value(0.3, 1.0) - 0.5 * (-0.2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn hash_depends_on_content_and_command() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.mc.seed = 2;
        assert_ne!(a.hash("solve"), b.hash("solve"));
        assert_ne!(a.hash("solve"), a.hash("simulate"));
        assert_eq!(a.hash("solve"), a.clone().hash("solve"));
    }
}
