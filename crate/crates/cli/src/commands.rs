use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use hjm_levy::existence_classifier::{ClassifierOptions, ExistenceVerdict};
use hjm_levy::field_solver::minorant::MinorantParams;
use hjm_levy::fixtures::run_examples;
use hjm_levy::{
    a_field, classify, martingale_test, solve_fixed_point, verify_minorant_dominance, Exponent, GrowthOptions,
    LaplaceExponent, MartingaleOptions, PathSimulator, Scaled, SolveStatus, TriangularGrid, UserExponent,
};

use crate::config::{ExponentKind, RunConfig};
use crate::{CliError, Status};

/// Files of one run, named `<command>-<hash><suffix>` inside the output directory.
struct Outputs {
    dir: PathBuf,
    stem: String,
}

impl Outputs {
    fn create(cfg: &RunConfig, command: &str) -> Result<Self, CliError> {
        let dir = PathBuf::from(&cfg.output.dir);
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let out = Outputs { dir, stem: format!("{command}-{}", cfg.hash(command)) };
        out.write(".config.toml", cfg.to_toml().as_bytes())?;
        Ok(out)
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.stem))
    }

    fn write(&self, suffix: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(suffix);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn write_with(
        &self,
        suffix: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        self.write(suffix, &buf)
    }
}

fn lib(e: hjm_levy::Error) -> CliError {
    CliError::Run(e.to_string())
}

fn classifier_options(cfg: &RunConfig) -> ClassifierOptions {
    ClassifierOptions {
        growth: GrowthOptions { z_max: cfg.growth.z_max, margin: cfg.growth.margin, ..GrowthOptions::default() },
        ..ClassifierOptions::default()
    }
}

fn exponent(cfg: &RunConfig) -> Result<Box<dyn Exponent>, CliError> {
    let e = &cfg.exponent;
    Ok(match e.kind {
        ExponentKind::Model => Box::new(LaplaceExponent::new(cfg.model.build()?).map_err(lib)?),
        ExponentKind::Scaled => {
            Box::new(Scaled { inner: LaplaceExponent::new(cfg.model.build()?).map_err(lib)?, factor: e.factor })
        }
        ExponentKind::CubeLog => Box::new(UserExponent::cube_log(e.alpha, e.gamma, e.beta())),
    })
}

fn render_verdict(v: &ExistenceVerdict) -> String {
    let mut s = String::new();
    let rule = v.deciding_rule().map_or("none", |r| r.id());
    let _ = writeln!(s, "verdict: {} (deciding rule: {rule})", v.verdict);
    if let Some(rho) = v.rho_hat {
        let _ = writeln!(s, "rho_hat: {rho:.6}");
    }
    let _ = writeln!(s, "evidence:");
    for ev in &v.evidence {
        let outcome = ev.outcome.map_or("-".to_string(), |o| o.to_string());
        let _ = writeln!(s, "  {:<10} {:<12} {}", ev.rule.id(), outcome, ev.note);
        for (k, val) in &ev.diagnostics {
            let _ = writeln!(s, "      {k} = {val}");
        }
    }
    s
}

pub fn classify_cmd(cfg: &RunConfig) -> Result<Status, CliError> {
    let model = cfg.model.build()?;
    let bounds = cfg.lambda.build(cfg.t_star)?.bounds(cfg.t_star);
    let out = Outputs::create(cfg, "classify")?;
    match classify(&model, bounds, cfg.t_star, &classifier_options(cfg)) {
        Ok(v) => {
            let text = render_verdict(&v);
            print!("{text}");
            out.write(".txt", text.as_bytes())?;
            Ok(Status::Success)
        }
        Err(hjm_levy::Error::Assumptions(report)) => {
            let text = format!("verdict: none (standing assumptions violated)\n{report}\n");
            print!("{text}");
            out.write(".txt", text.as_bytes())?;
            Ok(Status::Failure)
        }
        Err(e) => Err(lib(e)),
    }
}

pub fn simulate_cmd(cfg: &RunConfig) -> Result<Status, CliError> {
    let model = cfg.model.build()?;
    let sim = PathSimulator::new(&model, cfg.t_star, cfg.mc.epsilon_cut).map_err(lib)?;
    let path = sim.simulate(cfg.mc.seed, cfg.mc.path_index);
    let out = Outputs::create(cfg, "simulate")?;
    let file = out.write_with(".path.csv", |w| path.write_csv(w))?;
    println!(
        "{} jumps on [0, {}] (intensity {}, effective drift {}), seed {} path {}",
        path.jump_count(),
        cfg.t_star,
        sim.intensity(),
        path.effective_drift(),
        cfg.mc.seed,
        cfg.mc.path_index
    );
    println!("path: {}", file.display());
    Ok(Status::Success)
}

pub fn solve_cmd(cfg: &RunConfig) -> Result<Status, CliError> {
    let model = cfg.model.build()?;
    let lam = cfg.lambda.build(cfg.t_star)?;
    let f0 = cfg.f0.build()?;
    let grid = TriangularGrid::new(cfg.grid.n, cfg.t_star).map_err(lib)?;
    let exp = exponent(cfg)?;
    let path = PathSimulator::new(&model, cfg.t_star, cfg.mc.epsilon_cut).map_err(lib)?.simulate(cfg.mc.seed, cfg.mc.path_index);
    let a = a_field(&path, &lam, &f0, &grid).map_err(lib)?;
    let outcome = solve_fixed_point(&a, &lam, exp.as_ref(), &cfg.solver.options()).map_err(lib)?;

    let out = Outputs::create(cfg, "solve")?;
    let field_file = out.write_with(".field.csv", |w| outcome.field.write_csv(w))?;
    out.write_with(".residuals.csv", |w| outcome.write_residuals_csv(w))?;

    let mut report = String::new();
    let _ = writeln!(report, "exponent: {}", exp.describe());
    let _ = writeln!(report, "grid: n = {}, T* = {}", grid.n(), grid.t_star());
    let _ = writeln!(report, "jumps: {}", path.jump_count());
    match outcome.bound_c {
        Some(c) => {
            let _ = writeln!(report, "bound_c: {c}");
        }
        None => {
            let _ = writeln!(report, "bound_c: none below {}", cfg.solver.c_max);
        }
    }
    let status = match &outcome.status {
        SolveStatus::Converged { iterations, residual } => {
            let _ = writeln!(report, "status: converged");
            let _ = writeln!(report, "iterations: {iterations}");
            let _ = writeln!(report, "residual: {residual:e}");
            let _ = writeln!(report, "max |f - f0|: {:e}", max_deviation_from_f0(&outcome.field, &f0));
            Status::Success
        }
        SolveStatus::Stalled { iterations, residual } => {
            let _ = writeln!(report, "status: stalled");
            let _ = writeln!(report, "iterations: {iterations}");
            let _ = writeln!(report, "residual: {residual:e}");
            Status::Failure
        }
        SolveStatus::Diverged { node, time, iteration } => {
            let _ = writeln!(report, "status: diverged");
            let _ = writeln!(report, "iteration: {iteration}");
            let _ = writeln!(report, "node: ({}, {})", node.0, node.1);
            let _ = writeln!(report, "time: (t = {}, T = {})", time.0, time.1);
            let _ = writeln!(report, "threshold: {:e}", cfg.solver.blowup_threshold);
            if cfg.exponent.kind == ExponentKind::CubeLog {
                minorant_section(cfg, &outcome, &a, &mut report);
            }
            Status::Failure
        }
    };
    print!("{report}");
    println!("field: {}", field_file.display());
    out.write(".report.txt", report.as_bytes())?;
    Ok(status)
}

fn max_deviation_from_f0(field: &hjm_levy::ForwardField, f0: &hjm_levy::InitialCurve) -> f64 {
    let grid = field.grid();
    grid.nodes().map(|(i, j)| (field.get(i, j) - f0.value(grid.time(j))).abs()).fold(0.0, f64::max)
}

fn minorant_section(cfg: &RunConfig, outcome: &hjm_levy::SolveOutcome, a: &hjm_levy::AField, report: &mut String) {
    let e = &cfg.exponent;
    let m = &cfg.minorant;
    let params = match MinorantParams::new(e.alpha, e.gamma, m.x, m.y, cfg.t_star) {
        Ok(p) => p,
        Err(err) => {
            let _ = writeln!(report, "minorant: not checked ({err})");
            return;
        }
    };
    let fields = [outcome.previous.clone(), outcome.field.clone()];
    match verify_minorant_dominance(&fields, a, &params, e.beta(), m.delta) {
        Ok(r) => {
            let _ = writeln!(report, "minorant: x = {}, y = {}, delta = {}", m.x, m.y, m.delta);
            let _ = writeln!(report, "  hypothesis_ok: {} (log margin {:.3})", r.hypothesis_ok, r.hypothesis_log_margin);
            if r.hypothesis_ok {
                let _ = writeln!(report, "  nodes_checked: {}", r.nodes_checked);
                let _ = writeln!(report, "  fraction_dominated: {}", r.fraction());
                let _ = writeln!(report, "  max_violation: {}", r.max_violation);
            } else {
                let _ = writeln!(report, "  comparison hypothesis unmet: no verdict");
            }
        }
        Err(err) => {
            let _ = writeln!(report, "minorant: not checked ({err})");
        }
    }
}

pub fn martingale_cmd(cfg: &RunConfig) -> Result<Status, CliError> {
    let model = cfg.model.build()?;
    let lam = cfg.lambda.build(cfg.t_star)?;
    let f0 = cfg.f0.build()?;
    let grid = TriangularGrid::new(cfg.grid.n, cfg.t_star).map_err(lib)?;
    let exp = exponent(cfg)?;
    let opts = MartingaleOptions {
        n_paths: cfg.mc.paths,
        seed: cfg.mc.seed,
        epsilon_cut: cfg.mc.epsilon_cut,
        solver: cfg.solver.options(),
    };
    let report =
        martingale_test(&model, exp.as_ref(), &lam, &f0, &grid, &cfg.mc.maturities, &opts).map_err(lib)?;
    let out = Outputs::create(cfg, "martingale")?;
    let file = out.write_with(".csv", |w| report.write_csv(w))?;
    let b = &report.bias;
    println!(
        "bias sources: epsilon_cut {}, truncated variance {:e}, grid step {}, drift residual {:e}",
        b.epsilon_cut, b.truncation_variance, b.grid_step, b.drift_residual
    );
    println!("report: {}", file.display());
    println!("{}", report.summary());
    Ok(if report.pass { Status::Success } else { Status::Failure })
}

pub fn examples_cmd(cfg: &RunConfig) -> Result<Status, CliError> {
    let rows = run_examples(&classifier_options(cfg)).map_err(lib)?;
    let mut table = String::new();
    let _ = writeln!(table, "{:<22} {:<12} {:<12} {:<15} match", "example", "expected", "verdict", "rule");
    for row in &rows {
        let rule = row.verdict.deciding_rule().map_or("none", |r| r.id());
        let _ = writeln!(
            table,
            "{:<22} {:<12} {:<12} {:<15} {}",
            row.name,
            row.expected.to_string(),
            row.verdict.verdict.to_string(),
            rule,
            if row.matches() { "yes" } else { "NO" }
        );
    }
    print!("{table}");
    let out = Outputs::create(cfg, "examples")?;
    out.write(".txt", table.as_bytes())?;
    Ok(if rows.iter().all(|r| r.matches()) { Status::Success } else { Status::Failure })
}
