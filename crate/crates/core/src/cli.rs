//! Batch front-end behind the `qpm` binary.
//!
//! Exit codes: 0 when every check passes or every solve converges, 2 when a
//! report records a violation (axiom failure, hypothesis failure, solver
//! violation, iteration budget exhausted, oracle disagreement), 1 for usage,
//! schema and I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{parse_config, ConfigError, Instance, ScenarioConfig};
use crate::gauge::{LimsupSchedule, ShapeOptions, GRID_FLOOR, GRID_POINTS, SHAPE_TOL, STRICT_MARGIN};
use crate::oracle::{brute_force_points, exhaustive_hypothesis_check, HypothesisOptions, HypothesisReport, EPS_T0};
use crate::solver::{
    decay_diagnostics, solve, step_checks, DecayOptions, DecayReport, Mode, SideOptions, SolveOptions, StepChecks,
    VariantId,
};
use crate::space::{verify_axioms, Point, AXIOM_TOL, DEFAULT_TAIL_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    CheckSpace,
    CheckHypotheses,
    Solve,
    Oracle,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckSpace => "check-space",
            Command::CheckHypotheses => "check-hypotheses",
            Command::Solve => "solve",
            Command::Oracle => "oracle",
        }
    }
}

/// Check quasi-pseudometric spaces, set-valued map hypotheses, and run
/// startpoint, endpoint and fixed-point iterations.
#[derive(Debug, Parser)]
#[command(name = "qpm", version)]
pub struct Args {
    /// Scenario config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub command: Command,
    /// Directory for the report JSON and trace CSVs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for random scenarios.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Convergence threshold on f.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Enumeration step for interval spaces.
    #[arg(long)]
    pub grid: Option<f64>,
    /// Print only the status line.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Usage = 1,
    Violation = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            ExitStatus::Pass
        } else {
            ExitStatus::Violation
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// Result of one command: exit status, JSON report and extra files (name, contents).
#[derive(Debug, Clone)]
pub struct Run {
    pub status: ExitStatus,
    pub report: Value,
    pub files: Vec<(String, String)>,
}

/// One solve from one start point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub variant: VariantId,
    pub mode: Mode,
    pub x0: Point,
    pub outcome: String,
    pub iterations: usize,
    pub x: Point,
    pub f: f64,
    pub trace_file: String,
    pub checks: StepChecks,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agreement {
    Agree,
    Disagree,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub x0: Point,
    pub outcome: String,
    pub limit: Point,
    pub in_oracle_set: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVariant {
    pub hypotheses: HypothesisReport,
    pub agreement: Agreement,
    pub runs: Vec<OracleRun>,
}

fn header(command: Command, config: &ScenarioConfig, inst: &Instance) -> Value {
    let o = config.options;
    json!({
        "tool": "qpm",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "scenario": config.scenario_name(),
        "seed": inst.seed,
        "defaults": {
            "eps_conv": o.eps,
            "max_iter": o.max_iter,
            "tol_feas": o.tol_feas,
            "grid_step": inst.grid,
            "axiom_tol": AXIOM_TOL,
            "eps_t0": EPS_T0,
            "strict_margin": STRICT_MARGIN,
            "shape_tol": SHAPE_TOL,
            "gauge_grid_points": GRID_POINTS,
            "gauge_grid_floor": GRID_FLOOR,
            "gauge_grid_max": "2 * diameter",
            "limsup": LimsupSchedule::default(),
            "limsup_probe_stride": SideOptions::default().probe_stride,
            "continuity_modulus": ShapeOptions::default().modulus,
            "cauchy": DecayOptions::default().cauchy,
            "tail_fraction": DEFAULT_TAIL_FRACTION,
            "oracle_eps": 2.0 * o.eps,
        }
    })
}

fn solve_options(config: &ScenarioConfig) -> SolveOptions {
    SolveOptions { eps_conv: config.options.eps, max_iter: config.options.max_iter, tol_feas: config.options.tol_feas }
}

fn require_variants(config: &ScenarioConfig, command: Command) -> Result<(), CliError> {
    if config.variants.is_empty() {
        return Err(CliError::Usage(format!("{} needs at least one variant in the config", command.name())));
    }
    Ok(())
}

/// Runs `command` on a parsed config. `seed` overrides a random scenario's seed.
pub fn execute(command: Command, config: &ScenarioConfig, seed: Option<u64>) -> Result<Run, CliError> {
    let inst = config.instance(seed)?;
    let (space, map) = (&inst.space, &inst.map);
    let mut report = json!({ "header": header(command, config, &inst) });
    let mut files = Vec::new();
    let hyp_opts = HypothesisOptions { tol_feas: config.options.tol_feas, grid_step: inst.grid, ..Default::default() };

    let status = match command {
        Command::CheckSpace => {
            let axioms = verify_axioms(space, true, inst.grid)?;
            report["axioms"] = serde_json::to_value(&axioms).expect("report serializes");
            ExitStatus::from_pass(axioms.passes())
        }
        Command::CheckHypotheses => {
            require_variants(config, command)?;
            let reports = config
                .variants
                .iter()
                .map(|v| exhaustive_hypothesis_check(space, map, v, &hyp_opts))
                .collect::<crate::Result<Vec<_>>>()?;
            let pass = reports.iter().all(HypothesisReport::passed);
            report["reports"] = serde_json::to_value(&reports).expect("report serializes");
            ExitStatus::from_pass(pass)
        }
        Command::Solve => {
            require_variants(config, command)?;
            let starts = match config.x0 {
                Some(x0) => vec![space.coerce(x0)?],
                None if space.is_finite() => space.enumerate(None)?,
                None => return Err(CliError::Usage("x0 is required for interval scenarios".into())),
            };
            let opts = solve_options(config);
            let mut runs = Vec::new();
            for v in &config.variants {
                for x0 in &starts {
                    let trace = solve(space, map, v, x0, &opts)?;
                    let name = format!("trace-{}-{}-x{}.csv", v.id, v.mode.name(), x0);
                    files.push((name.clone(), trace.to_csv()));
                    let decay = match trace.outcome.is_converged() || trace.outcome.kind() == "max-iterations" {
                        true => decay_diagnostics(space, v, &trace, &DecayOptions::default()).ok(),
                        false => None,
                    };
                    let last = trace.steps.last().expect("a trace has at least one step");
                    runs.push(SolveSummary {
                        variant: v.id,
                        mode: v.mode,
                        x0: *x0,
                        outcome: trace.outcome.kind().to_string(),
                        iterations: trace.iterations(),
                        x: last.x,
                        f: last.f,
                        trace_file: name,
                        checks: step_checks(&trace),
                        decay,
                    });
                }
            }
            let pass = runs.iter().all(|r| r.outcome == "converged");
            report["runs"] = serde_json::to_value(&runs).expect("report serializes");
            ExitStatus::from_pass(pass)
        }
        Command::Oracle => {
            let eps = config.options.eps;
            let points = |kind| brute_force_points(space, map, kind, eps, inst.grid);
            report["points"] = json!({
                "eps": eps,
                "start": points(Mode::Start)?,
                "end": points(Mode::End)?,
                "fixed": points(Mode::Fixed)?,
            });
            let opts = solve_options(config);
            let mut out = Vec::new();
            for v in &config.variants {
                let hypotheses = exhaustive_hypothesis_check(space, map, v, &hyp_opts)?;
                let mut runs = Vec::new();
                let agreement = if hypotheses.passed() {
                    let targets = brute_force_points(space, map, v.mode, 2.0 * eps, inst.grid)?;
                    for x0 in space.enumerate(inst.grid)? {
                        let trace = solve(space, map, v, &x0, &opts)?;
                        let limit = trace.outcome.point();
                        runs.push(OracleRun {
                            x0,
                            outcome: trace.outcome.kind().to_string(),
                            limit,
                            in_oracle_set: trace.outcome.is_converged() && targets.contains(&limit),
                        });
                    }
                    if runs.iter().all(|r| r.in_oracle_set) {
                        Agreement::Agree
                    } else {
                        Agreement::Disagree
                    }
                } else {
                    Agreement::NotApplicable
                };
                out.push(OracleVariant { hypotheses, agreement, runs });
            }
            let pass = out.iter().all(|o| o.agreement != Agreement::Disagree);
            report["variants"] = serde_json::to_value(&out).expect("report serializes");
            ExitStatus::from_pass(pass)
        }
    };
    report["status"] = json!(if status == ExitStatus::Pass { "pass" } else { "violation" });
    Ok(Run { status, report, files })
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn run_args(args: &Args, stdout: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| io_err(&args.config, e))?;
    let mut config = parse_config(&text)?;
    if let Some(eps) = args.eps {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(CliError::Usage(format!("--eps must be positive, got {eps}")));
        }
        config.options.eps = eps;
    }
    if let Some(n) = args.max_iter {
        if n == 0 {
            return Err(CliError::Usage("--max-iter must be at least 1".into()));
        }
        config.options.max_iter = n;
    }
    if let Some(g) = args.grid {
        if !(g > 0.0 && g.is_finite()) {
            return Err(CliError::Usage(format!("--grid must be positive, got {g}")));
        }
        config.options.grid = Some(g);
    }
    let run = execute(args.command, &config, args.seed)?;
    let rendered = serde_json::to_string_pretty(&run.report).expect("report serializes");
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let path = dir.join(format!("{}.json", args.command.name()));
        std::fs::write(&path, &rendered).map_err(|e| io_err(&path, e))?;
        for (name, contents) in &run.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        }
    }
    let status_word = if run.status == ExitStatus::Pass { "pass" } else { "violation" };
    let io = |e| io_err(Path::new("<stdout>"), e);
    if !args.quiet {
        writeln!(stdout, "{rendered}").map_err(io)?;
    }
    writeln!(stdout, "{}: {status_word}", args.command.name()).map_err(io)?;
    Ok(run.status)
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::Usage.code() } else { ExitStatus::Pass.code() };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match run_args(&args, stdout) {
        Ok(status) => status.code(),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            ExitStatus::Usage.code()
        }
    }
}
