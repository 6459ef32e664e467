//! Command-line harness: integration runs, order and drift studies, and the
//! randomized verification suites.

pub mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::integrators::{integrate_partial, Rule, Scheme, SolverConfig};
use crate::matfun::Vector;
use crate::model::{registry, Problem, RefPolicy, System, PROBLEM_NAMES};
use crate::oracle::{convergence_order, energy_drift_argmax};
use verify::{run_suite, Suite};

/// Default step sizes of `order`.
pub const DEFAULT_ORDER_STEPS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Default end time of `order`.
pub const DEFAULT_ORDER_TIME: f64 = 2.0;

/// Environment variable capping the worker threads of the studies.
pub const THREADS_ENV: &str = "GEODINT_THREADS";

/// Exit status of a configuration error.
pub const EXIT_CONFIG: i32 = 1;

/// Exit status of a numerical failure.
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "geodint",
    version,
    about = "Locally exact and discrete-gradient integrators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a registry problem and write one CSV record per step.
    Integrate(IntegrateArgs),
    /// Estimate the convergence order from endpoint errors.
    Order(OrderArgs),
    /// Measure the maximum relative energy drift of a run.
    Drift(IntegrateArgs),
    /// Run a seeded randomized property suite.
    Verify(VerifyArgs),
    /// List the built-in problems.
    ListProblems,
    /// List the base rules.
    ListSchemes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SchemeArgs {
    /// Registry problem name.
    #[arg(long)]
    problem: String,
    /// Base rule name, see `list-schemes`.
    #[arg(long)]
    scheme: String,
    /// Reference policy: current, next, midpoint, fixed or fixed:<state>.
    /// Implies a locally exact coefficient.
    #[arg(long)]
    policy: Option<String>,
    /// Use the locally exact coefficient at the rule's default policy.
    #[arg(long)]
    locally_exact: bool,
    /// Initial state, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    /// Tolerance of the implicit solver.
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    #[command(flatten)]
    common: SchemeArgs,
    /// Constant step size.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "schedule")]
    h: Option<f64>,
    /// File of step sizes, one per line, cycled as needed.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Number of steps.
    #[arg(long, conflicts_with = "end_time")]
    steps: Option<usize>,
    /// End time.
    #[arg(long = "T", allow_hyphen_values = true)]
    end_time: Option<f64>,
}

#[derive(Args, Debug)]
struct OrderArgs {
    #[command(flatten)]
    common: SchemeArgs,
    /// Step sizes, comma-separated.
    #[arg(long)]
    h: Option<String>,
    /// End time; a multiple of every step size.
    #[arg(long = "T", default_value_t = DEFAULT_ORDER_TIME)]
    end_time: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure of a command, mapped to its exit status.
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidScheme(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("i/o error: {e}"))
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn config<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

/// Formats a number identically on every run: plain decimal in the usual
/// range, scientific notation outside it.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Parses a comma-separated list of decimals.
pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("invalid number '{t}' in '{s}'"))
        })
        .collect()
}

fn lookup_problem(name: &str) -> std::result::Result<Problem, Failure> {
    registry(name).ok_or_else(|| Failure::Config(format!("unknown problem: {name}")))
}

fn state(prob: &Problem, y0: Option<&str>) -> std::result::Result<Vector, Failure> {
    let y = match y0 {
        None => return Ok(prob.default_y0.clone()),
        Some(s) => Vector::from_vec(parse_list(s).map_err(Failure::Config)?),
    };
    let d = 2 * prob.dof();
    if y.dim() != d {
        return config(format!(
            "--y0 has {} components, {} expects {d}",
            y.dim(),
            prob.name
        ));
    }
    Ok(y)
}

fn build_scheme(args: &SchemeArgs, prob: &Problem) -> std::result::Result<Scheme, Failure> {
    let rule = Rule::from_name(&args.scheme)
        .ok_or_else(|| Failure::Config(format!("unknown scheme: {}", args.scheme)))?;
    if rule.is_one_dof() && prob.dof() != 1 {
        return config(format!(
            "{} needs a one-degree-of-freedom problem",
            rule.name()
        ));
    }
    if rule == Rule::GrMultiSeparable && !prob.system.is_separable() {
        return config(format!("{} is not separable", prob.name));
    }
    let policy = match args.policy.as_deref() {
        None => None,
        Some("current") => Some(RefPolicy::Current),
        Some("next") => Some(RefPolicy::Next),
        Some("midpoint") => Some(RefPolicy::Midpoint),
        Some("fixed") => match prob.equilibria.first() {
            Some(eq) => Some(RefPolicy::Fixed(eq.clone())),
            None => {
                return config(format!(
                    "{} has no equilibrium; use fixed:<state>",
                    prob.name
                ))
            }
        },
        Some(p) => match p.strip_prefix("fixed:") {
            Some(list) => {
                let y = state(prob, Some(list))?;
                Some(RefPolicy::Fixed(y))
            }
            None => return config(format!("unknown policy: {p}")),
        },
    };
    let scheme = match (rule, policy) {
        (Rule::ExponentialEuler, None | Some(RefPolicy::Current)) => Scheme::exponential_euler(),
        (_, Some(policy)) => Scheme::locally_exact(rule, policy)?,
        (_, None) if args.locally_exact => Scheme::locally_exact(rule, rule.default_policy())?,
        (_, None) => Scheme::classical(rule)?,
    };
    Ok(scheme)
}

fn solver_config(args: &SchemeArgs) -> std::result::Result<SolverConfig, Failure> {
    let cfg = SolverConfig::with_tol(args.tol);
    cfg.validate()?;
    Ok(cfg)
}

fn schedule(args: &IntegrateArgs) -> std::result::Result<Vec<f64>, Failure> {
    let base = match (&args.h, &args.schedule) {
        (Some(h), None) => vec![*h],
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            let mut hs = Vec::new();
            for line in text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
            {
                let h = line.parse::<f64>().map_err(|_| {
                    Failure::Config(format!("invalid step size '{line}' in {}", path.display()))
                })?;
                hs.push(h);
            }
            hs
        }
        (None, None) => return config("one of --h or --schedule is required"),
        (Some(_), Some(_)) => return config("--h and --schedule are exclusive"),
    };
    if base.is_empty() {
        return config("empty step schedule");
    }
    if let Some(h) = base.iter().find(|h| **h == 0.0 || !h.is_finite()) {
        return config(format!("step size must be nonzero and finite, got {h}"));
    }
    let steps = match (args.steps, args.end_time) {
        (Some(n), None) => n,
        (None, Some(t)) => steps_to_reach(&base, t)?,
        (None, None) => return config("one of --steps or --T is required"),
        (Some(_), Some(_)) => return config("--steps and --T are exclusive"),
    };
    if steps == 0 {
        return config("zero-step run");
    }
    Ok(base.iter().copied().cycle().take(steps).collect())
}

/// Number of cycled schedule entries whose sum lands on `t`.
fn steps_to_reach(base: &[f64], t: f64) -> std::result::Result<usize, Failure> {
    if !t.is_finite() {
        return config(format!("end time must be finite, got {t}"));
    }
    let tol = 1e-9 * t.abs().max(1.0);
    let (mut sum, mut n) = (0.0, 0usize);
    for h in base.iter().cycle() {
        if (sum - t).abs() <= tol {
            return Ok(n);
        }
        if h.signum() != t.signum() || (sum + h - t).abs() > (sum - t).abs() + tol && n > 0 {
            break;
        }
        sum += h;
        n += 1;
    }
    config(format!("the step sizes do not add up to T = {t}"))
}

fn open_output<'a>(
    path: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> std::result::Result<Box<dyn Write + 'a>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::Config(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(stdout),
    })
}

fn cmd_integrate(args: &IntegrateArgs, stdout: &mut dyn Write) -> CmdResult {
    let c = &args.common;
    if c.format == Some(Format::Json) {
        return config("integrate writes csv only");
    }
    let prob = lookup_problem(&c.problem)?;
    let scheme = build_scheme(c, &prob)?;
    let y0 = state(&prob, c.y0.as_deref())?;
    let cfg = solver_config(c)?;
    let hs = schedule(args)?;
    let sys = prob.system.as_ref();
    let (traj, failure) = integrate_partial(&scheme, System::Hamiltonian(sys), &y0, &hs, &cfg);
    let mut out = open_output(&c.output, stdout)?;
    let m = prob.dof();
    let mut header = vec!["n".to_string(), "t".to_string()];
    header.extend((1..=m).map(|i| format!("x{i}")));
    header.extend((1..=m).map(|i| format!("p{i}")));
    header.extend(["H", "iters", "residual"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    let energies = traj.energies.as_deref().unwrap_or(&[]);
    for (n, (t, y)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![n.to_string(), fmt_num(*t)];
        row.extend(y.iter().map(|v| fmt_num(*v)));
        row.push(
            energies
                .get(n)
                .map_or_else(|| "nan".into(), |e| fmt_num(*e)),
        );
        let (iters, res) = match n.checked_sub(1).and_then(|k| traj.reports.get(k)) {
            Some(r) => (r.iterations, r.residual),
            None => (0, 0.0),
        };
        row.push(iters.to_string());
        row.push(fmt_num(res));
        writeln!(out, "{}", row.join(","))?;
    }
    if let Some(e) = failure {
        writeln!(out, "# failed: {e}")?;
        out.flush()?;
        return Err(Failure::from(e));
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct OrderReport {
    slope: f64,
    errors: Vec<[f64; 2]>,
    fit_residual: f64,
}

#[derive(Serialize)]
struct DriftReport {
    drift: f64,
    argmax_step: usize,
}

fn write_json(path: &Option<PathBuf>, stdout: &mut dyn Write, value: &impl Serialize) -> CmdResult {
    let mut out = open_output(path, stdout)?;
    serde_json::to_writer(&mut out, value)
        .map_err(|e| Failure::Config(format!("i/o error: {e}")))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_order(args: &OrderArgs, stdout: &mut dyn Write) -> CmdResult {
    let c = &args.common;
    if c.format == Some(Format::Csv) {
        return config("order writes json only");
    }
    let prob = lookup_problem(&c.problem)?;
    let scheme = build_scheme(c, &prob)?;
    let y0 = state(&prob, c.y0.as_deref())?;
    let cfg = solver_config(c)?;
    let h_list = match &args.h {
        Some(s) => parse_list(s).map_err(Failure::Config)?,
        None => DEFAULT_ORDER_STEPS.to_vec(),
    };
    let est = convergence_order(
        &scheme,
        System::Hamiltonian(prob.system.as_ref()),
        &y0,
        args.end_time,
        &h_list,
        &cfg,
    )?;
    let report = OrderReport {
        slope: est.slope,
        errors: est.errors.iter().map(|&(h, e)| [h, e]).collect(),
        fit_residual: est.fit_residual,
    };
    write_json(&c.output, stdout, &report)
}

fn cmd_drift(args: &IntegrateArgs, stdout: &mut dyn Write) -> CmdResult {
    let c = &args.common;
    if c.format == Some(Format::Csv) {
        return config("drift writes json only");
    }
    let prob = lookup_problem(&c.problem)?;
    let scheme = build_scheme(c, &prob)?;
    let y0 = state(&prob, c.y0.as_deref())?;
    let cfg = solver_config(c)?;
    let hs = schedule(args)?;
    let sys = prob.system.as_ref();
    let (traj, failure) = integrate_partial(&scheme, System::Hamiltonian(sys), &y0, &hs, &cfg);
    if let Some(e) = failure {
        return Err(Failure::from(e));
    }
    let (drift, argmax_step) = energy_drift_argmax(&traj, sys);
    write_json(&c.output, stdout, &DriftReport { drift, argmax_step })
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> std::result::Result<bool, Failure> {
    let report = run_suite(args.suite, args.seed);
    let mut out = open_output(&args.output, stdout)?;
    writeln!(out, "suite {} seed {}", args.suite.name(), args.seed)?;
    for check in &report.checks {
        writeln!(out, "{check}")?;
    }
    let failed = report.checks.iter().filter(|c| !c.passed()).count();
    writeln!(
        out,
        "{}: {} of {} checks passed",
        if failed == 0 { "PASS" } else { "FAIL" },
        report.checks.len() - failed,
        report.checks.len()
    )?;
    out.flush()?;
    Ok(failed == 0)
}

fn cmd_list_problems(stdout: &mut dyn Write) -> CmdResult {
    for name in PROBLEM_NAMES {
        let p = registry(name).expect("registered");
        let y0: Vec<String> = p.default_y0.iter().map(|v| fmt_num(*v)).collect();
        writeln!(
            stdout,
            "{name}\tdof={}\ty0={}\t{}",
            p.dof(),
            y0.join(","),
            p.description
        )?;
    }
    Ok(())
}

fn cmd_list_schemes(stdout: &mut dyn Write) -> CmdResult {
    for rule in Rule::ALL {
        writeln!(
            stdout,
            "{}\tdefault-policy={}\t{}",
            rule.name(),
            rule.default_policy().name(),
            rule.description()
        )?;
    }
    Ok(())
}

fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => {
            return config(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))
        }
    };
    // The global pool can only be built once per process; later calls keep it.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Integrate(a) => cmd_integrate(a, stdout),
        Command::Order(a) => cmd_order(a, stdout),
        Command::Drift(a) => cmd_drift(a, stdout),
        Command::Verify(a) => match cmd_verify(a, stdout) {
            Ok(true) => Ok(()),
            Ok(false) => Err(Failure::Numerical(format!(
                "suite {} failed",
                a.suite.name()
            ))),
            Err(e) => Err(e),
        },
        Command::ListProblems => cmd_list_problems(stdout),
        Command::ListSchemes => cmd_list_schemes(stdout),
    });
    match result {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_NUMERICAL
        }
    }
}
