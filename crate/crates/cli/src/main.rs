//! `ncspectral`: reproducible runs over the noncommutative-torus workbench.
//!
//! Every run writes `results.csv` and `summary.json` to the output directory
//! and echoes the CSV on stdout. Exit codes: 0 success, 2 precondition
//! failure, 3 tolerance failure, 64 unknown subcommand or usage error,
//! 65 malformed configuration.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use ncspectral::Error;

use config::{GridSpec, ModeSpec, RunConfig, ThetaSpec};

const EXIT_PRECONDITION: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_CONFIG: u8 = 65;

#[derive(Parser, Debug)]
#[command(
    name = "ncspectral",
    version,
    about = "Spectral geometry experiments on the noncommutative torus"
)]
struct Cli {
    /// JSON config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving results.csv and summary.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker cap; falls back to the config, then NCSPECTRAL_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative tolerance for verification runs (exit 3 when exceeded).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Twisted Epstein series.
    #[command(subcommand)]
    Zeta(ZetaCommand),
    /// Diophantine classification and constructions.
    #[command(subcommand)]
    Dio(DioCommand),
    /// Spectral action, heat traces and constant terms.
    #[command(subcommand)]
    Action(ActionCommand),
    /// Operator identities.
    #[command(subcommand)]
    Op(OpCommand),
}

#[derive(Subcommand, Debug)]
enum ZetaCommand {
    /// Evaluate f_a(s) = Σ' P(k) e^{2πik·a} ‖k‖^{−s}.
    #[command(after_help = "CSV columns: n, P, a, s_re, s_im, value_re, value_im, est_error")]
    Eval(ZetaArgs),
    /// Residue at s = 0 of Σ' P(k) e^{2πik·a} ‖k‖^{−(s+shift)}.
    #[command(
        after_help = "CSV columns: n, P, a, shift, pole_present, residue, natural_shift, natural_residue\n\
        natural_shift = n + deg P is the only place a pole can occur."
    )]
    Residue(ZetaArgs),
}

#[derive(Args, Debug)]
struct ZetaArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Homogeneous polynomial such as "k1^2*k2^2 - 3*k1*k3^3".
    #[arg(long = "P")]
    p: Option<String>,
    /// Twist a, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Option<Vec<f64>>,
    /// Evaluation point "re[,im]"; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    s: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum DioCommand {
    /// Badly-approximable scan of Θ/2π with the u-search of the hypothesis.
    #[command(after_help = "CSV columns: u, violations, accepted")]
    Classify(DioClassifyArgs),
    /// Continued fraction beating a prescribed approximation profile.
    #[command(
        after_help = "CSV columns: k, a_next, q_bits, q, ln_residual, ln_bound, certified, exact\n\
        Row k certifies the convergent p_k/q_k; a_next is the quotient a_(k+1) chosen for it."
    )]
    Construct(DioConstructArgs),
}

#[derive(Args, Debug)]
struct DioClassifyArgs {
    #[arg(long)]
    n: Option<usize>,
    /// golden, zero, rational:p/q, jarnik:<profile>[@depth] or a JSON matrix.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    qmax: Option<u64>,
}

#[derive(Args, Debug)]
struct DioConstructArgs {
    /// power:α[:c], exp[:λ[:c]] or power-log:α:β[:c].
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum ActionCommand {
    /// Fit Tr Φ(D_A/Λ) over a Λ grid.
    #[command(after_help = "CSV columns: parameter, value, uncertainty\n\
        Rows: S(lambda=…) samples, c<j> for j = n..0, guard, cosmological_target.")]
    Fit(ActionArgs),
    /// ζ_{D_A}(0) − ζ_D(0) from the noncommutative integrals.
    #[command(
        name = "constant-term",
        after_help = "CSV columns: parameter, value_re, value_im, uncertainty\n\
        Rows: nc_integral_q<q>, constant_term, curvature_target (n = 4)."
    )]
    ConstantTerm(ActionArgs),
    /// Heat trace Tr e^{−tD_A²} over a t grid.
    #[command(
        after_help = "CSV columns: t, value_re, value_im, method, cutoff_radius, tail_bound, std_error"
    )]
    Heat(ActionArgs),
    /// Small-t correction Δ(t) of twisted heat traces for a Θ family.
    #[command(after_help = "CSV columns: theta, t, delta, baseline")]
    Correction(ActionArgs),
}

#[derive(Args, Debug)]
struct ActionArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Θ preset or JSON matrix; repeat for correction families.
    #[arg(long)]
    theta: Vec<String>,
    /// Cutoff: gaussian, super-gaussian or rational:r.
    #[arg(long)]
    profile: Option<String>,
    /// One-form mode "axis:k1,...,kn:re[,im]"; repeatable. The form used is
    /// the anti-selfadjoint part of the sum.
    #[arg(long = "mode", allow_hyphen_values = true)]
    modes: Vec<String>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_points: Option<usize>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_points: Option<usize>,
    /// exact, dense or stochastic (heat).
    #[arg(long)]
    method: Option<String>,
    /// Symbol expansion order (constant-term).
    #[arg(long)]
    order: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum OpCommand {
    /// Run operator-identity suites.
    #[command(
        after_help = "CSV columns: suite, checks, max_deviation, tolerance, passed\n\
        Suites: pure-gauge, covariance, gauge, square."
    )]
    Check(OpCheckArgs),
}

#[derive(Args, Debug)]
struct OpCheckArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    theta: Option<String>,
    /// Run every suite.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    suite: Vec<String>,
}

/// Flags that set part of a grid take the remaining fields from the config,
/// or from the command's default grid.
fn grid_override(
    base: Option<GridSpec>,
    default: GridSpec,
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
) -> Option<GridSpec> {
    if min.is_none() && max.is_none() && points.is_none() {
        return None;
    }
    let b = base.unwrap_or(default);
    Some(GridSpec {
        min: min.unwrap_or(b.min),
        max: max.unwrap_or(b.max),
        points: points.unwrap_or(b.points),
    })
}

fn parse_s(s: &str) -> Result<[f64; 2], Error> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Error::Config(format!("expected s as re[,im], got {s:?}"));
    let re = parts
        .first()
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    let im = match parts.get(1) {
        Some(x) => x.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.len() > 2 {
        return Err(bad());
    }
    Ok([re, im])
}

/// Flag values as a config overlay, plus the command name and op suites.
fn flags_to_config(cli: &Cli, base: &RunConfig) -> Result<(String, RunConfig, Vec<String>), Error> {
    let mut o = RunConfig {
        output_dir: cli.out.clone(),
        threads: cli.threads,
        seed: cli.seed,
        tolerance: cli.tolerance,
        ..Default::default()
    };
    let mut suites = Vec::new();
    let name = match &cli.command {
        Command::Zeta(z) => {
            let (name, args) = match z {
                ZetaCommand::Eval(a) => ("zeta eval", a),
                ZetaCommand::Residue(a) => ("zeta residue", a),
            };
            o.n = args.n;
            o.polynomial = args.p.clone();
            o.twist = args.a.clone();
            o.shift = args.shift;
            if !args.s.is_empty() {
                o.s = Some(
                    args.s
                        .iter()
                        .map(|s| parse_s(s))
                        .collect::<Result<_, _>>()?,
                );
            }
            name
        }
        Command::Dio(DioCommand::Classify(a)) => {
            o.n = a.n;
            o.theta = a.theta.as_deref().map(str::parse).transpose()?;
            o.delta = a.delta;
            o.c = a.c;
            o.qmax = a.qmax;
            "dio classify"
        }
        Command::Dio(DioCommand::Construct(a)) => {
            o.approximation = a.profile.clone();
            o.depth = a.depth;
            "dio construct"
        }
        Command::Action(cmd) => {
            let (name, a) = match cmd {
                ActionCommand::Fit(a) => ("action fit", a),
                ActionCommand::ConstantTerm(a) => ("action constant-term", a),
                ActionCommand::Heat(a) => ("action heat", a),
                ActionCommand::Correction(a) => ("action correction", a),
            };
            o.n = a.n;
            let thetas: Vec<ThetaSpec> = a
                .theta
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_, _>>()?;
            if name == "action correction" {
                o.thetas = (!thetas.is_empty()).then_some(thetas);
            } else if thetas.len() > 1 {
                return Err(Error::Config(
                    "only correction sweeps take several --theta values".into(),
                ));
            } else {
                o.theta = thetas.into_iter().next();
            }
            o.profile = a.profile.clone();
            if !a.modes.is_empty() {
                o.one_form = Some(
                    a.modes
                        .iter()
                        .map(|m| m.parse::<ModeSpec>())
                        .collect::<Result<_, _>>()?,
                );
            }
            let t_default = if name == "action correction" {
                commands::CORRECTION_GRID
            } else {
                commands::HEAT_GRID
            };
            o.lambda = grid_override(
                base.lambda,
                commands::FIT_GRID,
                a.lambda_min,
                a.lambda_max,
                a.lambda_points,
            );
            o.t = grid_override(base.t, t_default, a.t_min, a.t_max, a.t_points);
            o.method = a.method.clone();
            o.order = a.order;
            name
        }
        Command::Op(OpCommand::Check(a)) => {
            o.n = a.n;
            o.theta = a.theta.as_deref().map(str::parse).transpose()?;
            suites = if a.all || a.suite.is_empty() {
                commands::SUITES.iter().map(|s| s.to_string()).collect()
            } else {
                a.suite.clone()
            };
            "op check"
        }
    };
    Ok((name.to_string(), o, suites))
}

fn resolve_threads(cfg: &RunConfig) -> Result<Option<usize>, Error> {
    if let Some(t) = cfg.threads {
        return Ok(Some(t));
    }
    match std::env::var("NCSPECTRAL_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Error::Config(format!(
                "NCSPECTRAL_THREADS must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(None),
    }
}

fn error_exit(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::PolynomialSyntax(_) => EXIT_CONFIG,
        _ => EXIT_PRECONDITION,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let (name, overrides, suites) = flags_to_config(&cli, &cfg)?;
    cfg.overlay(&overrides);
    if let Some(t) = resolve_threads(&cfg)? {
        if t == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        cfg.threads = Some(t);
        // A second initialisation only happens in tests running several
        // commands in one process; the first pool stays in effect.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    let out_dir = cfg
        .output_dir
        .get_or_insert_with(|| PathBuf::from("."))
        .clone();
    let report = match name.as_str() {
        "zeta eval" => commands::zeta_eval(&mut cfg),
        "zeta residue" => commands::zeta_residue(&mut cfg),
        "dio classify" => commands::dio_classify(&mut cfg),
        "dio construct" => commands::dio_construct(&mut cfg),
        "action fit" => commands::action_fit(&mut cfg),
        "action constant-term" => commands::action_constant_term(&mut cfg),
        "action heat" => commands::action_heat(&mut cfg),
        "action correction" => commands::action_correction(&mut cfg),
        "op check" => commands::op_check(&mut cfg, &suites),
        _ => unreachable!("every parsed subcommand is dispatched"),
    }?;
    output::write(&out_dir, &name, &cfg, &report)
        .map_err(|e| Error::Domain(format!("cannot write to {}: {e}", out_dir.display())))?;
    print!("{}", report.table.to_csv());
    if report.passed {
        Ok(0)
    } else {
        eprintln!(
            "tolerance check failed; see {}",
            out_dir.join("summary.json").display()
        );
        Ok(EXIT_TOLERANCE)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = error_exit(&e);
            if code == EXIT_CONFIG {
                eprintln!("usage: ncspectral [--config FILE] <zeta|dio|action|op> <subcommand> [flags]; see --help");
            }
            ExitCode::from(code)
        }
    }
}
