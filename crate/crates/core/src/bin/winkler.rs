//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 configuration error, 3 solver failure, 4 partial result.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use winkler::continuation::{branch_switch, continue_branch, BifurcationPoint, BranchStatus, FreeParameter};
use winkler::linear::{kernel_analysis, scan_bifurcation_set};
use winkler::model::{double_point, Mode};
use winkler::newton::NewtonConfig;
use winkler::output::{csv_table, format_f64, to_json};
use winkler::reduction::{probe, ReductionContext};
use winkler::verify::{run_all, Level};
use winkler::{Error, Grid};

const EXIT_VERIFY: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "winkler", version, about = "Bifurcation analysis of a rod on a nonlinear Winkler foundation")]
struct Cli {
    /// File of `key = value` lines supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    output: Format,

    /// Write results here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sampled rays l_m (beta > 0) and their pairwise double points.
    Rays(RaysArgs),
    /// Kernel dimension and matched modes of the linearization.
    Kernel(KernelArgs),
    /// Scan a parameter window for the discrete bifurcation set.
    Scan(ScanArgs),
    /// Reduced-map probes around a double point: determinants and winding numbers.
    Reduce(ReduceArgs),
    /// Continue a pitchfork branch from a simple bifurcation point.
    Branch(BranchArgs),
    /// Run the built-in numerical checks.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct RaysArgs {
    #[arg(long, default_value_t = PI)]
    r: f64,
    #[arg(long, default_value_t = 4)]
    m_max: u32,
    #[arg(long, default_value_t = 3.0)]
    alpha_max: f64,
    /// Points per ray.
    #[arg(long, default_value_t = 32)]
    samples: usize,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = PI)]
    r: f64,
    #[arg(long, default_value_t = 201)]
    n: usize,
    /// Rank threshold; defaults to 10 h^2 scale.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, default_value_t = 0.1)]
    alpha_min: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 0.01)]
    beta_min: f64,
    #[arg(long, default_value_t = 0.3)]
    beta_max: f64,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, default_value_t = PI)]
    r: f64,
    #[arg(long, default_value_t = 61)]
    n: usize,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(long, default_value_t = 1)]
    m1: u32,
    #[arg(long, default_value_t = 2)]
    m2: u32,
    #[arg(long, default_value_t = PI)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma0: f64,
    /// Comma-separated offsets in alpha from the double point.
    #[arg(long, value_parser = parse_list, default_value = "0.01")]
    offsets: FloatList,
    /// Comma-separated slopes (beta - beta0)/(alpha - alpha0).
    #[arg(long, value_parser = parse_list, default_value = "0.3,1.0")]
    slopes: FloatList,
    #[arg(long, default_value_t = 201)]
    n: usize,
    #[arg(long, default_value_t = 1e-3)]
    radius: f64,
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct BranchArgs {
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Free parameter: alpha or beta.
    #[arg(long)]
    free: String,
    /// Beta of the bifurcation point when alpha is free.
    #[arg(long)]
    fixed_beta: Option<f64>,
    /// Alpha of the bifurcation point when beta is free.
    #[arg(long)]
    fixed_alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, default_value_t = 5e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1e-3)]
    t0: f64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    direction: i32,
    #[arg(long, default_value_t = PI)]
    r: f64,
    #[arg(long, default_value_t = 201)]
    n: usize,
    /// Keep every k-th sample of x in the output.
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "quick")]
    level: String,
}

#[derive(Clone, Debug)]
struct FloatList(Vec<f64>);

fn parse_list(s: &str) -> Result<FloatList, String> {
    s.split(',')
        .map(|item| item.trim().parse::<f64>().map_err(|e| format!("{item:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(FloatList)
}

/// Failure of a command, carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

/// Maps a library error raised while validating `field`.
fn field_error(field: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| match e {
        Error::NewtonFailed { .. } | Error::SingularSystem(_) | Error::IndeterminateDegree(_) => Failure {
            code: EXIT_SOLVER,
            message: e.to_string(),
        },
        other => Failure::config(format!("invalid {field}: {other}")),
    }
}

/// Successful output plus the exit code to report.
struct Report {
    text: String,
    code: u8,
}

impl Report {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn json_line<T: Serialize + ?Sized>(value: &T) -> String {
    to_json(value).expect("serializable output") + "\n"
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    csv_table(header, rows).expect("in-memory CSV")
}

fn grid(n: usize, r: f64) -> Result<Grid, Failure> {
    if n < 11 || n % 2 == 0 {
        return Err(Failure::config(format!("invalid --n: must be odd and >= 11, got {n}")));
    }
    Grid::new(n, r).map_err(field_error("--r"))
}

#[derive(Serialize)]
struct RayRow {
    kind: &'static str,
    m1: u32,
    m2: Option<u32>,
    alpha: f64,
    beta: f64,
}

fn rays(args: &RaysArgs, format: Format) -> Result<Report, Failure> {
    if args.m_max < 1 {
        return Err(Failure::config("invalid --m-max: must be >= 1"));
    }
    if !(args.alpha_max > 0.0 && args.alpha_max.is_finite()) {
        return Err(Failure::config(format!("invalid --alpha-max: must be > 0, got {}", args.alpha_max)));
    }
    if args.samples < 2 {
        return Err(Failure::config("invalid --samples: must be >= 2"));
    }
    let mut rows = Vec::new();
    for m in 1..=args.m_max {
        let mode = Mode::new(m, args.r).map_err(field_error("--r"))?;
        let start = -mode.c;
        if start >= args.alpha_max {
            continue;
        }
        for k in 1..=args.samples {
            let alpha = start + (args.alpha_max - start) * k as f64 / args.samples as f64;
            rows.push(RayRow {
                kind: "ray",
                m1: m,
                m2: None,
                alpha,
                beta: mode.ray_beta(alpha),
            });
        }
    }
    for m1 in 1..=args.m_max {
        for m2 in m1 + 1..=args.m_max {
            let dp = double_point(m1, m2, args.r).map_err(field_error("--r"))?;
            if dp.alpha0 <= args.alpha_max {
                rows.push(RayRow {
                    kind: "double",
                    m1,
                    m2: Some(m2),
                    alpha: dp.alpha0,
                    beta: dp.beta0,
                });
            }
        }
    }
    Ok(Report::ok(match format {
        Format::Json => json_line(&rows),
        Format::Csv => csv(
            &["kind", "m1", "m2", "alpha", "beta"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.kind.to_string(),
                        r.m1.to_string(),
                        r.m2.map(|m| m.to_string()).unwrap_or_default(),
                        format_f64(r.alpha),
                        format_f64(r.beta),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    }))
}

fn kernel(args: &KernelArgs, format: Format) -> Result<Report, Failure> {
    for (name, v) in [("--alpha", args.alpha), ("--beta", args.beta)] {
        if !v.is_finite() {
            return Err(Failure::config(format!("invalid {name}: must be finite")));
        }
    }
    let g = grid(args.n, args.r)?;
    let rep = kernel_analysis(args.alpha, args.beta, &g, args.threshold).map_err(field_error("--threshold"))?;
    Ok(Report::ok(match format {
        Format::Json => json_line(&rep),
        Format::Csv => {
            let mut row = vec![format_f64(rep.alpha), format_f64(rep.beta), rep.dim.to_string(), format_f64(rep.threshold)];
            row.extend(rep.singular_values.iter().map(|s| format_f64(*s)));
            row.push(format_f64(rep.gap_factor));
            row.push(rep.matched_modes.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(";"));
            csv(
                &["alpha", "beta", "dim", "threshold", "sigma_1", "sigma_2", "sigma_3", "gap_factor", "matched_modes"],
                &[row],
            )
        }
    }))
}

fn scan(args: &ScanArgs, format: Format) -> Result<Report, Failure> {
    let g = grid(args.n, args.r)?;
    let result = scan_bifurcation_set(
        (args.alpha_min, args.alpha_max),
        (args.beta_min, args.beta_max),
        args.resolution,
        &g,
    )
    .map_err(field_error("scan window"))?;
    Ok(Report::ok(match format {
        Format::Json => json_line(&result.cells),
        Format::Csv => csv(
            &["alpha", "beta", "sigma_min", "sigma_2", "dim"],
            &result
                .cells
                .iter()
                .map(|c| {
                    vec![
                        format_f64(c.alpha),
                        format_f64(c.beta),
                        format_f64(c.sigma_min),
                        format_f64(c.sigma_2),
                        c.dim.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    }))
}

fn reduce(args: &ReduceArgs, format: Format) -> Result<Report, Failure> {
    let g = grid(args.n, args.r)?;
    let dp = double_point(args.m1, args.m2, args.r).map_err(field_error("--m1/--m2"))?;
    let ctx = ReductionContext::new(dp, args.gamma0, g, NewtonConfig::with_tol(args.tol)).map_err(field_error("--gamma0/--tol"))?;
    if args.samples < 64 {
        return Err(Failure::config(format!("invalid --samples: must be >= 64, got {}", args.samples)));
    }
    if !(args.radius > 0.0 && args.radius <= ctx.xi_radius) {
        return Err(Failure::config(format!("invalid --radius: must lie in (0, {}]", ctx.xi_radius)));
    }
    let mut reports = Vec::new();
    for &offset in &args.offsets.0 {
        if !(offset != 0.0 && offset.abs() <= ctx.param_box) {
            return Err(Failure::config(format!("invalid --offsets: {offset} must be nonzero with |offset| <= {}", ctx.param_box)));
        }
        for &slope in &args.slopes.0 {
            if !((slope * offset).abs() <= ctx.param_box) {
                return Err(Failure::config(format!("invalid --slopes: {slope} leaves the parameter box at offset {offset}")));
            }
            reports.push(probe(&ctx, slope, offset, args.radius, args.samples).map_err(field_error("probe point"))?);
        }
    }
    let code = if reports.iter().any(|r| r.failed()) {
        EXIT_SOLVER
    } else if reports.iter().any(|r| r.status == "mismatch") {
        EXIT_VERIFY
    } else {
        0
    };
    let text = match format {
        Format::Json => json_line(&reports),
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
            csv(
                &["alpha", "beta", "slope", "det_closed_form", "det_numeric", "winding", "status"],
                &reports
                    .iter()
                    .map(|r| {
                        vec![
                            format_f64(r.alpha),
                            format_f64(r.beta),
                            format_f64(r.slope),
                            format_f64(r.det_closed_form),
                            opt(r.det_numeric),
                            r.winding.map(|w| w.to_string()).unwrap_or_default(),
                            r.status.clone(),
                        ]
                    })
                    .collect::<Vec<_>>(),
            )
        }
    };
    Ok(Report { text, code })
}

fn branch(args: &BranchArgs, format: Format) -> Result<Report, Failure> {
    let free: FreeParameter = args.free.parse().map_err(field_error("--free"))?;
    let g = grid(args.n, args.r)?;
    let mode = Mode::new(args.m, args.r).map_err(field_error("--m"))?;
    let (alpha, beta) = match (free, args.fixed_alpha, args.fixed_beta) {
        (FreeParameter::Alpha, None, Some(beta)) => (mode.ray_alpha(beta), beta),
        (FreeParameter::Beta, Some(alpha), None) => (alpha, mode.ray_beta(alpha)),
        (FreeParameter::Alpha, _, _) => return Err(Failure::config("invalid --fixed-beta: alpha-free branches need --fixed-beta only")),
        (FreeParameter::Beta, _, _) => return Err(Failure::config("invalid --fixed-alpha: beta-free branches need --fixed-alpha only")),
    };
    if !(args.dt > 0.0 && args.dt <= 0.05) {
        return Err(Failure::config(format!("invalid --dt: must lie in (0, 0.05], got {}", args.dt)));
    }
    let bif = BifurcationPoint {
        s: 0.0,
        alpha,
        beta,
        mode: args.m,
        similarity: 1.0,
    };
    let seed = branch_switch(&bif, args.direction, args.t0, free, args.gamma, &g).map_err(field_error("--t0/--direction/--gamma"))?;
    let result = continue_branch(seed, args.steps, args.dt).map_err(field_error("--dt"))?;
    let code = match result.status {
        BranchStatus::Complete => 0,
        BranchStatus::Stopped(ref reason) => {
            eprintln!("branch stopped early: {reason}");
            EXIT_PARTIAL
        }
    };
    let text = match format {
        Format::Json => result.to_json_lines(args.stride),
        Format::Csv => csv(
            &["t", "param_name", "param_value", "residual_norm"],
            &result
                .points
                .iter()
                .map(|p| {
                    vec![
                        format_f64(p.t),
                        free.name().to_string(),
                        format_f64(p.param),
                        format_f64(p.residual_norm),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Report { text, code })
}

fn verify(args: &VerifyArgs, format: Format) -> Result<Report, Failure> {
    let level: Level = args.level.parse().map_err(field_error("--level"))?;
    let outcomes = run_all(level);
    for o in &outcomes {
        eprintln!("{o}");
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if !failed.is_empty() {
        eprintln!("failed checks: {failed:?}");
    }
    let text = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Summary<'a> {
                level: Level,
                passed: bool,
                checks: &'a [winkler::verify::CheckOutcome],
            }
            json_line(&Summary {
                level,
                passed: failed.is_empty(),
                checks: &outcomes,
            })
        }
        Format::Csv => csv(
            &["id", "name", "passed", "detail"],
            &outcomes
                .iter()
                .map(|o| vec![o.id.to_string(), o.name.to_string(), o.passed.to_string(), o.detail.clone()])
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Report {
        text,
        code: if failed.is_empty() { 0 } else { EXIT_VERIFY },
    })
}

/// Inserts `--key value` pairs from the config file right after the
/// subcommand name, skipping keys also given on the command line.
fn merge_config(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| Failure::config("invalid --config: missing file name"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("invalid --config: {path}: {e}")))?;

    let command = Cli::command();
    let sub_index = args
        .iter()
        .enumerate()
        .skip(1)
        .find(|(i, a)| *i != pos + 1 && command.find_subcommand(a.as_str()).is_some())
        .map(|(i, _)| i)
        .ok_or_else(|| Failure::config("a subcommand is required"))?;
    let sub = command.find_subcommand(args[sub_index].as_str()).expect("found above");
    let known: Vec<String> = sub
        .get_arguments()
        .chain(command.get_arguments())
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();

    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("invalid --config: line {} is not `key = value`", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(Failure::config("invalid --config: config files cannot nest"));
        }
        let given = args.iter().any(|a| a == &format!("--{key}") || a.starts_with(&format!("--{key}=")));
        if given {
            continue;
        }
        if known.contains(&key) {
            injected.push(format!("--{key}"));
            injected.push(value.trim().to_string());
        } else if !Cli::command()
            .get_subcommands()
            .any(|s| s.get_arguments().any(|a| a.get_long() == Some(key.as_str())))
        {
            return Err(Failure::config(format!("invalid --config: unknown key {key:?} on line {}", lineno + 1)));
        }
    }
    let mut merged = args;
    merged.splice(sub_index + 1..sub_index + 1, injected);
    Ok(merged)
}

fn run() -> Result<Report, Failure> {
    let args = merge_config(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            return Err(Failure {
                code,
                message: e.render().to_string(),
            });
        }
    };
    let report = match &cli.command {
        Command::Rays(a) => rays(a, cli.output),
        Command::Kernel(a) => kernel(a, cli.output),
        Command::Scan(a) => scan(a, cli.output),
        Command::Reduce(a) => reduce(a, cli.output),
        Command::Branch(a) => branch(a, cli.output),
        Command::Verify(a) => verify(a, cli.output),
    }?;
    match &cli.out {
        Some(path) => fs::write(path, &report.text).map_err(|e| Failure::config(format!("invalid --out: {}: {e}", path.display())))?,
        None => io::stdout()
            .write_all(report.text.as_bytes())
            .map_err(|e| Failure::config(format!("cannot write output: {e}")))?,
    }
    Ok(report)
}

fn main() -> ExitCode {
    match run() {
        Ok(report) => ExitCode::from(report.code),
        Err(failure) => {
            if failure.code == 0 {
                print!("{}", failure.message);
            } else {
                eprintln!("{}", failure.message.trim_end());
            }
            ExitCode::from(failure.code)
        }
    }
}
