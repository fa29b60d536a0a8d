//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid cycle, 2 bad flags or malformed input,
//! 3 I/O failure, 10..=14 construction failure (see [`FailureReason::exit_code`]).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::Error;
use crate::experiments::{scaling_bench, sweep, SweepConfig};
use crate::geometry::{alpha_p, LpExponent};
use crate::hamiltonian::{verify_cycle, FailureReason};
use crate::instance::{resolve_radius, sample_points, threshold_radius, InstanceConfig, RadiusSpec};
use crate::io::{fmt_significant, read_cycle_file, read_points_file, write_cycle_file, write_points_file};
use crate::pipeline::{find_hamiltonian_cycle, KSelection, PipelineOptions};
use crate::tessellation::KSearch;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_CYCLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rgg-ham", version, about = "Hamiltonian cycles in random geometric graphs")]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample uniform points and write them as CSV.
    Gen(GenArgs),
    /// Build a Hamiltonian cycle on a points file.
    Ham(HamArgs),
    /// Check a cycle file against a points file.
    Verify(VerifyArgs),
    /// Success rates across radius multipliers.
    Sweep(SweepArgs),
    /// Median pipeline time as n grows.
    Bench(BenchArgs),
    /// Area of the unit lp ball.
    #[command(allow_negative_numbers = true)]
    Alpha { p: LpExponent },
}

#[derive(Debug, Args)]
#[command(group(
    clap::ArgGroup::new("radius_choice").required(true).multiple(false).args(["radius", "mult", "eps_above", "eps_below"])
))]
pub struct GenArgs {
    #[arg(short = 'n')]
    pub n: usize,
    #[arg(short = 'p', default_value = "2")]
    pub p: LpExponent,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Multiple of the connectivity threshold.
    #[arg(long)]
    pub mult: Option<f64>,
    #[arg(long)]
    pub eps_above: Option<f64>,
    #[arg(long)]
    pub eps_below: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HamArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(short = 'p', default_value = "2")]
    pub p: LpExponent,
    #[arg(short = 'r')]
    pub r: f64,
    #[arg(short = 'o')]
    pub out: PathBuf,
    /// Cells per square side; chosen automatically when absent.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub cycle: PathBuf,
    #[arg(short = 'p', default_value = "2")]
    pub p: LpExponent,
    #[arg(short = 'r')]
    pub r: f64,
    /// Relative slack: edges up to `r * (1 + tol)` pass.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(short = 'n', value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(short = 'p', default_value = "2")]
    pub p: LpExponent,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub mult: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// 0 uses one worker per core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// CSV destination; stdout when absent.
    #[arg(short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(short = 'n', value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(short = 'p', default_value = "2")]
    pub p: LpExponent,
    #[arg(long, default_value_t = 2.0)]
    pub mult: f64,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

struct Ctx<'a> {
    json: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

type CmdResult = Result<i32, Error>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let mut ctx = Ctx { json: cli.json, out, err };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&mut ctx, a),
        Command::Ham(a) => cmd_ham(&mut ctx, a),
        Command::Verify(a) => cmd_verify(&mut ctx, a),
        Command::Sweep(a) => cmd_sweep(&mut ctx, a),
        Command::Bench(a) => cmd_bench(&mut ctx, a),
        Command::Alpha { p } => cmd_alpha(&mut ctx, p),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e}");
            error_code(&e)
        }
    }
}

fn cmd_gen(ctx: &mut Ctx, a: GenArgs) -> CmdResult {
    let radius = match (a.radius, a.mult, a.eps_above, a.eps_below) {
        (Some(r), ..) => RadiusSpec::Explicit(r),
        (_, Some(c), ..) => RadiusSpec::MultipleOfThreshold(c),
        (_, _, Some(e), _) => RadiusSpec::EpsilonAbove(e),
        (.., Some(e)) => RadiusSpec::EpsilonBelow(e),
        _ => unreachable!("clap requires one radius flag"),
    };
    let cfg = InstanceConfig::new(a.n, a.p, radius, a.seed)?;
    let r = resolve_radius(&cfg)?;
    let vs = sample_points(&cfg)?;
    write_points_file(&a.out, &vs)?;
    let thr = threshold_radius(a.n, a.p);
    if ctx.json {
        writeln!(ctx.err, "{}", json!({ "n": a.n, "p": a.p.to_string(), "r": r, "threshold": thr, "seed": a.seed }))?;
    } else {
        writeln!(ctx.err, "r = {}", fmt_significant(r, 15))?;
        writeln!(ctx.err, "threshold_radius = {}", fmt_significant(thr, 15))?;
    }
    Ok(EXIT_OK)
}

fn cmd_ham(ctx: &mut Ctx, a: HamArgs) -> CmdResult {
    let vs = read_points_file(&a.points)?;
    let k = match a.k {
        Some(k) => KSelection::Fixed(k),
        None => KSelection::Auto(KSearch::default()),
    };
    let run = find_hamiltonian_cycle(&vs, a.r, a.p, PipelineOptions { k, verify_tolerance: 0.0 })?;
    match &run.outcome {
        Ok(built) => {
            write_cycle_file(&a.out, built.cycle.as_slice())?;
            let k = run.tessellation.as_ref().map(|t| t.k());
            if ctx.json {
                writeln!(ctx.out, "{}", json!({ "n": run.n, "k": k, "valid": true, "stats": built.stats }))?;
            } else {
                writeln!(ctx.out, "cycle through {} vertices written to {}", run.n, a.out.display())?;
            }
            Ok(EXIT_OK)
        }
        Err(failure) => {
            writeln!(ctx.out, "{}", serde_json::to_string(failure)?)?;
            Ok(failure.reason.exit_code())
        }
    }
}

fn cmd_verify(ctx: &mut Ctx, a: VerifyArgs) -> CmdResult {
    let vs = read_points_file(&a.points)?;
    let cycle = read_cycle_file(&a.cycle)?;
    if cycle.len() != vs.len() {
        return Err(Error::Malformed(format!(
            "cycle lists {} vertices but the points file has {}",
            cycle.len(),
            vs.len()
        )));
    }
    if !(a.tol.is_finite() && a.tol >= 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance {} must be finite and nonnegative", a.tol)));
    }
    let report = verify_cycle(&vs, a.r, a.p, &cycle, a.r * a.tol);
    writeln!(ctx.out, "{}", serde_json::to_string(&report)?)?;
    Ok(if report.valid { EXIT_OK } else { EXIT_INVALID_CYCLE })
}

fn cmd_sweep(ctx: &mut Ctx, a: SweepArgs) -> CmdResult {
    let cfg = SweepConfig {
        ns: a.n,
        p: a.p,
        multipliers: a.mult,
        trials: a.trials,
        base_seed: a.seed,
        workers: a.workers,
        k_search: KSearch::default(),
    };
    let report = sweep(&cfg)?;
    match (&a.out, ctx.json) {
        (Some(path), _) => {
            report.write_csv(std::fs::File::create(path)?)?;
            if ctx.json {
                writeln!(ctx.out, "{}", report.to_json()?)?;
            }
        }
        (None, true) => writeln!(ctx.out, "{}", report.to_json()?)?,
        (None, false) => report.write_csv(&mut *ctx.out)?,
    }
    Ok(EXIT_OK)
}

fn cmd_bench(ctx: &mut Ctx, a: BenchArgs) -> CmdResult {
    let table = scaling_bench(&a.n, a.p, a.mult, a.trials, a.seed)?;
    if ctx.json {
        writeln!(ctx.out, "{}", serde_json::to_string_pretty(&table)?)?;
        return Ok(EXIT_OK);
    }
    writeln!(ctx.out, "p = {}, multiplier = {}, k = {}", table.p, table.multiplier, table.k)?;
    writeln!(ctx.out, "{:>10} {:>12} {:>8} {:>12}", "n", "r", "cycles", "median_ms")?;
    for row in &table.rows {
        writeln!(
            ctx.out,
            "{:>10} {:>12.6} {:>8} {:>12.3}",
            row.n,
            row.r,
            format!("{}/{}", row.cycle_verified, row.trials),
            row.median_ms
        )?;
    }
    for (w, ratio) in table.rows.windows(2).zip(&table.ratios) {
        writeln!(ctx.out, "T({})/T({}) = {:.3}", w[1].n, w[0].n, ratio)?;
    }
    Ok(EXIT_OK)
}

fn cmd_alpha(ctx: &mut Ctx, p: LpExponent) -> CmdResult {
    let a = fmt_significant(alpha_p(p), 15);
    if ctx.json {
        writeln!(ctx.out, "{}", json!({ "p": p.to_string(), "alpha": alpha_p(p) }))?;
    } else {
        writeln!(ctx.out, "{a}")?;
    }
    Ok(EXIT_OK)
}

/// Exit code for each construction failure, for help text and scripts.
pub fn failure_exit_codes() -> Vec<(FailureReason, i32)> {
    FailureReason::ALL.iter().map(|&r| (r, r.exit_code())).collect()
}
