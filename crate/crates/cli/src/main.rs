// SPDX-License-Identifier: Apache-2.0

//! `darboux`: check, solve and verify first-order PDE systems of Darboux type.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or input error,
//! 3 the iteration did not converge.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use darboux_core::harness::{self, ExprMap, HarnessError};
use darboux_core::{
    check_integrability, grid_for, parse, parse_spec_file, solve_darboux, validate_lenient, CheckOptions,
    DarbouxOptions, Grid, Init, PicardOptions, SolveError, SpecFile, ValidatedSystem,
};
use serde_json::json;

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "darboux", version, about = "Integrability checks and Picard solvers for Darboux-type PDE systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural and mixed-partial integrability conditions.
    Check(CheckArgs),
    /// Solve on the grid from the spec's [solve] section.
    Solve(SolveArgs),
    /// Measure how well closed-form candidates satisfy the system and its data.
    Verify(VerifyArgs),
    /// Solve on successively refined grids and report the observed order.
    Convergence(ConvergenceArgs),
}

#[derive(Args)]
struct SamplingArgs {
    /// Number of sample points.
    #[arg(long, default_value_t = 4096)]
    samples: usize,
    /// Half-width of the sampling box in every unknown.
    #[arg(long, default_value_t = 1.0)]
    u_radius: f64,
}

#[derive(Args)]
struct OutputArgs {
    /// Print machine-readable JSON instead of text tables.
    #[arg(long)]
    json: bool,
    /// Also write the report to this file.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Override the point count per axis (one value for all axes, or one per axis).
    #[arg(long, value_delimiter = ',', value_name = "N")]
    points: Option<Vec<usize>>,
    /// Override the half-width per axis (one value for all axes, or one per axis).
    #[arg(long, value_delimiter = ',', value_name = "H")]
    halfwidth: Option<Vec<f64>>,
}

#[derive(Args)]
struct IterationArgs {
    /// Picard tolerance on the sup-norm update (default: the spec's [picard] tol).
    #[arg(long)]
    tol: Option<f64>,
    /// Maximum Picard sweeps (default: the spec's [picard] max_iter).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Pass threshold factor c in c * (spacing^2 + tol) for equation defects.
    #[arg(long, default_value_t = 10.0)]
    delta_tol_factor: f64,
    #[arg(long, value_enum, default_value_t = InitArg::Data)]
    init: InitArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Data,
    Zeros,
}

#[derive(Args)]
struct CheckArgs {
    spec: PathBuf,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Relative tolerance of the identity.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SolveArgs {
    spec: PathBuf,
    /// Write the grid solution as CSV.
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    output_csv: Option<PathBuf>,
    #[command(flatten)]
    iteration: IterationArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Solve even if the integrability check fails.
    #[arg(long)]
    skip_check: bool,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Compare the solution against closed-form expressions (TOML: component = "expr").
    #[arg(long, value_name = "FILE")]
    reference: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    spec: PathBuf,
    /// Candidate solution (TOML: component = "expr").
    #[arg(long, value_name = "FILE")]
    candidate: PathBuf,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Largest residual that counts as a pass.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ConvergenceArgs {
    spec: PathBuf,
    /// Closed-form reference solution (TOML: component = "expr").
    #[arg(long, value_name = "FILE")]
    reference: PathBuf,
    /// Number of grid levels, each halving the spacing.
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[command(flatten)]
    iteration: IterationArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// An error carrying its exit code.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

fn input<E: Into<anyhow::Error>>(e: E) -> Exit {
    Exit(EXIT_INPUT, e.into())
}

fn solve_failure(e: SolveError) -> Exit {
    let code = if e.is_non_convergence() { EXIT_NO_CONVERGENCE } else { EXIT_INPUT };
    Exit(code, e.into())
}

fn load_spec(path: &Path) -> Result<(SpecFile, ValidatedSystem), Exit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)?;
    let file = parse_spec_file(&text).with_context(|| format!("parsing {}", path.display())).map_err(input)?;
    let sys = validate_lenient(&file.system).with_context(|| format!("validating {}", path.display())).map_err(input)?;
    Ok((file, sys))
}

fn per_axis<T: Copy>(values: &[T], n: usize, what: &str) -> Result<Vec<T>> {
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        k if k == n => Ok(values.to_vec()),
        k => bail!("--{what} takes 1 or {n} values, got {k}"),
    }
}

fn build_grid(file: &SpecFile, sys: &ValidatedSystem, args: &GridArgs) -> Result<Grid, Exit> {
    let n = sys.n();
    let solve = file.solve.as_ref();
    let half_widths = match (&args.halfwidth, solve) {
        (Some(h), _) => per_axis(h, n, "halfwidth").map_err(input)?,
        (None, Some(s)) => s.half_widths.clone(),
        (None, None) => return Err(input(anyhow!("the spec has no [solve] section; pass --halfwidth and --points"))),
    };
    let points = match (&args.points, solve) {
        (Some(p), _) => per_axis(p, n, "points").map_err(input)?,
        (None, Some(s)) => s.points.clone(),
        (None, None) => return Err(input(anyhow!("the spec has no [solve] section; pass --halfwidth and --points"))),
    };
    grid_for(sys, &half_widths, &points).map_err(input)
}

fn load_exprs(path: &Path) -> Result<ExprMap, Exit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)?;
    parse_expr_table(&text).with_context(|| format!("parsing {}", path.display())).map_err(input)
}

/// Reads a TOML table of `component = "expression"` pairs.
fn parse_expr_table(text: &str) -> Result<ExprMap> {
    let table: toml::Table = text.parse()?;
    table
        .into_iter()
        .map(|(k, v)| {
            let src = v.as_str().ok_or_else(|| anyhow!("`{k}` must be a string expression"))?;
            let e = parse(src).with_context(|| format!("expression for `{k}`"))?;
            Ok((k, e))
        })
        .collect()
}

fn harness_failure(e: HarnessError) -> Exit {
    match e {
        HarnessError::Level { source, level, points } => {
            let code = if source.is_non_convergence() { EXIT_NO_CONVERGENCE } else { EXIT_INPUT };
            Exit(code, anyhow!("level {level} ({points:?} points): {source}"))
        }
        other => input(other),
    }
}

fn emit(output: &OutputArgs, text: &str, value: serde_json::Value) -> Result<(), Exit> {
    let body = if output.json {
        serde_json::to_string_pretty(&value).map_err(input)? + "\n"
    } else {
        text.to_string()
    };
    print!("{body}");
    if let Some(path) = &output.report {
        fs::write(path, &body).with_context(|| format!("writing {}", path.display())).map_err(input)?;
    }
    Ok(())
}

fn picard_options(file: &SpecFile, args: &IterationArgs) -> DarbouxOptions {
    DarbouxOptions {
        picard: PicardOptions {
            tol: args.tol.unwrap_or(file.picard.tol),
            max_iter: args.max_iter.unwrap_or(file.picard.max_iter),
            init: match args.init {
                InitArg::Data => Init::DataExtension,
                InitArg::Zeros => Init::Zeros,
            },
            ..PicardOptions::default()
        },
        delta_tol_factor: args.delta_tol_factor,
    }
}

fn check(args: CheckArgs) -> Result<u8, Exit> {
    let (file, sys) = load_spec(&args.spec)?;
    let grid = build_grid(&file, &sys, &args.grid)?;
    let opts = CheckOptions {
        x_radius: grid.axes().iter().map(|a| a.half_width).collect(),
        u_radius: args.sampling.u_radius,
        samples: args.sampling.samples,
        tol: args.tol,
    };
    let report = check_integrability(&sys, &opts).map_err(input)?;
    let text = report::system_summary(&sys) + &report::integrability(&report);
    emit(&args.output, &text, json!({ "integrability": report }))?;
    Ok(if report.pass { 0 } else { EXIT_FAIL })
}

fn solve(args: SolveArgs) -> Result<u8, Exit> {
    let (file, sys) = load_spec(&args.spec)?;
    let grid = build_grid(&file, &sys, &args.grid)?;
    let mut text = report::system_summary(&sys);
    let mut check_json = serde_json::Value::Null;
    if sys.is_overdetermined() || !sys.dependency_violations().is_empty() {
        let opts = CheckOptions {
            x_radius: grid.axes().iter().map(|a| a.half_width).collect(),
            u_radius: args.sampling.u_radius,
            samples: args.sampling.samples,
            tol: 1e-10,
        };
        let report = check_integrability(&sys, &opts).map_err(input)?;
        text.push_str(&report::integrability(&report));
        check_json = serde_json::to_value(&report).map_err(input)?;
        if !report.pass && !args.skip_check {
            text.push_str("not solving a system that fails the integrability check (use --skip-check to force)\n");
            emit(&args.output, &text, json!({ "integrability": check_json, "solved": false }))?;
            return Ok(EXIT_FAIL);
        }
    }

    let opts = picard_options(&file, &args.iteration);
    let sol = solve_darboux(&sys, &grid, &opts).map_err(solve_failure)?;
    if let Some(c) = &sol.solution.constants {
        let radius: f64 = grid.axes().iter().map(|a| a.half_width).sum();
        if radius > c.sigma {
            eprintln!(
                "warning: the box reaches 1-norm radius {radius} beyond the estimated existence radius sigma = {:.3e}; \
                 convergence there is not covered by the contraction estimate",
                c.sigma
            );
        }
    }
    text.push_str(&report::solution(&sol));

    let mut errors_json = serde_json::Value::Null;
    if let Some(path) = &args.reference {
        let reference = load_exprs(path)?;
        let errors = harness::error_report(&sol.solution, &reference).map_err(harness_failure)?;
        text.push_str(&report::errors(&errors));
        errors_json = serde_json::to_value(&errors).map_err(input)?;
    }
    if let Some(path) = &args.output_csv {
        let csv = harness::write_csv(&sol.solution, &sys.declared_components()).map_err(input)?;
        fs::write(path, csv).with_context(|| format!("writing {}", path.display())).map_err(input)?;
    }
    let value = json!({
        "integrability": check_json,
        "solved": true,
        "grid": sol.solution.grid,
        "iterations": sol.solution.iterations,
        "final_update": sol.solution.final_update,
        "constants": sol.solution.constants,
        "delta": sol.delta,
        "consistency": sol.consistency,
        "subsystems": sol.subsystems.iter().map(|(axis, s)| json!({
            "axis": axis,
            "iterations": s.solution.iterations,
            "final_update": s.solution.final_update,
            "pass": s.pass(),
        })).collect::<Vec<_>>(),
        "errors": errors_json,
        "pass": sol.pass(),
    });
    emit(&args.output, &text, value)?;
    Ok(if sol.pass() { 0 } else { EXIT_FAIL })
}

fn verify(args: VerifyArgs) -> Result<u8, Exit> {
    let (file, sys) = load_spec(&args.spec)?;
    let grid = build_grid(&file, &sys, &args.grid)?;
    let candidate = load_exprs(&args.candidate)?;
    let radius: Vec<f64> = grid.axes().iter().map(|a| a.half_width).collect();
    let report = harness::candidate_residual(&sys, &candidate, &radius, args.samples).map_err(harness_failure)?;
    let pass = report.max() <= args.tol;
    let text = report::candidate(&report, args.tol);
    emit(&args.output, &text, json!({ "candidate": report, "max_residual": report.max(), "tol": args.tol, "pass": pass }))?;
    Ok(if pass { 0 } else { EXIT_FAIL })
}

fn convergence(args: ConvergenceArgs) -> Result<u8, Exit> {
    let (file, sys) = load_spec(&args.spec)?;
    let grid = build_grid(&file, &sys, &args.grid)?;
    let reference = load_exprs(&args.reference)?;
    let opts = picard_options(&file, &args.iteration);
    let report = harness::convergence_study(&sys, &grid, args.levels, &reference, &opts).map_err(harness_failure)?;
    emit(&args.output, &report::convergence(&report), json!({ "convergence": report }))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => check(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Convergence(a) => convergence(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
