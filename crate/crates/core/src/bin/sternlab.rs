use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sternlab::cli::{
    cmd_validate, exit_code, parse_config_text, run_experiment, Experiment, OutputFormat, Overrides, Param, RunConfig,
    SweepSpec, Table, ValidateOptions,
};
use sternlab::Error;

#[derive(Parser)]
#[command(name = "sternlab", version, about = "Finite-size Stern-Gerlach measurement model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Branch overlap, trace distance and spin coherence over k and T
    DecoherenceCurve(RunArgs),
    /// Center-of-mass characteristic function and spin readout
    Pointer(RunArgs),
    /// Entropy of the effective spin-chain mixture
    Entropy(RunArgs),
    /// Entropy ledger of a measurement
    CollapseAudit(RunArgs),
    /// Overlap under the shrinking measurement time T(k) = c/sqrt(2k+1)
    ScalingStudy(RunArgs),
    /// Compare every closed form against the quadrature oracle
    Validate(ValidateArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sigma0: Option<f64>,
    /// Measurement time (defaults to t_D = 3 sigma0 / lambda)
    #[arg(long = "T", allow_hyphen_values = true)]
    time: Option<f64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Use the shrinking measurement time T(k) = c/sqrt(2k+1)
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// param:start:stop:count[:log], repeatable
    #[arg(long)]
    sweep: Vec<String>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Relative error injected into sigma0 on the analytic side (sensitivity check)
    #[arg(long, hide = true, default_value_t = 0.0)]
    perturb_sigma0: f64,
}

fn format_of(s: &Option<String>) -> sternlab::Result<Option<OutputFormat>> {
    s.as_deref().map(str::parse).transpose()
}

fn resolve(experiment: Experiment, args: &RunArgs) -> sternlab::Result<RunConfig> {
    let file = match &args.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
            Some(parse_config_text(&text)?)
        }
        None => None,
    };
    let values = [
        (Param::Lambda, args.lambda),
        (Param::Sigma0, args.sigma0),
        (Param::Time, args.time),
        (Param::K, args.k.map(|k| k as f64)),
        (Param::Alpha2, args.alpha2),
        (Param::Rho, args.rho),
        (Param::C, args.c),
    ]
    .into_iter()
    .filter_map(|(p, v)| v.map(|v| (p, v)))
    .collect();
    let sweeps = args
        .sweep
        .iter()
        .map(|s| SweepSpec::parse(s))
        .collect::<sternlab::Result<Vec<_>>>()?;
    let overrides = Overrides {
        values,
        sweeps,
        out: args.output.out.clone(),
        format: format_of(&args.output.format)?,
    };
    RunConfig::resolve(experiment, file, overrides)
}

fn emit(table: &Table, format: OutputFormat, out: &Option<PathBuf>) -> sternlab::Result<()> {
    let text = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> sternlab::Result<i32> {
    let (experiment, args) = match &cli.command {
        Command::DecoherenceCurve(a) => (Experiment::DecoherenceCurve, a),
        Command::Pointer(a) => (Experiment::Pointer, a),
        Command::Entropy(a) => (Experiment::Entropy, a),
        Command::CollapseAudit(a) => (Experiment::CollapseAudit, a),
        Command::ScalingStudy(a) => (Experiment::ScalingStudy, a),
        Command::Validate(v) => {
            let report = cmd_validate(ValidateOptions {
                sigma0_perturbation: v.perturb_sigma0,
            })?;
            let format = format_of(&v.output.format)?.unwrap_or_default();
            emit(&report.to_table(), format, &v.output.out)?;
            let failed = report.checks.iter().filter(|c| !c.passed()).count();
            eprintln!("validate: {} checks, {} failed", report.checks.len(), failed);
            return Ok(if report.passed() {
                exit_code::SUCCESS
            } else {
                exit_code::VALIDATION_FAILURE
            });
        }
    };
    let run = resolve(experiment, args)?;
    let table = run_experiment(&run)?;
    emit(&table, run.format, &run.out)?;
    Ok(exit_code::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit_code::CONFIG_ERROR as u8
            } else {
                0
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code::CONFIG_ERROR as u8)
        }
    }
}
