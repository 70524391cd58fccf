use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use quattrack::config::load_scenario;
use quattrack::output::{
    write_plot_data, write_trace, write_velocity_comparison, MetricsReport, TraceFormat,
};
use quattrack::sweep::{parse_values, run_sweep, thread_cap, write_summary, SweepParam};
use quattrack::verify::{self, Suite};
use quattrack::{case_study, simulate, Error, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "quattrack",
    version,
    about = "Attitude tracking on the embedded quaternion plant"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run one of the three preset case studies.
    CaseStudy {
        #[arg(long)]
        n: u8,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-panel error series.
        #[arg(long)]
        plot_data: bool,
    },
    /// Run the executable property checks.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Sweep one gain over a list of values.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long)]
        values: String,
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Verification,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NumericalAbort { .. } => 3,
        Error::Io { .. } => 4,
        _ => 2,
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// An unreadable config is a config error, not an output error.
fn load_config(path: &Path) -> Result<ScenarioConfig, Error> {
    load_scenario(path).map_err(|e| match e {
        Error::Io { path, source } => Error::ConfigParse(format!("{path}: {source}")),
        other => other,
    })
}

fn run_and_write(
    cfg: &ScenarioConfig,
    out: &Path,
    format: TraceFormat,
    plot_data: bool,
) -> Result<(quattrack::SimulationTrace, MetricsReport), Error> {
    let (trace, metrics) = simulate(cfg)?;
    ensure_dir(out)?;
    write_trace(&trace, out, format)?;
    if plot_data {
        write_plot_data(&trace, out)?;
    }
    Ok((trace, MetricsReport::from(&metrics)))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Simulate {
            config,
            out,
            format,
        } => {
            let cfg = load_config(&config)?;
            let format = match format {
                Format::Csv => TraceFormat::Csv,
                Format::Json => TraceFormat::Json,
            };
            let (_, report) = run_and_write(&cfg, &out, format, false)?;
            report.write(out.join("metrics.json"))?;
        }
        Cmd::CaseStudy { n, out, plot_data } => {
            let cfg = case_study(n)?;
            let (trace, mut report) = run_and_write(&cfg, &out, TraceFormat::Csv, plot_data)?;
            if n == 3 {
                let (robust, robust_metrics) = simulate(&case_study(2)?)?;
                write_velocity_comparison(&robust, &trace, out.join("velocity_comparison.csv"))?;
                if let (Some(a), Some(b)) = (report.rms_ew_20_40, robust_metrics.rms_ew) {
                    report.rms_ew_ratio_nonrobust_over_robust = Some(a / b);
                }
            }
            report.write(out.join("metrics.json"))?;
            println!("{}", report.to_json());
        }
        Cmd::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let checks = verify::run(suite);
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            if failed > 0 {
                return Err(Failure::Verification);
            }
        }
        Cmd::Sweep {
            param,
            values,
            base,
            out,
        } => {
            let param: SweepParam = param.parse()?;
            let values = parse_values(&values)?;
            let base = load_config(&base)?;
            let rows = run_sweep(&base, param, &values, thread_cap())?;
            ensure_dir(&out)?;
            write_summary(param, &rows, out.join("summary.csv"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
