use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qsl_core::harness::{
    self, corpus, report_from_csv, report_lines, run_sweep, write_records, write_sweep, Fault, SweepParam,
    VerifyOptions,
};
use qsl_core::{load_scenario, QslError};

#[derive(Parser)]
#[command(name = "qsl", version, about = "Speed limits for driven open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario, write the per-step CSV and print the bound.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Run the invariant suite on a scenario, or on the built-in corpus.
    Verify {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, hide = true, default_value = "none")]
        inject_fault: FaultArg,
    },
    /// Re-run a scenario once per parameter value.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// lambda, beta, gamma0 or dt
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute the bound from a trajectory CSV.
    Report {
        #[arg(long)]
        traj: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    None,
    TraceNormWithoutHalf,
    BrokenDetailedBalance,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Self {
        match f {
            FaultArg::None => Fault::None,
            FaultArg::TraceNormWithoutHalf => Fault::TraceNormWithoutHalf,
            FaultArg::BrokenDetailedBalance => Fault::BrokenDetailedBalance,
        }
    }
}

fn seed() -> Result<u64, QslError> {
    match std::env::var("QSL_SEED") {
        Err(_) => Ok(corpus::DEFAULT_SEED),
        Ok(s) => {
            let s = s.trim();
            let parsed = match s.strip_prefix("0x") {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => s.parse(),
            };
            parsed.map_err(|_| QslError::Validation(format!("QSL_SEED must be a 64-bit integer, got `{s}`")))
        }
    }
}

fn run(command: Command) -> Result<ExitCode, QslError> {
    match command {
        Command::Simulate {
            scenario,
            out,
            dt,
            lambda,
        } => {
            let mut sc = load_scenario(&scenario)?;
            if let Some(dt) = dt {
                sc = sc.with_dt(dt);
            }
            if let Some(lambda) = lambda {
                sc = sc.with_lambda(lambda);
            }
            sc.validate()?;
            let output = harness::simulate(&sc)?;
            write_records(&out, sc.dim, &output.records)?;
            for line in report_lines(&output.report, output.degeneracy_flags()) {
                println!("{line}");
            }
        }
        Command::Verify { scenario, inject_fault } => {
            let options = VerifyOptions {
                seed: seed()?,
                fault: inject_fault.into(),
            };
            let summary = match scenario {
                Some(path) => harness::verify_scenario(&load_scenario(&path)?, options),
                None => harness::verify_corpus(options),
            };
            println!("{summary}");
            if !summary.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => {
            let param: SweepParam = param.parse()?;
            let sc = load_scenario(&scenario)?;
            let rows = run_sweep(&sc, param, &values)?;
            write_sweep(&out, &rows)?;
            println!("rows={}", rows.len());
        }
        Command::Report { traj } => {
            let r = report_from_csv(&traj)?;
            for line in report_lines(&r.report, r.degeneracy_flags) {
                println!("{line}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
