use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floquet_spectra::report::Z_THRESHOLD;
use floquet_spectra::run::write_output;
use floquet_spectra::verify::checks_to_csv;
use floquet_spectra::{
    run_r2, run_sff, run_suite, run_wg_table, validate_circuit, CliError, ExperimentConfig, Report,
    RunOptions, Suite, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "floquet-spectra", version, about = "Spectral statistics of Floquet random circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo sampling.
    #[arg(long, env = "FLOQUET_SPECTRA_WORKERS")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral form factor K(t) over an ensemble.
    Sff {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Binned two-level correlation of quasi-energies.
    R2 {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Also write an SVG line chart.
        #[arg(long)]
        plot: bool,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
        /// Samples per ensemble for statistical checks.
        #[arg(long, default_value_t = 4000)]
        samples: usize,
    },
    /// Solve and print (or write) an exact Weingarten table.
    WgTable {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        max_p: usize,
        /// Directory for `wg-table-q<q>-p<max_p>.txt`; prints to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a circuit description for structural violations.
    ValidateCircuit {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    Ok(ExperimentConfig::from_toml(&read(path)?)?)
}

fn options(common: &Common, plot: bool) -> RunOptions {
    RunOptions {
        seed: common.seed,
        workers: common.workers,
        out_dir: common.out.clone(),
        plot,
    }
}

fn summarise(report: &Report) -> ExitCode {
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    let failing = report.rows.iter().filter(|r| !r.passes()).count();
    if failing == 0 {
        println!("pass: every |z| <= {Z_THRESHOLD}");
        ExitCode::SUCCESS
    } else {
        println!("fail: {failing} row(s) with |z| > {Z_THRESHOLD}");
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Sff { config, common } => {
            let cfg = load(&config)?;
            Ok(summarise(&run_sff(&cfg, &options(&common, false))?))
        }
        Command::R2 { config, common, plot } => {
            let cfg = load(&config)?;
            Ok(summarise(&run_r2(&cfg, &options(&common, plot))?))
        }
        Command::Verify { suite, common, samples } => {
            let opts = VerifyOptions {
                seed: common.seed.unwrap_or(0),
                workers: common.workers.unwrap_or(1).max(1),
                n_samples: samples,
            };
            let checks = run_suite(suite, &opts)?;
            let csv = checks_to_csv(&checks);
            print!("{csv}");
            if let Some(dir) = &common.out {
                write_output(&dir.join(format!("verify_{}.csv", suite.name())), &csv)?;
            }
            Ok(if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::WgTable { q, max_p, out } => {
            let path = out.map(|d| d.join(format!("wg-table-q{q}-p{max_p}.txt")));
            let text = run_wg_table(q, max_p, path.as_deref())?;
            match path {
                Some(p) => println!("wrote {}", p.display()),
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateCircuit { config } => {
            let violations = validate_circuit(&read(&config)?)?;
            if violations.is_empty() {
                println!("valid");
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &violations {
                    println!("{v}");
                }
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
