//! `bench`: run the Fredholm kernel regression benchmarks from the command line.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 on
//! numerical failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lfk_core::bench::{learning_curve, run_benchmark, BenchmarkConfig};
use lfk_core::data::{generate_pool, write_samples_csv, NoiseSpec, TargetFunction};
use lfk_core::model_selection::Method;
use lfk_core::Error;

#[derive(Parser)]
#[command(
    name = "bench",
    version,
    about = "Fredholm kernel regression benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark and write the per-cell MSE report.
    Run {
        #[command(flatten)]
        opts: ConfigArgs,
        /// JSON mirror of the report, including per-repetition records.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the benchmark and write test MSE against training size.
    Curve {
        #[command(flatten)]
        opts: ConfigArgs,
    },
    /// Write a seeded sample pool of one target function as CSV.
    GenData {
        #[arg(long = "fn")]
        function: TargetFunction,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        noise_variance: f64,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the fully resolved config as JSON and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long, value_delimiter = ',')]
    functions: Option<Vec<TargetFunction>>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long, value_delimiter = ',')]
    train_sizes: Option<Vec<usize>>,
    #[arg(long)]
    unlabeled_size: Option<usize>,
    #[arg(long)]
    test_size: Option<usize>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    noise_variance: Option<f64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    record_timing: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<BenchmarkConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                BenchmarkConfig::from_json(&text)?
            }
            None => BenchmarkConfig::default(),
        };
        if let Some(v) = &self.functions {
            cfg.functions = v.clone();
        }
        if let Some(v) = &self.methods {
            cfg.methods = v.clone();
        }
        if let Some(v) = &self.train_sizes {
            cfg.train_sizes = v.clone();
        }
        if let Some(v) = self.unlabeled_size {
            cfg.unlabeled_size = v;
        }
        if let Some(v) = self.test_size {
            cfg.test_size = v;
        }
        if let Some(v) = self.pool_size {
            cfg.pool_size = v;
        }
        if let Some(v) = self.noise_variance {
            cfg.noise_variance = v;
        }
        if let Some(v) = self.repetitions {
            cfg.repetitions = v;
        }
        if let Some(v) = self.master_seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.folds {
            cfg.grids.folds = v;
        }
        if self.record_timing {
            cfg.record_timing = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, contents)?,
        None => io::stdout().write_all(contents.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { opts, json } => {
            let cfg = opts.resolve()?;
            if opts.print_config {
                return write_output(None, &format!("{}\n", cfg.to_json_pretty()));
            }
            let report = run_benchmark(&cfg)?;
            write_output(opts.out.as_deref(), &report.to_csv_string())?;
            if let Some(path) = json {
                fs::write(path, report.to_json_string())?;
            }
        }
        Command::Curve { opts } => {
            let cfg = opts.resolve()?;
            if opts.print_config {
                return write_output(None, &format!("{}\n", cfg.to_json_pretty()));
            }
            let curve = learning_curve(&cfg)?;
            write_output(opts.out.as_deref(), &curve.to_csv_string())?;
        }
        Command::GenData {
            function,
            n,
            seed,
            noise_variance,
            out,
        } => {
            let noise = NoiseSpec::gaussian(noise_variance)?;
            let pool = generate_pool(function, n, noise, seed)?;
            let mut buf = Vec::new();
            write_samples_csv(&mut buf, &pool)?;
            write_output(
                out.as_deref(),
                std::str::from_utf8(&buf).expect("csv is ascii"),
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical { .. } => 2,
        _ => 1,
    }
}
