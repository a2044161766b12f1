//! Command-line front end: single intervals, interval tables, coverage
//! simulations, and tail checks, in csv, newline-delimited json, or
//! human-readable form.
//!
//! Exit codes: 0 when the command succeeds (and, for experiments, every
//! check passes), 1 when an experiment assertion fails, 2 on usage or
//! validation errors.

use clap::{Parser, Subcommand};

use crate::harness::{run_coverage_experiment, run_tail_check, ExperimentConfig};
use crate::limits::{interval, IntervalInputs, Method};
use crate::report::{render_coverage, render_intervals, render_tail, OutputFormat};
use crate::sampling::BoundedDistribution;

/// Parses `std::env::args`, runs the command, and returns the process exit
/// code.
pub fn run() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => match execute(cli) {
            Ok(code) => code,
            Err(message) => {
                eprintln!("error: {message}");
                2
            }
        },
        Err(err) => {
            // Help and version requests land here too; they print to stdout
            // and exit 0, true usage errors go to stderr and exit 2.
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            code
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "invseq",
    version,
    about = "Guaranteed-coverage confidence intervals for bounded means under inverse sampling",
    after_help = "Exit codes: 0 success / all checks passed, 1 experiment check failed, \
                  2 usage or validation error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Confidence interval for one observed stopping count
    Ci {
        /// Construction: hoeffding-general, hoeffding-bernoulli,
        /// massart-general, or massart-bernoulli
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Observed stopping count; at least ceil(gamma)
        #[arg(long)]
        n: u64,
        /// Crossing threshold, > 0; bernoulli methods need an integer
        #[arg(long)]
        gamma: f64,
        /// Risk level in (0, 1); coverage is guaranteed at least 1 - delta
        #[arg(long)]
        delta: f64,
        /// Output format: csv, json, or human
        #[arg(long, default_value = "human", value_parser = parse_format)]
        format: OutputFormat,
    },
    /// Intervals for every stopping count in an inclusive range
    Table {
        /// Construction, as for `ci`
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Crossing threshold, > 0; bernoulli methods need an integer
        #[arg(long)]
        gamma: f64,
        /// Risk level in (0, 1)
        #[arg(long)]
        delta: f64,
        /// First stopping count; at least ceil(gamma)
        #[arg(long)]
        n_from: u64,
        /// Last stopping count, inclusive; at least n-from
        #[arg(long)]
        n_to: u64,
        /// Output format: csv, json, or human
        #[arg(long, default_value = "human", value_parser = parse_format)]
        format: OutputFormat,
    },
    /// Monte Carlo coverage check of one method on one distribution
    Simulate {
        /// Distribution: bernoulli:<p>, uniform:<a>,<b>, or
        /// discrete:<v1>@<p1>,<v2>@<p2>,...
        #[arg(long, value_parser = parse_dist)]
        dist: BoundedDistribution,
        /// Crossing threshold, > 0
        #[arg(long)]
        gamma: f64,
        /// Risk level in (0, 1)
        #[arg(long)]
        delta: f64,
        /// Construction, as for `ci`; bernoulli methods need 0/1 draws
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Independent inverse-sampling runs, >= 1
        #[arg(long, default_value_t = 20_000)]
        trials: u32,
        /// Master seed; defaults to $INVSEQ_SEED, then 0
        #[arg(long)]
        seed: Option<u64>,
        /// Output format: csv, json, or human
        #[arg(long, default_value = "human", value_parser = parse_format)]
        format: OutputFormat,
    },
    /// Empirical stopping-count tails against the analytic bounds
    TailCheck {
        /// Distribution, as for `simulate`; mean must be below 1
        #[arg(long, value_parser = parse_dist)]
        dist: BoundedDistribution,
        /// Crossing threshold, > 0
        #[arg(long)]
        gamma: f64,
        /// Comma-separated relative deviations, each in (0, 1)
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        /// Independent inverse-sampling runs, >= 1
        #[arg(long, default_value_t = 50_000)]
        trials: u32,
        /// Master seed; defaults to $INVSEQ_SEED, then 0
        #[arg(long)]
        seed: Option<u64>,
        /// Output format: csv, json, or human
        #[arg(long, default_value = "human", value_parser = parse_format)]
        format: OutputFormat,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
        .map_err(|e: crate::limits::LimitError| e.to_string())
}

fn parse_dist(s: &str) -> Result<BoundedDistribution, String> {
    s.parse()
        .map_err(|e: crate::sampling::SamplingError| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("INVSEQ_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| format!("INVSEQ_SEED = '{text}' is not a 64-bit unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(std::env::VarError::NotUnicode(_)) => Err("INVSEQ_SEED is not valid unicode".into()),
    }
}

fn execute(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Ci {
            method,
            n,
            gamma,
            delta,
            format,
        } => {
            let inputs = IntervalInputs::new(n, gamma, delta).map_err(|e| e.to_string())?;
            let ci = interval(method, inputs).map_err(|e| e.to_string())?;
            print!("{}", render_intervals(&[ci], format));
            Ok(0)
        }
        Command::Table {
            method,
            gamma,
            delta,
            n_from,
            n_to,
            format,
        } => {
            if n_from > n_to {
                return Err(format!(
                    "empty range: n-from = {n_from} exceeds n-to = {n_to}"
                ));
            }
            let mut rows = Vec::with_capacity((n_to - n_from + 1) as usize);
            for n in n_from..=n_to {
                let inputs = IntervalInputs::new(n, gamma, delta).map_err(|e| e.to_string())?;
                rows.push(interval(method, inputs).map_err(|e| e.to_string())?);
            }
            print!("{}", render_intervals(&rows, format));
            Ok(0)
        }
        Command::Simulate {
            dist,
            gamma,
            delta,
            method,
            trials,
            seed,
            format,
        } => {
            let config = ExperimentConfig {
                distributions: vec![dist],
                gammas: vec![gamma],
                deltas: vec![delta],
                methods: vec![method],
                trials,
                master_seed: resolve_seed(seed)?,
            };
            let report = run_coverage_experiment(&config).map_err(|e| e.to_string())?;
            print!("{}", render_coverage(&report, format));
            Ok(if report.all_pass() { 0 } else { 1 })
        }
        Command::TailCheck {
            dist,
            gamma,
            epsilons,
            trials,
            seed,
            format,
        } => {
            let report = run_tail_check(&dist, gamma, &epsilons, trials, resolve_seed(seed)?)
                .map_err(|e| e.to_string())?;
            print!("{}", render_tail(&report, format));
            Ok(if report.any_failure() { 1 } else { 0 })
        }
    }
}
