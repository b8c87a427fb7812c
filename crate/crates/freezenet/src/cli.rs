//! Subcommand implementations behind the `freezenet` binary.
//!
//! Exit codes are a stable contract: 0 success, 1 runtime failure,
//! 2 usage or config error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::harness::{
    histories_to_jsonl, render_aggregate_csv, render_significance_csv, run_transfer_experiment,
    run_xor_sweep, write_atomic, write_manifest, ExperimentConfig, HarnessError, SweepResult,
};
use crate::theory::{
    enumerate_representable, mc_representable, prob_representable_2d, prob_representable_hd,
    Criterion, ExactProb, TheoryError,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<TheoryError> for CliError {
    fn from(e: TheoryError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// An inclusive `A..B` range (or a single value) for `--n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitRange {
    pub start: u32,
    pub end: u32,
}

impl FromStr for UnitRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |part: &str| {
            part.parse::<u32>()
                .map_err(|_| format!("expected an integer, got {part:?}"))
        };
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if start == 0 || end < start {
            return Err(format!("range {s:?} must be 1 <= A <= B"));
        }
        Ok(UnitRange { start, end })
    }
}

#[derive(Parser, Debug)]
#[command(name = "freezenet", version, about = "Sign-frozen training, polarity transfer, and exact XOR representability bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Output directory; falls back to $PF_OUT_DIR, then "results".
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Bound on parallel trial workers.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Override the config's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print per-cell progress.
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact representability probabilities over a range of hidden sizes.
    Theory {
        /// Hidden-unit counts, e.g. `--n 1..30` or `--n 15`.
        #[arg(long)]
        n: UnitRange,
        /// Input dimension (>= 2).
        #[arg(long)]
        d: u32,
        /// Also run this many Monte Carlo trials per row (0 = exact only).
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value = "full")]
        criterion: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the CSV here (stdout always gets a copy).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimates with Wilson confidence intervals.
    Mc {
        #[arg(long)]
        n: UnitRange,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value = "full")]
        criterion: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Confidence level of the Wilson interval.
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive enumeration oracle for small pattern spaces.
    Enumerate {
        #[arg(long)]
        n: UnitRange,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value = "full")]
        criterion: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// XOR sweep from an experiment config file.
    Xor {
        #[arg(long)]
        config: PathBuf,
        /// Shrink the run to 5 trials and 20 epochs.
        #[arg(long)]
        quick: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Transfer experiment from an experiment config file.
    Transfer {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        quick: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_criterion(s: &str) -> Result<Criterion, CliError> {
    Criterion::from_str(s).map_err(|e| CliError::Usage(format!("--criterion: {e}")))
}

/// Exact probability for the criterion: the full-pattern count depends
/// on the dimension, while the triplet criterion marginalizes the
/// irrelevant dimensions away and matches the 2-D curve at any `d`.
fn exact_for(n: u32, d: u32, criterion: Criterion) -> Result<ExactProb, TheoryError> {
    match criterion {
        Criterion::DistinctFullPatterns => prob_representable_hd(n, d),
        Criterion::DistinctTriplets => prob_representable_2d(n),
    }
}

pub const THEORY_CSV_HEADER: &str = "n,d,prob_exact,prob_mc,mc_ci_lo,mc_ci_hi,criterion";

pub fn theory_csv(
    range: UnitRange,
    d: u32,
    trials: u64,
    criterion: Criterion,
    seed: u64,
    confidence: f64,
) -> Result<String, CliError> {
    let mut out = String::from(THEORY_CSV_HEADER);
    out.push('\n');
    for n in range.start..=range.end {
        let exact = exact_for(n, d, criterion)?;
        let (mc, lo, hi) = if trials > 0 {
            let est = mc_representable(n, d, trials, seed, criterion, confidence)?;
            (
                est.estimate.to_string(),
                est.ci_low.to_string(),
                est.ci_high.to_string(),
            )
        } else {
            (String::new(), String::new(), String::new())
        };
        writeln!(
            out,
            "{n},{d},{},{mc},{lo},{hi},{}",
            exact.to_f64(),
            criterion.as_str()
        )
        .expect("string write cannot fail");
    }
    Ok(out)
}

pub fn enumerate_csv(range: UnitRange, d: u32, criterion: Criterion) -> Result<String, CliError> {
    let mut out = String::from("n,d,prob_exact,numerator,denominator,criterion\n");
    for n in range.start..=range.end {
        let p = enumerate_representable(n, d, criterion)?;
        writeln!(
            out,
            "{n},{d},{},{},{},{}",
            p.to_f64(),
            p.numer(),
            p.denom(),
            criterion.as_str()
        )
        .expect("string write cannot fail");
    }
    Ok(out)
}

fn resolve_out_dir(out: &Option<PathBuf>) -> PathBuf {
    out.clone()
        .or_else(|| std::env::var_os("PF_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("output dir {}: {e}", dir.display())))
}

fn maybe_write(out: &Option<PathBuf>, csv: &str) -> Result<(), CliError> {
    if let Some(path) = out {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                ensure_dir(parent)?;
            }
        }
        write_atomic(path, csv.as_bytes()).map_err(CliError::from)?;
    }
    Ok(())
}

fn load_config(path: &Path, quick: bool, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig::load(path)?;
    if quick {
        config.trials = config.trials.min(5);
        config.epochs = config.epochs.min(20);
    }
    if let Some(seed) = seed {
        config.seed_base = seed;
    }
    config.validate()?;
    Ok(config)
}

fn summary_table(sweep: &SweepResult) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<28} {:>6} {:>7} {:>12} {:>9} {:>7}",
        "condition", "size", "hidden", "median_err", "success", "trials"
    )
    .unwrap();
    for row in sweep.rows.iter().filter(|r| r.metric == "final_error") {
        writeln!(
            out,
            "{:<28} {:>6} {:>7} {:>12.4} {:>9.2} {:>7}",
            row.condition.name(),
            row.train_size,
            row.hidden_size,
            row.median.unwrap_or(f64::NAN),
            row.success_rate,
            row.n_trials
        )
        .unwrap();
    }
    out
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn run_xor(config_path: &Path, quick: bool, output: &OutputArgs) -> Result<(), CliError> {
    let config = load_config(config_path, quick, output.seed)?;
    let dir = resolve_out_dir(&output.out);
    ensure_dir(&dir)?;
    let manifest = dir.join("xor_manifest.json");
    write_manifest(&manifest, false, 0).map_err(CliError::from)?;
    if output.verbose {
        eprintln!(
            "xor sweep: {} conditions x {} sizes x {} trials",
            config.conditions.len(),
            config.train_sizes.len(),
            config.trials
        );
    }
    let sweep = in_pool(output.jobs, || run_xor_sweep(&config))??;
    write_atomic(
        &dir.join("xor_raw.jsonl"),
        histories_to_jsonl(&sweep.histories).as_bytes(),
    )
    .map_err(CliError::from)?;
    write_atomic(
        &dir.join("xor_aggregate.csv"),
        render_aggregate_csv(&sweep.rows).as_bytes(),
    )
    .map_err(CliError::from)?;
    write_manifest(&manifest, true, sweep.histories.len()).map_err(CliError::from)?;
    print!("{}", summary_table(&sweep));
    println!("wrote {}", dir.join("xor_aggregate.csv").display());
    Ok(())
}

fn run_transfer(config_path: &Path, quick: bool, output: &OutputArgs) -> Result<(), CliError> {
    let config = load_config(config_path, quick, output.seed)?;
    let dir = resolve_out_dir(&output.out);
    ensure_dir(&dir)?;
    let manifest = dir.join("transfer_manifest.json");
    write_manifest(&manifest, false, 0).map_err(CliError::from)?;
    let result = in_pool(output.jobs, || run_transfer_experiment(&config))??;
    write_atomic(
        &dir.join("transfer_raw.jsonl"),
        histories_to_jsonl(&result.sweep.histories).as_bytes(),
    )
    .map_err(CliError::from)?;
    write_atomic(
        &dir.join("transfer_aggregate.csv"),
        render_aggregate_csv(&result.sweep.rows).as_bytes(),
    )
    .map_err(CliError::from)?;
    write_atomic(
        &dir.join("transfer_significance.csv"),
        render_significance_csv(&result.significance).as_bytes(),
    )
    .map_err(CliError::from)?;
    write_manifest(&manifest, true, result.sweep.histories.len()).map_err(CliError::from)?;
    println!("source validation accuracy: {:.4}", result.source_val_accuracy);
    print!("{}", summary_table(&result.sweep));
    println!("wrote {}", dir.join("transfer_aggregate.csv").display());
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Theory {
            n,
            d,
            trials,
            criterion,
            seed,
            out,
        } => {
            if d < 2 {
                return Err(CliError::Usage(format!("--d: dimension must be >= 2, got {d}")));
            }
            let criterion = parse_criterion(&criterion)?;
            let csv = theory_csv(n, d, trials, criterion, seed, 0.95)?;
            print!("{csv}");
            maybe_write(&out, &csv)
        }
        Command::Mc {
            n,
            d,
            trials,
            criterion,
            seed,
            confidence,
            out,
        } => {
            if d < 2 {
                return Err(CliError::Usage(format!("--d: dimension must be >= 2, got {d}")));
            }
            if trials == 0 {
                return Err(CliError::Usage("--trials: must be >= 1".into()));
            }
            if !(confidence > 0.0 && confidence < 1.0) {
                return Err(CliError::Usage(format!(
                    "--confidence: must lie in (0, 1), got {confidence}"
                )));
            }
            let criterion = parse_criterion(&criterion)?;
            let csv = theory_csv(n, d, trials, criterion, seed, confidence)?;
            print!("{csv}");
            maybe_write(&out, &csv)
        }
        Command::Enumerate {
            n,
            d,
            criterion,
            out,
        } => {
            if d < 2 {
                return Err(CliError::Usage(format!("--d: dimension must be >= 2, got {d}")));
            }
            let criterion = parse_criterion(&criterion)?;
            let csv = enumerate_csv(n, d, criterion)?;
            print!("{csv}");
            maybe_write(&out, &csv)
        }
        Command::Xor {
            config,
            quick,
            output,
        } => run_xor(&config, quick, &output),
        Command::Transfer {
            config,
            quick,
            output,
        } => run_transfer(&config, quick, &output),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!("1..30".parse::<UnitRange>().unwrap(), UnitRange { start: 1, end: 30 });
        assert_eq!("15".parse::<UnitRange>().unwrap(), UnitRange { start: 15, end: 15 });
        assert!("0..5".parse::<UnitRange>().is_err());
        assert!("5..2".parse::<UnitRange>().is_err());
        assert!("abc".parse::<UnitRange>().is_err());
    }

    #[test]
    fn theory_csv_is_exact_only_without_trials() {
        let csv = theory_csv(
            UnitRange { start: 2, end: 3 },
            2,
            0,
            Criterion::DistinctFullPatterns,
            0,
            0.95,
        )
        .unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], THEORY_CSV_HEADER);
        assert_eq!(lines[1], "2,2,0,,,,full");
        assert!(lines[2].starts_with("3,2,0.046875,"));
    }

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Runtime("x".into()).exit_code(), 1);
    }

    #[test]
    fn triplet_criterion_ignores_dimension() {
        let a = theory_csv(
            UnitRange { start: 5, end: 5 },
            2,
            0,
            Criterion::DistinctTriplets,
            0,
            0.95,
        )
        .unwrap();
        let b = theory_csv(
            UnitRange { start: 5, end: 5 },
            6,
            0,
            Criterion::DistinctTriplets,
            0,
            0.95,
        )
        .unwrap();
        let value = |csv: &str| {
            csv.lines()
                .nth(1)
                .unwrap()
                .split(',')
                .nth(2)
                .unwrap()
                .to_string()
        };
        assert_eq!(value(&a), value(&b));
    }
}
