use std::path::PathBuf;
use std::process::ExitCode;

use acos_core::benchmarks::CATALOG;
use acos_harness::config::{parse_mode, Campaign, ExperimentConfig};
use acos_harness::experiment::{ablation_modes, all_pairs, execute, Report};
use acos_harness::output::{fmt_sci, read_runs};
use acos_harness::stats::{median, summarize, wilcoxon_rank_sum};
use acos_harness::HarnessError;
use clap::{Args, Parser, Subcommand};

/// Adaptive coordinate-system switching for PSO and DE: experiment runner.
#[derive(Parser)]
#[command(name = "acos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every problem × algorithm cell of a campaign.
    Run(RunArgs),
    /// Expand the single algorithm of a campaign into its five ablation
    /// modes and compare each against the adaptive one.
    Ablate(RunArgs),
    /// Rank-sum test between two cells of finished campaigns.
    Compare(CompareArgs),
    /// Print the function catalog.
    ListFunctions,
}

#[derive(Args)]
struct RunArgs {
    /// JSON campaign file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, overrides `threads`.
    #[arg(long)]
    threads: Option<usize>,
    /// Master seed, overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Significance level of the pairwise tests.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct CompareArgs {
    /// First cell as `DIR:PROBLEM:ALGORITHM:MODE`, DIR holding a `runs.csv`.
    #[arg(long)]
    a: String,
    /// Second cell, same format.
    #[arg(long)]
    b: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

fn load_campaign(args: &RunArgs) -> Result<Campaign, HarnessError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(HarnessError::Config(format!(
            "--alpha {} is outside (0, 1)",
            args.alpha
        )));
    }
    config.validate()
}

fn finish(report: &Report) -> Result<(), HarnessError> {
    let failed = report.outcome.failures.len();
    eprintln!(
        "{} runs finished, {failed} failed; results in {}",
        report.outcome.records.len(),
        report.out_dir.display()
    );
    if failed > 0 {
        return Err(HarnessError::Runtime(format!(
            "{failed} runs failed, see failures.csv"
        )));
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), HarnessError> {
    let campaign = load_campaign(args)?;
    let pairs = all_pairs(campaign.algorithms.len());
    finish(&execute(&campaign, &pairs, args.alpha)?)
}

fn cmd_ablate(args: &RunArgs) -> Result<(), HarnessError> {
    let mut campaign = load_campaign(args)?;
    if campaign.algorithms.len() != 1 {
        return Err(HarnessError::Config(
            "ablate expects exactly one algorithm in the config".into(),
        ));
    }
    let base = campaign.algorithms.pop().expect("one algorithm");
    campaign.algorithms = ablation_modes().iter().map(|&m| base.with_mode(m)).collect();
    let adaptive = campaign.algorithms.len() - 1;
    let pairs: Vec<(usize, usize)> = (0..adaptive).map(|i| (i, adaptive)).collect();
    finish(&execute(&campaign, &pairs, args.alpha)?)
}

struct CellSpec {
    dir: PathBuf,
    problem: String,
    algorithm: String,
    mode: String,
}

fn parse_cell(s: &str) -> Result<CellSpec, HarnessError> {
    let bad = || HarnessError::Config(format!("cell `{s}` is not DIR:PROBLEM:ALGORITHM:MODE"));
    // `fixed:<p>` carries its own colon.
    let (rest, mode) = match s.rsplit_once(':') {
        Some((head, value)) if head.ends_with(":fixed") => {
            (&head[..head.len() - 6], format!("fixed:{value}"))
        }
        Some((head, mode)) => (head, mode.to_string()),
        None => return Err(bad()),
    };
    let parts: Vec<&str> = rest.rsplitn(3, ':').collect();
    if parts.len() != 3 || parts.iter().any(|p| p.is_empty()) || mode.is_empty() {
        return Err(bad());
    }
    let mode = parse_mode(&mode).map_err(HarnessError::Config)?;
    Ok(CellSpec {
        dir: PathBuf::from(parts[2]),
        problem: parts[1].to_string(),
        algorithm: parts[0].to_string(),
        mode: mode.to_string(),
    })
}

fn cell_errors(cell: &CellSpec) -> Result<Vec<f64>, HarnessError> {
    let rows = read_runs(&cell.dir.join("runs.csv"))?;
    let errors: Vec<f64> = rows
        .iter()
        .filter(|r| r.problem == cell.problem && r.algorithm == cell.algorithm && r.mode == cell.mode)
        .map(|r| r.final_error)
        .collect();
    if errors.is_empty() {
        return Err(HarnessError::Config(format!(
            "no runs of {}/{} on `{}` in {}",
            cell.algorithm,
            cell.mode,
            cell.problem,
            cell.dir.display()
        )));
    }
    Ok(errors)
}

fn cmd_compare(args: &CompareArgs) -> Result<(), HarnessError> {
    let (a, b) = (parse_cell(&args.a)?, parse_cell(&args.b)?);
    let (ea, eb) = (cell_errors(&a)?, cell_errors(&b)?);
    let test = wilcoxon_rank_sum(&ea, &eb, args.alpha).map_err(|e| HarnessError::Config(e.to_string()))?;
    println!("cell,runs,mean_error,std_dev,median_error");
    for (cell, e) in [(&a, &ea), (&b, &eb)] {
        let (mean, std) = summarize(e).expect("non-empty");
        println!(
            "{}/{}/{},{},{},{},{}",
            cell.problem,
            cell.algorithm,
            cell.mode,
            e.len(),
            fmt_sci(mean),
            fmt_sci(std),
            fmt_sci(median(e))
        );
    }
    println!("W,p,verdict");
    println!("{},{},{}", fmt_sci(test.w), fmt_sci(test.p), test.verdict);
    Ok(())
}

fn cmd_list_functions() {
    println!("name,category,rotated,min_dim");
    for e in CATALOG {
        println!("{},{},{},{}", e.name, e.category.as_str(), e.rotated, e.min_dim());
    }
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
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Ablate(args) => cmd_ablate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::ListFunctions => {
            cmd_list_functions();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
