//! Campaign execution.
//!
//! Jobs are the cross product problems × algorithms × runs. They run on a
//! rayon pool of the requested size; each writes its own trace file when it
//! finishes and the collected results keep job order, so every aggregate
//! output is independent of scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use acos_core::algorithms::{run, AcosMode};
use acos_core::benchmarks::{function_error, Problem};
use acos_core::RunRng;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::config::{AlgorithmPlan, Campaign, ProblemPlan};
use crate::error::HarnessError;
use crate::output;
use crate::seed::{instance_seed, run_seed};
use crate::stats::{summarize, wilcoxon_rank_sum, RankSumTest};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub generation: u64,
    pub fes: u64,
    /// Floored function error of the best-so-far solution.
    pub best_error: f64,
    pub p_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub dim: usize,
    pub algorithm: String,
    pub mode: String,
    pub run_index: usize,
    pub seed: u64,
    /// Floored function error.
    pub final_error: f64,
    pub fes_used: u64,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub problem: String,
    pub algorithm: String,
    pub mode: String,
    pub run_index: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct CampaignOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
}

impl CampaignOutcome {
    /// Final errors of one cell, in run order.
    pub fn errors(&self, problem: &str, algorithm: &str, mode: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.problem == problem && r.algorithm == algorithm && r.mode == mode)
            .map(|r| r.final_error)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub problem: String,
    pub dim: usize,
    pub algorithm: String,
    pub mode: String,
    pub mean_error: f64,
    pub std_dev: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub problem: String,
    pub a: String,
    pub b: String,
    pub test: RankSumTest,
}

/// Builds the problem instance shared by all runs on `plan`.
pub fn instantiate(plan: &ProblemPlan, master_seed: u64) -> Result<Problem, HarnessError> {
    let mut rng = RunRng::seed_from_u64(instance_seed(master_seed, &plan.label, plan.dim));
    let mut problem = plan
        .entry
        .instantiate(plan.dim, &mut rng)
        .map_err(|e| HarnessError::Runtime(format!("{}: {e}", plan.label)))?;
    problem.name.clone_from(&plan.label);
    Ok(problem)
}

/// Executes one seeded run.
pub fn execute_run(
    problem: &Problem,
    dim: usize,
    algorithm: &AlgorithmPlan,
    budget: u64,
    master_seed: u64,
    run_index: usize,
) -> Result<RunRecord, RunFailure> {
    let seed = run_seed(
        master_seed,
        &problem.name,
        &algorithm.label,
        &algorithm.mode_name,
        run_index,
    );
    let fail = |message: String| RunFailure {
        problem: problem.name.clone(),
        algorithm: algorithm.label.clone(),
        mode: algorithm.mode_name.clone(),
        run_index,
        seed,
        message,
    };
    let result =
        run(algorithm.spec(dim), algorithm.mode, problem, budget, seed).map_err(|e| fail(e.to_string()))?;
    let mut trace = Vec::with_capacity(result.trace.len());
    for t in &result.trace {
        let err = function_error(t.best_fitness, problem.f_opt).map_err(|e| fail(e.to_string()))?;
        trace.push(TraceRow {
            generation: t.generation,
            fes: t.fes,
            best_error: err.floored,
            p_m: t.p_mean,
        });
    }
    let final_error = function_error(result.best_fitness, problem.f_opt).map_err(|e| fail(e.to_string()))?;
    Ok(RunRecord {
        problem: problem.name.clone(),
        dim,
        algorithm: algorithm.label.clone(),
        mode: algorithm.mode_name.clone(),
        run_index,
        seed,
        final_error: final_error.floored,
        fes_used: result.fes_used,
        trace,
    })
}

pub fn trace_file_name(record: &RunRecord) -> String {
    format!(
        "{}_{}_{}_r{}.csv",
        record.problem, record.algorithm, record.mode, record.run_index
    )
}

/// Runs every job. `trace_dir`, when given, receives one trace file per run
/// as soon as the run ends; the in-memory trace is then dropped.
pub fn run_campaign(campaign: &Campaign, trace_dir: Option<&Path>) -> Result<CampaignOutcome, HarnessError> {
    let problems: Vec<Problem> = campaign
        .problems
        .iter()
        .map(|p| instantiate(p, campaign.master_seed))
        .collect::<Result<_, _>>()?;
    let mut jobs = Vec::new();
    for (pi, _) in campaign.problems.iter().enumerate() {
        for (ai, _) in campaign.algorithms.iter().enumerate() {
            for r in 0..campaign.runs {
                jobs.push((pi, ai, r));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(campaign.threads)
        .build()
        .map_err(|e| HarnessError::Runtime(format!("cannot start worker threads: {e}")))?;
    let results: Vec<Result<Result<RunRecord, RunFailure>, HarnessError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(pi, ai, r)| {
                let plan = &campaign.problems[pi];
                let budget = campaign.budget.fes(plan.dim);
                let outcome = execute_run(
                    &problems[pi],
                    plan.dim,
                    &campaign.algorithms[ai],
                    budget,
                    campaign.master_seed,
                    r,
                );
                match (outcome, trace_dir) {
                    (Ok(mut record), Some(dir)) => {
                        output::write_trace(&dir.join(trace_file_name(&record)), &record.trace)?;
                        record.trace = Vec::new();
                        Ok(Ok(record))
                    }
                    (other, _) => Ok(other),
                }
            })
            .collect()
    });
    let mut outcome = CampaignOutcome::default();
    for r in results {
        match r? {
            Ok(record) => outcome.records.push(record),
            Err(failure) => outcome.failures.push(failure),
        }
    }
    Ok(outcome)
}

/// One row per (problem, algorithm) cell with at least one finished run.
pub fn summarize_cells(campaign: &Campaign, outcome: &CampaignOutcome) -> Vec<CellSummary> {
    let mut cells = Vec::new();
    for p in &campaign.problems {
        for a in &campaign.algorithms {
            let errors = outcome.errors(&p.label, &a.label, &a.mode_name);
            if let Some((mean, std)) = summarize(&errors) {
                cells.push(CellSummary {
                    problem: p.label.clone(),
                    dim: p.dim,
                    algorithm: a.label.clone(),
                    mode: a.mode_name.clone(),
                    mean_error: mean,
                    std_dev: std,
                    runs: errors.len(),
                });
            }
        }
    }
    cells
}

/// Every unordered pair `(i, j)`, `i < j`.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Rank-sum tests for the given algorithm index pairs on every problem.
/// Cells with fewer than three finished runs are skipped.
pub fn compare_cells(
    campaign: &Campaign,
    outcome: &CampaignOutcome,
    pairs: &[(usize, usize)],
    alpha: f64,
) -> Vec<Comparison> {
    let mut out = Vec::new();
    for p in &campaign.problems {
        for &(i, j) in pairs {
            let (a, b) = (&campaign.algorithms[i], &campaign.algorithms[j]);
            let ea = outcome.errors(&p.label, &a.label, &a.mode_name);
            let eb = outcome.errors(&p.label, &b.label, &b.mode_name);
            if let Ok(test) = wilcoxon_rank_sum(&ea, &eb, alpha) {
                out.push(Comparison {
                    problem: p.label.clone(),
                    a: a.cell_name(),
                    b: b.cell_name(),
                    test,
                });
            }
        }
    }
    out
}

/// Creates `dir` and proves it is writable by creating and removing a file.
pub fn ensure_writable(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let probe = dir.join(".acos-write-probe");
    fs::write(&probe, b"").map_err(|e| HarnessError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| HarnessError::io(&probe, e))
}

/// What a finished campaign wrote.
#[derive(Debug, Clone)]
pub struct Report {
    pub out_dir: PathBuf,
    pub cells: Vec<CellSummary>,
    pub comparisons: Vec<Comparison>,
    pub outcome: CampaignOutcome,
}

/// Runs the campaign and writes `summary.csv`, `pairwise.csv`, `runs.csv`,
/// `traces/` and, when any run failed, `failures.csv` under the output
/// directory. The directory is checked before any run starts.
pub fn execute(campaign: &Campaign, pairs: &[(usize, usize)], alpha: f64) -> Result<Report, HarnessError> {
    let out = campaign.out_dir.clone();
    ensure_writable(&out)?;
    let traces = out.join("traces");
    ensure_writable(&traces)?;
    let outcome = run_campaign(campaign, Some(&traces))?;
    let cells = summarize_cells(campaign, &outcome);
    let comparisons = compare_cells(campaign, &outcome, pairs, alpha);
    output::write_summary(&out.join("summary.csv"), &cells)?;
    output::write_pairwise(&out.join("pairwise.csv"), &comparisons)?;
    output::write_runs(&out.join("runs.csv"), &outcome.records)?;
    let failures_path = out.join("failures.csv");
    if outcome.failures.is_empty() {
        if failures_path.exists() {
            fs::remove_file(&failures_path).map_err(|e| HarnessError::io(&failures_path, e))?;
        }
    } else {
        output::write_failures(&failures_path, &outcome.failures)?;
    }
    Ok(Report {
        out_dir: out,
        cells,
        comparisons,
        outcome,
    })
}

/// The five ablation variants of one algorithm, adaptive last.
pub fn ablation_modes() -> [AcosMode; 5] {
    [
        AcosMode::NoArchive,
        AcosMode::FixedP(0.0),
        AcosMode::FixedP(0.5),
        AcosMode::FixedP(1.0),
        AcosMode::Adaptive,
    ]
}
