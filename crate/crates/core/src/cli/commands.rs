use std::path::Path;
use std::time::Instant;

use num_traits::Signed;

use super::report::{block_reports, BenchPath, BenchReport, HallReport, MatrixPairReport, Report, Timings, TraceSummary};
use super::CliError;
use crate::decompose::{decompose, limit_pair, limit_pair_observed, LimitOptions};
use crate::exact::{self, Ratio};
use crate::feasibility::hall_check;
use crate::problem::Problem;
use crate::scaling::{isp_run, run_scaling_observed, IspOptions, StopCriterion};

/// Hall test at scale `t` (default `Σr/Σc`).
pub fn cmd_check(problem: &Problem, scale: Option<&Ratio>) -> Result<Report, CliError> {
    let t = match scale {
        Some(t) if !t.is_positive() => return Err(CliError::Usage("--scale must be positive".into())),
        Some(t) => t.clone(),
        None => problem.row_total() / problem.col_total(),
    };
    let cert = hall_check(problem.support(), problem.row_targets(), problem.col_targets(), &t);
    let mut report = Report::new("check", problem.rows(), problem.cols());
    report.hall = Some(HallReport {
        feasible: cert.is_feasible(),
        scale: exact::fraction_string(&t),
        witness: cert.witness.one_based(),
        gap: exact::fraction_string(&cert.gap),
    });
    Ok(report)
}

pub fn cmd_decompose(problem: &Problem) -> Result<Report, CliError> {
    let d = decompose(problem)?;
    let mut report = Report::new("decompose", problem.rows(), problem.cols());
    report.single_block = Some(d.is_single_block());
    report.decomposition = Some(block_reports(&d));
    Ok(report)
}

pub fn cmd_limits(problem: &Problem, opts: &LimitOptions, precision: Option<usize>) -> Result<Report, CliError> {
    let lp = limit_pair(problem, opts)?;
    let mut report = Report::new("limits", problem.rows(), problem.cols());
    report.single_block = Some(lp.decomposition.is_single_block());
    report.decomposition = Some(block_reports(&lp.decomposition));
    let mut pair = MatrixPairReport::new(&lp.b, &lp.c, problem.float_row_targets(), problem.float_col_targets(), precision);
    pair.per_block_iters = Some(lp.per_block_iters.clone());
    report.limits = Some(pair);
    Ok(report)
}

/// Naive scaling for `iters` rounds (or until the sup-norm change is at most `tol`).
///
/// With `trace`, writes one CSV row per round: `k, delta, col_deviation` and
/// every entry of `B(k)` as `b_i_j` (1-based).
pub fn cmd_scale(problem: &Problem, iters: usize, tol: f64, trace: Option<&Path>, precision: Option<usize>) -> Result<Report, CliError> {
    let opts = IspOptions { max_iters: iters, tol, criterion: StopCriterion::Delta, stride: 0 };
    let result = match trace {
        Some(path) => {
            let mut writer = csv_writer(path)?;
            let mut header = vec!["k".to_string(), "delta".into(), "col_deviation".into()];
            for i in 0..problem.rows() {
                for j in 0..problem.cols() {
                    header.push(format!("b_{}_{}", i + 1, j + 1));
                }
            }
            writer.write_record(&header).map_err(csv_err(path))?;
            let mut failure = None;
            let trace =
                run_scaling_observed(problem.float_matrix(), problem.float_row_targets(), problem.float_col_targets(), &opts, |step| {
                    let mut rec = vec![step.k.to_string(), step.delta.to_string(), step.col_deviation.to_string()];
                    rec.extend(step.b.as_slice().iter().map(f64::to_string));
                    if let Err(e) = writer.write_record(&rec) {
                        failure.get_or_insert(e);
                    }
                })?;
            if let Some(e) = failure {
                return Err(csv_err(path)(e));
            }
            writer.flush().map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
            trace
        }
        None => isp_run(problem, &opts)?,
    };
    let last = result.last();
    let mut report = Report::new("scale", problem.rows(), problem.cols());
    let mut pair = MatrixPairReport::new(&last.b, &last.c, problem.float_row_targets(), problem.float_col_targets(), precision);
    pair.k = Some(last.k);
    report.iterate = Some(pair);
    report.trace_summary = Some(TraceSummary {
        iterations: result.iterations(),
        final_delta: result.final_delta(),
        final_col_deviation: result.final_col_deviation(),
        converged: result.converged,
    });
    Ok(report)
}

/// Rounds to reach column-sum deviation `tol`: naive scaling (capped at
/// `naive_cap`) against decomposition, pruning and per-block scaling.
///
/// With `trace`, writes `method, block, k, col_deviation` rows for plotting.
pub fn cmd_bench(problem: &Problem, tol: f64, naive_cap: usize, trace: Option<&Path>) -> Result<Report, CliError> {
    let mut rows: Vec<(String, usize, usize, f64)> = Vec::new();
    let recording = trace.is_some();

    let naive_opts = IspOptions { max_iters: naive_cap, tol, criterion: StopCriterion::ColDeviation, stride: 0 };
    let start = Instant::now();
    let naive =
        run_scaling_observed(problem.float_matrix(), problem.float_row_targets(), problem.float_col_targets(), &naive_opts, |step| {
            if recording {
                rows.push(("naive".into(), 0, step.k, step.col_deviation));
            }
        })?;
    let naive_ms = start.elapsed().as_secs_f64() * 1e3;

    let start = Instant::now();
    let limit_opts = LimitOptions { tol, ..LimitOptions::default() };
    let lp = limit_pair_observed(problem, &limit_opts, |block, step| {
        if recording {
            rows.push(("accelerated".into(), block + 1, step.k, step.col_deviation));
        }
    })?;
    let accelerated_ms = start.elapsed().as_secs_f64() * 1e3;

    if let Some(path) = trace {
        let mut writer = csv_writer(path)?;
        writer.write_record(["method", "block", "k", "col_deviation"]).map_err(csv_err(path))?;
        for (method, block, k, dev) in &rows {
            writer.write_record([method.clone(), block.to_string(), k.to_string(), dev.to_string()]).map_err(csv_err(path))?;
        }
        writer.flush().map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    }

    let (m, n) = (problem.rows(), problem.cols());
    let accel_dev = block_col_deviation(problem, &lp);
    let mut report = Report::new("bench", m, n);
    report.single_block = Some(lp.decomposition.is_single_block());
    report.bench = Some(BenchReport {
        tol,
        naive_cap,
        naive: BenchPath { iterations: naive.iterations(), reached_tol: naive.converged, final_col_deviation: naive.final_col_deviation() },
        accelerated: BenchPath { iterations: lp.max_block_iters(), reached_tol: lp.converged, final_col_deviation: accel_dev },
        per_block_iters: lp.per_block_iters.clone(),
    });
    report.timings = Some(Timings { naive_ms, accelerated_ms });
    Ok(report)
}

/// Largest relative deviation of `B`'s column sums from the block-scaled column targets.
fn block_col_deviation(problem: &Problem, lp: &crate::decompose::LimitPair) -> f64 {
    let sums = lp.b.col_sums();
    let mut worst: f64 = 0.0;
    for block in &lp.decomposition.blocks {
        for j in block.cols.iter() {
            let target = exact::to_f64(&(&block.quotient * &problem.col_targets()[j]));
            worst = worst.max((sums[j] - target).abs() / target);
        }
    }
    worst
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(csv_err(path))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.display().to_string(), source: std::io::Error::other(e.to_string()) }
}
