//! Machine-readable command reports and their text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::blocks::Decomposition;
use crate::exact;
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub rows: usize,
    pub cols: usize,
    /// Whether the whole instance is one block (both limits have full support structure).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_block: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hall: Option<HallReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Vec<BlockReport>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<MatrixPairReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterate: Option<MatrixPairReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_summary: Option<TraceSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl Report {
    pub fn new(command: &str, rows: usize, cols: usize) -> Self {
        Self {
            command: command.into(),
            rows,
            cols,
            single_block: None,
            hall: None,
            decomposition: None,
            limits: None,
            iterate: None,
            trace_summary: None,
            bench: None,
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallReport {
    pub feasible: bool,
    pub scale: String,
    /// 1-based row indices.
    pub witness: Vec<usize>,
    pub gap: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    /// 1-based row indices.
    pub rows: Vec<usize>,
    /// 1-based column indices.
    pub cols: Vec<usize>,
    pub quotient: String,
    pub quotient_decimal: f64,
    /// Peel group (0 is the maximal-quotient group).
    pub group: usize,
}

pub fn block_reports(d: &Decomposition) -> Vec<BlockReport> {
    d.blocks
        .iter()
        .zip(&d.groups)
        .map(|(b, &group)| BlockReport {
            rows: b.rows.one_based(),
            cols: b.cols.one_based(),
            quotient: exact::fraction_string(&b.quotient),
            quotient_decimal: exact::to_f64(&b.quotient),
            group,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPairReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    /// `max_i |Σ_j b_ij − r_i|`.
    pub b_row_residual: f64,
    /// `max_j |Σ_i c_ij − c_j|`.
    pub c_col_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_block_iters: Option<Vec<usize>>,
}

impl MatrixPairReport {
    pub fn new(b: &Grid<f64>, c: &Grid<f64>, r: &[f64], cols: &[f64], precision: Option<usize>) -> Self {
        let residual = |sums: Vec<f64>, targets: &[f64]| sums.iter().zip(targets).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max);
        let round = |g: &Grid<f64>| -> Vec<Vec<f64>> {
            g.to_rows().into_iter().map(|row| row.into_iter().map(|v| precision.map_or(v, |p| round_sig(v, p))).collect()).collect()
        };
        Self {
            k: None,
            b: round(b),
            c: round(c),
            b_row_residual: residual(b.row_sums(), r),
            c_col_residual: residual(c.col_sums(), cols),
            per_block_iters: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub iterations: usize,
    pub final_delta: f64,
    pub final_col_deviation: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPath {
    pub iterations: usize,
    pub reached_tol: bool,
    pub final_col_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub tol: f64,
    pub naive_cap: usize,
    pub naive: BenchPath,
    /// Iterations are those of the slowest block.
    pub accelerated: BenchPath,
    pub per_block_iters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub naive_ms: f64,
    pub accelerated_ms: f64,
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.max(1) - 1, x).parse().unwrap_or(x)
}

pub fn fmt_sig(x: f64, digits: usize) -> String {
    let v = round_sig(x, digits);
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn write_matrix(out: &mut String, name: &str, m: &[Vec<f64>], digits: usize) {
    let cells: Vec<Vec<String>> = m.iter().map(|row| row.iter().map(|&v| fmt_sig(v, digits)).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let _ = writeln!(out, "{name} =");
    for row in cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "  {}", line.join("  "));
    }
}

fn set_text(v: &[usize]) -> String {
    let inner: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("{{{}}}", inner.join(","))
}

/// Human-readable rendering with `digits` significant digits.
pub fn render_text(report: &Report, digits: usize) -> String {
    let mut out = String::new();
    if let Some(h) = &report.hall {
        if h.feasible {
            let _ = writeln!(out, "Feasible, tight I={}, gap={} (t={})", set_text(&h.witness), h.gap, h.scale);
        } else {
            let _ = writeln!(out, "Infeasible, I={}, gap={} (t={})", set_text(&h.witness), h.gap, h.scale);
        }
    }
    if let Some(single) = report.single_block {
        let _ = writeln!(out, "{}", if single { "single block" } else { "multiple blocks" });
    }
    if let Some(blocks) = &report.decomposition {
        for (k, b) in blocks.iter().enumerate() {
            let _ = writeln!(
                out,
                "block {}: rows {} cols {} quotient {} ({}) group {}",
                k + 1,
                set_text(&b.rows),
                set_text(&b.cols),
                b.quotient,
                fmt_sig(b.quotient_decimal, digits),
                b.group + 1
            );
        }
    }
    for (label, pair) in [("limit", &report.limits), ("iterate", &report.iterate)] {
        if let Some(p) = pair {
            match p.k {
                Some(k) => {
                    write_matrix(&mut out, &format!("B({k})"), &p.b, digits);
                    write_matrix(&mut out, &format!("C({k})"), &p.c, digits);
                }
                None => {
                    write_matrix(&mut out, &format!("{label} B"), &p.b, digits);
                    write_matrix(&mut out, &format!("{label} C"), &p.c, digits);
                }
            }
            let _ =
                writeln!(out, "row residual of B {}, column residual of C {}", fmt_sig(p.b_row_residual, 3), fmt_sig(p.c_col_residual, 3));
        }
    }
    if let Some(t) = &report.trace_summary {
        let _ = writeln!(
            out,
            "iterations {}, final delta {}, column deviation {}, converged {}",
            t.iterations,
            fmt_sig(t.final_delta, 3),
            fmt_sig(t.final_col_deviation, 3),
            t.converged
        );
    }
    if let Some(b) = &report.bench {
        let _ = writeln!(out, "tolerance {}", b.tol);
        for (name, path) in [("naive", &b.naive), ("accelerated", &b.accelerated)] {
            let _ = writeln!(
                out,
                "{name}: {} iterations, reached {}, column deviation {}",
                path.iterations,
                path.reached_tol,
                fmt_sig(path.final_col_deviation, 3)
            );
        }
    }
    if let Some(t) = &report.timings {
        let _ = writeln!(out, "time naive {:.3} ms, accelerated {:.3} ms", t.naive_ms, t.accelerated_ms);
    }
    out
}
