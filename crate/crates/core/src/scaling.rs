//! The iterative scaling procedure.
//!
//! Starting from `A`, rows and columns are adjusted alternately:
//! `B(1) = ℛ(A)`, `C(k) = 𝒞(B(k))`, `B(k+1) = ℛ(C(k))`. One round `k`
//! is one row adjustment followed by one column adjustment.
//!
//! The loop is generic over [`Scalar`], so the same code runs in `f64`
//! and, for small fixtures, in exact rational arithmetic.

use std::collections::VecDeque;
use std::fmt::Debug;

use num_traits::{Num, ToPrimitive};
use thiserror::Error;

use crate::exact::Ratio;
use crate::grid::Grid;
use crate::problem::Problem;

/// Field-like scalar the scaling loop can run on.
pub trait Scalar: Clone + PartialOrd + Num + ToPrimitive + Debug {}

impl<T> Scalar for T where T: Clone + PartialOrd + Num + ToPrimitive + Debug {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalingError {
    #[error("row {} sums to zero", .0 + 1)]
    ZeroRowSum(usize),
    #[error("column {} sums to zero", .0 + 1)]
    ZeroColSum(usize),
    #[error("expected {expected} targets, got {got}")]
    TargetLength { expected: usize, got: usize },
    #[error("matrices have different shapes")]
    ShapeMismatch,
    #[error("matrices have different supports")]
    SupportMismatch,
}

/// An adjusted matrix and the multipliers that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustResult<T> {
    pub matrix: Grid<T>,
    pub multipliers: Vec<T>,
}

fn scale_rows_in_place<T: Scalar>(m: &mut Grid<T>, targets: &[T], multipliers: &mut Vec<T>) -> Result<(), ScalingError> {
    let cols = m.cols();
    multipliers.clear();
    for (i, row) in m.as_mut_slice().chunks_mut(cols).enumerate() {
        let total = row.iter().fold(T::zero(), |acc, v| acc + v.clone());
        if total.is_zero() {
            return Err(ScalingError::ZeroRowSum(i));
        }
        let x = targets[i].clone() / total;
        for v in row.iter_mut() {
            *v = x.clone() * v.clone();
        }
        multipliers.push(x);
    }
    Ok(())
}

/// Scales columns in place; returns the column sums before scaling.
fn scale_cols_in_place<T: Scalar>(m: &mut Grid<T>, targets: &[T], multipliers: &mut Vec<T>) -> Result<Vec<T>, ScalingError> {
    let sums = m.col_sums();
    multipliers.clear();
    for (j, total) in sums.iter().enumerate() {
        if total.is_zero() {
            return Err(ScalingError::ZeroColSum(j));
        }
        multipliers.push(targets[j].clone() / total.clone());
    }
    let cols = m.cols();
    for row in m.as_mut_slice().chunks_mut(cols) {
        for (v, y) in row.iter_mut().zip(multipliers.iter()) {
            *v = v.clone() * y.clone();
        }
    }
    Ok(sums)
}

fn check_len(expected: usize, got: usize) -> Result<(), ScalingError> {
    if expected == got {
        Ok(())
    } else {
        Err(ScalingError::TargetLength { expected, got })
    }
}

/// `ℛ(M)`: row `i` multiplied by `x_i = r_i / Σ_j m_ij`.
pub fn row_adjust<T: Scalar>(m: &Grid<T>, r: &[T]) -> Result<AdjustResult<T>, ScalingError> {
    check_len(m.rows(), r.len())?;
    let mut matrix = m.clone();
    let mut multipliers = Vec::with_capacity(m.rows());
    scale_rows_in_place(&mut matrix, r, &mut multipliers)?;
    Ok(AdjustResult { matrix, multipliers })
}

/// `𝒞(M)`: column `j` multiplied by `y_j = c_j / Σ_i m_ij`.
pub fn col_adjust<T: Scalar>(m: &Grid<T>, c: &[T]) -> Result<AdjustResult<T>, ScalingError> {
    check_len(m.cols(), c.len())?;
    let mut matrix = m.clone();
    let mut multipliers = Vec::with_capacity(m.cols());
    scale_cols_in_place(&mut matrix, c, &mut multipliers)?;
    Ok(AdjustResult { matrix, multipliers })
}

/// Which metric ends the loop early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopCriterion {
    /// Sup-norm change `‖B(k) − B(k−1)‖∞`, with `B(0) = A`. In round 1 the
    /// column-sum deviation must also be within tolerance.
    #[default]
    Delta,
    /// Largest relative deviation of `B(k)`'s column sums from the column targets.
    /// Only meaningful when the instance is a single feasible block.
    ColDeviation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IspOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub criterion: StopCriterion,
    /// Keep every `stride`-th iterate; `0` keeps only the final one.
    pub stride: usize,
}

impl Default for IspOptions {
    fn default() -> Self {
        Self { max_iters: 10_000, tol: 1e-12, criterion: StopCriterion::Delta, stride: 0 }
    }
}

impl IspOptions {
    pub fn rounds(k: usize) -> Self {
        Self { max_iters: k, tol: 0.0, ..Self::default() }
    }
}

/// One retained round of the procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate<T> {
    pub k: usize,
    /// `B(k)`, row sums equal to the row targets.
    pub b: Grid<T>,
    /// `C(k)`, column sums equal to the column targets.
    pub c: Grid<T>,
    /// Row multipliers taking `C(k−1)` to `B(k)`.
    pub x: Vec<T>,
    /// Column multipliers taking `B(k)` to `C(k)`.
    pub y: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTrace<T> {
    pub iterates: Vec<Iterate<T>>,
    /// `delta[k-1]` is the sup-norm change of `B` in round `k`.
    pub delta: Vec<f64>,
    /// `col_deviation[k-1]` is the column-sum deviation of `B(k)`.
    pub col_deviation: Vec<f64>,
    pub converged: bool,
}

impl<T> ScalingTrace<T> {
    pub fn iterations(&self) -> usize {
        self.delta.len()
    }

    pub fn last(&self) -> &Iterate<T> {
        self.iterates.last().expect("trace holds the final iterate")
    }

    pub fn at(&self, k: usize) -> Option<&Iterate<T>> {
        self.iterates.iter().find(|it| it.k == k)
    }

    pub fn final_delta(&self) -> f64 {
        self.delta.last().copied().unwrap_or(0.0)
    }

    pub fn final_col_deviation(&self) -> f64 {
        self.col_deviation.last().copied().unwrap_or(0.0)
    }
}

/// What an observer sees after every round.
pub struct Step<'a, T> {
    pub k: usize,
    pub b: &'a Grid<T>,
    pub c: &'a Grid<T>,
    pub delta: f64,
    pub col_deviation: f64,
}

/// Runs the procedure on `matrix` with targets `r`, `c`, calling `observer` after every round.
pub fn run_scaling_observed<T, F>(
    matrix: &Grid<T>,
    r: &[T],
    c: &[T],
    opts: &IspOptions,
    mut observer: F,
) -> Result<ScalingTrace<T>, ScalingError>
where
    T: Scalar,
    F: FnMut(&Step<'_, T>),
{
    check_len(matrix.rows(), r.len())?;
    check_len(matrix.cols(), c.len())?;
    let col_targets: Vec<f64> = c.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();

    let mut prev_b = matrix.clone();
    let mut b = matrix.clone();
    let mut cm = matrix.clone();
    let mut x = Vec::with_capacity(r.len());
    let mut y = Vec::with_capacity(c.len());
    let mut iterates = Vec::new();
    let mut delta = Vec::new();
    let mut col_deviation = Vec::new();
    let mut converged = false;

    for k in 1..=opts.max_iters.max(1) {
        // b currently holds C(k-1) (or A for k = 1)
        scale_rows_in_place(&mut b, r, &mut x)?;
        let d = sup_diff(&b, &prev_b);
        cm.as_mut_slice().clone_from_slice(b.as_slice());
        let sums = scale_cols_in_place(&mut cm, c, &mut y)?;
        let dev = sums.iter().zip(&col_targets).map(|(s, t)| (s.to_f64().unwrap_or(f64::NAN) - t).abs() / t).fold(0.0, f64::max);
        delta.push(d);
        col_deviation.push(dev);
        observer(&Step { k, b: &b, c: &cm, delta: d, col_deviation: dev });

        let metric = match opts.criterion {
            // delta(1) only compares against A, which may already have the row
            // targets; a fixed point at k = 1 also needs the column sums.
            StopCriterion::Delta if k == 1 => d.max(dev),
            StopCriterion::Delta => d,
            StopCriterion::ColDeviation => dev,
        };
        converged = metric <= opts.tol;
        let last = converged || k >= opts.max_iters;
        if last || (opts.stride > 0 && k % opts.stride == 0) {
            iterates.push(Iterate { k, b: b.clone(), c: cm.clone(), x: x.clone(), y: y.clone() });
        }
        if last {
            break;
        }
        prev_b.as_mut_slice().clone_from_slice(b.as_slice());
        b.as_mut_slice().clone_from_slice(cm.as_slice());
    }
    Ok(ScalingTrace { iterates, delta, col_deviation, converged })
}

pub fn run_scaling<T: Scalar>(matrix: &Grid<T>, r: &[T], c: &[T], opts: &IspOptions) -> Result<ScalingTrace<T>, ScalingError> {
    run_scaling_observed(matrix, r, c, opts, |_| {})
}

/// Runs the procedure in `f64` on a validated problem.
pub fn isp_run(problem: &Problem, opts: &IspOptions) -> Result<ScalingTrace<f64>, ScalingError> {
    run_scaling(problem.float_matrix(), problem.float_row_targets(), problem.float_col_targets(), opts)
}

/// Runs the procedure in exact rational arithmetic. Denominators grow quickly,
/// so this is meant for small fixtures.
pub fn isp_run_exact(problem: &Problem, opts: &IspOptions) -> Result<ScalingTrace<Ratio>, ScalingError> {
    run_scaling(problem.matrix(), problem.row_targets(), problem.col_targets(), opts)
}

fn sup_diff<T: Scalar>(a: &Grid<T>, b: &Grid<T>) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(u, v)| {
            let diff = if u >= v { u.clone() - v.clone() } else { v.clone() - u.clone() };
            diff.to_f64().unwrap_or(f64::NAN)
        })
        .fold(0.0, f64::max)
}

/// Decides whether `m = diag(x) · m2 · diag(y)` for some positive `x`, `y`.
///
/// Multipliers are propagated along a spanning forest of the bipartite
/// support graph; every remaining support entry must then agree within
/// relative tolerance `rel_tol`.
pub fn check_diag_equivalent(m: &Grid<f64>, m2: &Grid<f64>, rel_tol: f64) -> Result<bool, ScalingError> {
    if m.shape() != m2.shape() {
        return Err(ScalingError::ShapeMismatch);
    }
    if m.nonzero_positions() != m2.nonzero_positions() {
        return Err(ScalingError::SupportMismatch);
    }
    let (rows, cols) = m.shape();
    let mut row_adj = vec![Vec::new(); rows];
    let mut col_adj = vec![Vec::new(); cols];
    for (i, j) in m.nonzero_positions() {
        row_adj[i].push(j);
        col_adj[j].push(i);
    }
    let mut x: Vec<Option<f64>> = vec![None; rows];
    let mut y: Vec<Option<f64>> = vec![None; cols];
    for root in 0..rows {
        if x[root].is_some() {
            continue;
        }
        x[root] = Some(1.0);
        let mut queue = VecDeque::from([Node::Row(root)]);
        while let Some(node) = queue.pop_front() {
            match node {
                Node::Row(i) => {
                    let xi = x[i].unwrap();
                    for &j in &row_adj[i] {
                        if y[j].is_none() {
                            y[j] = Some(m[(i, j)] / (xi * m2[(i, j)]));
                            queue.push_back(Node::Col(j));
                        }
                    }
                }
                Node::Col(j) => {
                    let yj = y[j].unwrap();
                    for &i in &col_adj[j] {
                        if x[i].is_none() {
                            x[i] = Some(m[(i, j)] / (m2[(i, j)] * yj));
                            queue.push_back(Node::Row(i));
                        }
                    }
                }
            }
        }
    }
    Ok(m.nonzero_positions().into_iter().all(|(i, j)| {
        let predicted = x[i].unwrap() * m2[(i, j)] * y[j].unwrap();
        (predicted - m[(i, j)]).abs() <= rel_tol * m[(i, j)].abs()
    }))
}

#[derive(Clone, Copy)]
enum Node {
    Row(usize),
    Col(usize),
}
