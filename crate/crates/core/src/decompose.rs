//! Limit-point decomposition and direct assembly of both limits.
//!
//! 1. Peel: repeatedly take the unique maximal row set `I` maximizing
//!    `r(I)/c(N(I))` on what is left, giving blocks with strictly
//!    decreasing quotients.
//! 2. Refine: inside each peeled block, keep only support entries that are
//!    positive in some matrix with the block's marginals; the connected
//!    components of what remains are the final blocks.
//! 3. Assemble: scale each block separately (it converges, the block being
//!    feasible with maximal support) and put the pieces together.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::blocks::{validate_blocks, Block, Decomposition, Splitting, SplittingError};
use crate::exact::{self, Ratio};
use crate::feasibility::{components, flexible_support, max_gap_set, FeasibilityError};
use crate::grid::Grid;
use crate::problem::{marginal_sum, IndexSet, Problem, ProblemError, SupportPattern};
use crate::scaling::{run_scaling_observed, IspOptions, ScalingError, Step, StopCriterion};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("block is not feasible at its quotient: {0}")]
    InfeasibleBlock(FeasibilityError),
    #[error("decomposition leaves {side} {} without support", .index + 1)]
    EmptyBlockSupport { side: crate::problem::Side, index: usize },
    #[error("invalid splitting: {0}")]
    Splitting(#[from] SplittingError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

/// The maximal row set with the largest ratio `r(I)/c(N(I))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiResult {
    pub rows: IndexSet,
    pub cols: IndexSet,
    pub ratio: Ratio,
    pub dinkelbach_steps: usize,
}

/// Dinkelbach iteration on the max-gap subproblem.
///
/// Starting from `t = r([m])/c([n])`, each round finds the maximal row set
/// maximizing `r(I) − t·c(N(I))`. A positive gap means some set beats `t`,
/// so `t` moves to that set's ratio; a zero gap means `t` is optimal and the
/// maximal tight set is the answer.
///
/// `support` must have no empty row or column.
pub fn phi(support: &SupportPattern, r: &[Ratio], c: &[Ratio]) -> PhiResult {
    debug_assert!(!support.has_empty_line());
    let mut t = exact::sum(r) / exact::sum(c);
    let mut steps = 0;
    loop {
        steps += 1;
        let (gap, rows) = max_gap_set(support, r, c, &t);
        let cols = support.neighborhood(&rows);
        if gap.is_zero() {
            assert!(!rows.is_empty(), "optimal ratio is attained by a nonempty set");
            debug_assert_eq!(marginal_sum(r, &rows) / marginal_sum(c, &cols), t);
            return PhiResult { rows, cols, ratio: t, dinkelbach_steps: steps };
        }
        let next = marginal_sum(r, &rows) / marginal_sum(c, &cols);
        assert!(next > t, "Dinkelbach parameter must increase");
        t = next;
    }
}

fn restricted_targets(targets: &[Ratio], set: &IndexSet) -> Vec<Ratio> {
    set.iter().map(|k| targets[k].clone()).collect()
}

/// Peels maximal-ratio blocks off the remaining rows and columns until none
/// are left. Quotients come out strictly decreasing.
pub fn step_one(problem: &Problem) -> Result<Splitting, DecomposeError> {
    let (r, c) = (problem.row_targets(), problem.col_targets());
    let mut rows_left = IndexSet::full(problem.rows());
    let mut cols_left = IndexSet::full(problem.cols());
    let mut blocks: Vec<Block> = Vec::new();
    while !rows_left.is_empty() {
        if cols_left.is_empty() {
            return Err(DecomposeError::Invariant("rows remain after all columns were peeled".into()));
        }
        let sub = problem.support().restrict(&rows_left, &cols_left);
        if sub.has_empty_line() {
            return Err(DecomposeError::Invariant("peel remainder has an empty line".into()));
        }
        let found = phi(&sub, &restricted_targets(r, &rows_left), &restricted_targets(c, &cols_left));
        let block =
            Block { rows: found.rows.lift(rows_left.as_slice()), cols: found.cols.lift(cols_left.as_slice()), quotient: found.ratio };
        if let Some(prev) = blocks.last() {
            if block.quotient >= prev.quotient {
                return Err(DecomposeError::Invariant(format!(
                    "peel quotients not strictly decreasing ({} after {})",
                    block.quotient, prev.quotient
                )));
            }
        }
        rows_left = rows_left.difference(&block.rows);
        cols_left = cols_left.difference(&block.cols);
        blocks.push(block);
    }
    if !cols_left.is_empty() {
        return Err(DecomposeError::Invariant("columns remain after all rows were peeled".into()));
    }
    Ok(Splitting::new(blocks))
}

/// Splits a feasible block into the components of its flexible support.
/// Every piece keeps the block's quotient.
pub fn step_two(problem: &Problem, block: &Block) -> Result<Vec<Block>, DecomposeError> {
    let sub = problem.support().restrict(&block.rows, &block.cols);
    let r = restricted_targets(problem.row_targets(), &block.rows);
    let c = restricted_targets(problem.col_targets(), &block.cols);
    let flexible = flexible_support(&sub, &r, &c, &block.quotient).map_err(DecomposeError::InfeasibleBlock)?;
    let mut pieces = Vec::new();
    let mut covered_cols = 0;
    for (rows, cols) in components(&flexible) {
        let piece =
            Block::new(rows.lift(block.rows.as_slice()), cols.lift(block.cols.as_slice()), problem.row_targets(), problem.col_targets());
        if piece.quotient != block.quotient {
            return Err(DecomposeError::Invariant(format!(
                "refined block {}x{} has quotient {} instead of {}",
                piece.rows, piece.cols, piece.quotient, block.quotient
            )));
        }
        covered_cols += piece.cols.len();
        pieces.push(piece);
    }
    if covered_cols != block.cols.len() {
        return Err(DecomposeError::Invariant("flexible support leaves a column uncovered".into()));
    }
    Ok(pieces)
}

/// Block decomposition of the row-adjusted limit `B`.
pub fn decompose(problem: &Problem) -> Result<Decomposition, DecomposeError> {
    let peeled = step_one(problem)?;
    let mut blocks = Vec::new();
    let mut groups = Vec::new();
    for (g, block) in peeled.blocks.iter().enumerate() {
        for piece in step_two(problem, block)? {
            blocks.push(piece);
            groups.push(g);
        }
    }
    let d = Decomposition { blocks, groups };
    validate_blocks(&d.blocks, problem.rows(), problem.cols())?;
    Ok(d)
}

/// Zeroes every entry outside the blocks of `d`. The scaling limits are unchanged.
pub fn prune(problem: &Problem, d: &Decomposition) -> Result<Problem, DecomposeError> {
    let (m, n) = (problem.rows(), problem.cols());
    validate_blocks(&d.blocks, m, n)?;
    let rows = d.row_owner(m);
    let cols = d.col_owner(n);
    let matrix = Grid::from_fn(m, n, |i, j| if rows[i] == cols[j] { problem.matrix()[(i, j)].clone() } else { Ratio::zero() });
    problem.with_matrix(matrix).map_err(|e| match e {
        ProblemError::ZeroRow(index) => DecomposeError::EmptyBlockSupport { side: crate::problem::Side::Row, index },
        ProblemError::ZeroCol(index) => DecomposeError::EmptyBlockSupport { side: crate::problem::Side::Col, index },
        other => DecomposeError::Problem(other),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    /// Per-block convergence threshold on relative column-sum deviation.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 1_000_000 }
    }
}

/// Both limit points of the scaling sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPair {
    /// Limit of `B(k)`; row sums equal the row targets.
    pub b: Grid<f64>,
    /// Limit of `C(k)`; column sums equal the column targets.
    pub c: Grid<f64>,
    pub decomposition: Decomposition,
    /// Scaling rounds used per block (0 for 1×1 blocks).
    pub per_block_iters: Vec<usize>,
    pub converged: bool,
}

impl LimitPair {
    /// Rounds needed by the slowest block.
    pub fn max_block_iters(&self) -> usize {
        self.per_block_iters.iter().copied().max().unwrap_or(0)
    }
}

pub fn limit_pair(problem: &Problem, opts: &LimitOptions) -> Result<LimitPair, DecomposeError> {
    limit_pair_observed(problem, opts, |_, _| {})
}

/// [`limit_pair`], calling `observer(block index, step)` after every per-block round.
pub fn limit_pair_observed<F>(problem: &Problem, opts: &LimitOptions, mut observer: F) -> Result<LimitPair, DecomposeError>
where
    F: FnMut(usize, &Step<'_, f64>),
{
    let d = decompose(problem)?;
    let pruned = prune(problem, &d)?;
    let (m, n) = (problem.rows(), problem.cols());
    let mut b = Grid::zeros(m, n);
    let mut c = Grid::zeros(m, n);
    let mut per_block_iters = Vec::with_capacity(d.blocks.len());
    let mut converged = true;
    for (index, block) in d.blocks.iter().enumerate() {
        let rows = block.rows.as_slice();
        let cols = block.cols.as_slice();
        let q = exact::to_f64(&block.quotient);
        let block_b = if block.is_singleton() {
            per_block_iters.push(0);
            Grid::from_vec(1, 1, vec![pruned.float_row_targets()[rows[0]]])
        } else {
            let sub = pruned.float_matrix().select(rows, cols);
            let r: Vec<f64> = rows.iter().map(|&i| pruned.float_row_targets()[i]).collect();
            let targets: Vec<f64> = cols.iter().map(|&j| exact::to_f64(&(&block.quotient * &problem.col_targets()[j]))).collect();
            let isp = IspOptions { max_iters: opts.max_iters, tol: opts.tol, criterion: StopCriterion::ColDeviation, stride: 0 };
            let trace = run_scaling_observed(&sub, &r, &targets, &isp, |step| observer(index, step))?;
            per_block_iters.push(trace.iterations());
            converged &= trace.converged;
            trace.last().b.clone()
        };
        for (a, &i) in rows.iter().enumerate() {
            for (k, &j) in cols.iter().enumerate() {
                b[(i, j)] = block_b[(a, k)];
                c[(i, j)] = block_b[(a, k)] / q;
            }
        }
    }
    Ok(LimitPair { b, c, decomposition: d, per_block_iters, converged })
}

/// Index-set view of a splitting, for comparisons against oracles.
pub fn block_sets(blocks: &[Block]) -> Vec<(IndexSet, IndexSet)> {
    let mut v: Vec<_> = blocks.iter().map(|b| (b.rows.clone(), b.cols.clone())).collect();
    v.sort();
    v
}

/// Whether each block of `d` is feasible at its own quotient.
pub fn blocks_feasible(problem: &Problem, d: &Decomposition) -> bool {
    d.blocks.iter().all(|b| {
        let sub = problem.support().restrict(&b.rows, &b.cols);
        let r = restricted_targets(problem.row_targets(), &b.rows);
        let c = restricted_targets(problem.col_targets(), &b.cols);
        let (gap, _) = max_gap_set(&sub, &r, &c, &b.quotient);
        !gap.is_positive()
    })
}
