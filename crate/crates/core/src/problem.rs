//! Problem data: a nonnegative matrix with positive row and column targets,
//! its support pattern, and the index-set algebra used everywhere else.

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exact::{self, Ratio};
use crate::grid::Grid;

/// Sorted, duplicate-free set of 0-based indices.
///
/// The canonical ordering makes equality of blocks and splittings syntactic.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_sorted(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Self(v)
    }

    /// Set of indices whose bit is set in `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self((0..n).filter(|&k| mask >> k & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        self.iter().filter(|&k| other.contains(k)).collect()
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        self.iter().filter(|&k| !other.contains(k)).collect()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|k| other.contains(k))
    }

    /// Maps local indices through `labels` (`labels[k]` is the global index of local `k`).
    pub fn lift(&self, labels: &[usize]) -> IndexSet {
        self.iter().map(|k| labels[k]).collect()
    }

    /// 1-based indices, the way they are shown to users.
    pub fn one_based(&self) -> Vec<usize> {
        self.iter().map(|k| k + 1).collect()
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (pos, k) in self.iter().enumerate() {
            if pos > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", k + 1)?;
        }
        f.write_str("}")
    }
}

/// The support `S(A) = {(i, j) : a_ij ≠ 0}` stored as adjacency in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPattern {
    rows: usize,
    cols: usize,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
}

impl SupportPattern {
    pub fn from_pairs(rows: usize, cols: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut row_adj = vec![Vec::new(); rows];
        let mut col_adj = vec![Vec::new(); cols];
        for (i, j) in pairs {
            assert!(i < rows && j < cols, "support pair ({i}, {j}) out of range");
            row_adj[i].push(j);
            col_adj[j].push(i);
        }
        for adj in row_adj.iter_mut().chain(col_adj.iter_mut()) {
            adj.sort_unstable();
            adj.dedup();
        }
        Self { rows, cols, row_adj, col_adj }
    }

    pub fn of<T: Clone + Zero>(matrix: &Grid<T>) -> Self {
        Self::from_pairs(matrix.rows(), matrix.cols(), matrix.nonzero_positions())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row_adj[i].binary_search(&j).is_ok()
    }

    pub fn row_neighbors(&self, i: usize) -> &[usize] {
        &self.row_adj[i]
    }

    pub fn col_neighbors(&self, j: usize) -> &[usize] {
        &self.col_adj[j]
    }

    /// Pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_adj.iter().enumerate().flat_map(|(i, adj)| adj.iter().map(move |&j| (i, j)))
    }

    pub fn len(&self) -> usize {
        self.row_adj.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `N(I)`: columns with a support entry in some row of `rows`.
    pub fn neighborhood(&self, rows: &IndexSet) -> IndexSet {
        rows.iter().flat_map(|i| self.row_adj[i].iter().copied()).collect()
    }

    /// Support of the submatrix on `rows × cols`, re-indexed locally.
    pub fn restrict(&self, rows: &IndexSet, cols: &IndexSet) -> SupportPattern {
        let col_pos: Vec<Option<usize>> = {
            let mut pos = vec![None; self.cols];
            for (local, j) in cols.iter().enumerate() {
                pos[j] = Some(local);
            }
            pos
        };
        let pairs = rows.iter().enumerate().flat_map(|(local_i, i)| {
            let col_pos = &col_pos;
            self.row_adj[i].iter().filter_map(move |&j| col_pos[j].map(|lj| (local_i, lj)))
        });
        SupportPattern::from_pairs(rows.len(), cols.len(), pairs.collect::<Vec<_>>())
    }

    pub fn has_empty_line(&self) -> bool {
        self.row_adj.iter().any(Vec::is_empty) || self.col_adj.iter().any(Vec::is_empty)
    }
}

/// `N(I)` for a support pattern.
pub fn neighborhood(support: &SupportPattern, rows: &IndexSet) -> IndexSet {
    support.neighborhood(rows)
}

/// Exact sum of `targets` over `set`.
pub fn marginal_sum(targets: &[Ratio], set: &IndexSet) -> Ratio {
    exact::sum(set.iter().map(|k| &targets[k]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Row,
    Col,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Row => "row",
            Side::Col => "column",
        })
    }
}

/// Validation failures. Indices are stored 0-based and displayed 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("negative entry at ({}, {})", .0 + 1, .1 + 1)]
    NegativeEntry(usize, usize),
    #[error("{side} target {} is not strictly positive", .index + 1)]
    NonPositiveTarget { side: Side, index: usize },
    #[error("row {} contains only zeros", .0 + 1)]
    ZeroRow(usize),
    #[error("column {} contains only zeros", .0 + 1)]
    ZeroCol(usize),
}

/// A validated scaling instance `(A, r, c)`.
///
/// Entries and targets are held as exact rationals; float copies are cached
/// for the iterative phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    matrix: Grid<Ratio>,
    row_targets: Vec<Ratio>,
    col_targets: Vec<Ratio>,
    support: SupportPattern,
    float_matrix: Grid<f64>,
    float_rows: Vec<f64>,
    float_cols: Vec<f64>,
}

impl Problem {
    pub fn new(matrix: Grid<Ratio>, row_targets: Vec<Ratio>, col_targets: Vec<Ratio>) -> Result<Self, ProblemError> {
        let (m, n) = matrix.shape();
        if m == 0 || n == 0 {
            return Err(ProblemError::Empty);
        }
        if row_targets.len() != m {
            return Err(ProblemError::DimensionMismatch(format!("{m} matrix rows but {} row targets", row_targets.len())));
        }
        if col_targets.len() != n {
            return Err(ProblemError::DimensionMismatch(format!("{n} matrix columns but {} column targets", col_targets.len())));
        }
        if let Some((i, j, _)) = matrix.indexed().find(|(_, _, v)| v.is_negative()) {
            return Err(ProblemError::NegativeEntry(i, j));
        }
        for (side, targets) in [(Side::Row, &row_targets), (Side::Col, &col_targets)] {
            if let Some(index) = targets.iter().position(|t| !t.is_positive()) {
                return Err(ProblemError::NonPositiveTarget { side, index });
            }
        }
        let support = SupportPattern::of(&matrix);
        if let Some(i) = (0..m).find(|&i| support.row_neighbors(i).is_empty()) {
            return Err(ProblemError::ZeroRow(i));
        }
        if let Some(j) = (0..n).find(|&j| support.col_neighbors(j).is_empty()) {
            return Err(ProblemError::ZeroCol(j));
        }
        let float_matrix = matrix.map(exact::to_f64);
        let float_rows = row_targets.iter().map(exact::to_f64).collect();
        let float_cols = col_targets.iter().map(exact::to_f64).collect();
        Ok(Self { matrix, row_targets, col_targets, support, float_matrix, float_rows, float_cols })
    }

    /// Builds a problem from nested rows.
    pub fn from_rows(rows: Vec<Vec<Ratio>>, row_targets: Vec<Ratio>, col_targets: Vec<Ratio>) -> Result<Self, ProblemError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(ProblemError::DimensionMismatch(format!("row {} has {} entries, expected {n}", i + 1, r.len())));
        }
        let matrix = Grid::from_vec(m, n, rows.into_iter().flatten().collect());
        Self::new(matrix, row_targets, col_targets)
    }

    pub fn from_ints(rows: &[&[i64]], row_targets: &[i64], col_targets: &[i64]) -> Result<Self, ProblemError> {
        Self::from_rows(
            rows.iter().map(|r| r.iter().map(|&v| exact::int(v)).collect()).collect(),
            row_targets.iter().map(|&v| exact::int(v)).collect(),
            col_targets.iter().map(|&v| exact::int(v)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Grid<Ratio> {
        &self.matrix
    }

    pub fn row_targets(&self) -> &[Ratio] {
        &self.row_targets
    }

    pub fn col_targets(&self) -> &[Ratio] {
        &self.col_targets
    }

    pub fn support(&self) -> &SupportPattern {
        &self.support
    }

    pub fn float_matrix(&self) -> &Grid<f64> {
        &self.float_matrix
    }

    pub fn float_row_targets(&self) -> &[f64] {
        &self.float_rows
    }

    pub fn float_col_targets(&self) -> &[f64] {
        &self.float_cols
    }

    pub fn row_total(&self) -> Ratio {
        exact::sum(&self.row_targets)
    }

    pub fn col_total(&self) -> Ratio {
        exact::sum(&self.col_targets)
    }

    /// Same matrix with row targets multiplied by `t`.
    pub fn with_scaled_row_targets(&self, t: &Ratio) -> Result<Self, ProblemError> {
        Self::new(self.matrix.clone(), self.row_targets.iter().map(|r| r * t).collect(), self.col_targets.clone())
    }

    /// Same targets with a replaced matrix (used by pruning).
    pub fn with_matrix(&self, matrix: Grid<Ratio>) -> Result<Self, ProblemError> {
        Self::new(matrix, self.row_targets.clone(), self.col_targets.clone())
    }
}

/// Validates `(A, r, c)` and returns the problem.
pub fn validate_problem(matrix: Vec<Vec<Ratio>>, r: Vec<Ratio>, c: Vec<Ratio>) -> Result<Problem, ProblemError> {
    Problem::from_rows(matrix, r, c)
}
