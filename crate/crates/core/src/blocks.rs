//! Blocks, splittings and limit decompositions.

use thiserror::Error;

use crate::exact::Ratio;
use crate::problem::{marginal_sum, IndexSet, SupportPattern};

/// A pair `(I, J)` of row and column sets with quotient `r(I)/c(J)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    pub rows: IndexSet,
    pub cols: IndexSet,
    pub quotient: Ratio,
}

impl Block {
    /// # Panics
    /// If `cols` is empty (the quotient would be undefined).
    pub fn new(rows: IndexSet, cols: IndexSet, r: &[Ratio], c: &[Ratio]) -> Self {
        let quotient = block_quotient(&rows, &cols, r, c);
        Self { rows, cols, quotient }
    }

    pub fn is_singleton(&self) -> bool {
        self.rows.len() == 1 && self.cols.len() == 1
    }

    /// Whether the block is contained in `other`.
    pub fn within(&self, other: &Block) -> bool {
        self.rows.is_subset(&other.rows) && self.cols.is_subset(&other.cols)
    }
}

pub fn block_quotient(rows: &IndexSet, cols: &IndexSet, r: &[Ratio], c: &[Ratio]) -> Ratio {
    assert!(!cols.is_empty(), "block quotient needs a nonempty column set");
    marginal_sum(r, rows) / marginal_sum(c, cols)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplittingError {
    #[error("block {0} has an empty row or column set")]
    EmptyBlock(usize),
    #[error("row {} is covered {} times", .0 + 1, .1)]
    RowCover(usize, usize),
    #[error("column {} is covered {} times", .0 + 1, .1)]
    ColCover(usize, usize),
    #[error("index out of range in block {0}")]
    OutOfRange(usize),
}

/// Ordered list of blocks whose row sets partition `[m]` and column sets partition `[n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splitting {
    pub blocks: Vec<Block>,
}

impl Splitting {
    pub fn new(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    pub fn validate(&self, m: usize, n: usize) -> Result<(), SplittingError> {
        validate_blocks(&self.blocks, m, n)
    }

    /// Whether every block of `self` lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &Splitting) -> bool {
        self.blocks.iter().all(|b| coarser.blocks.iter().any(|o| b.within(o)))
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks in canonical order (by smallest row index), for order-insensitive comparison.
    pub fn canonical(&self) -> Vec<(IndexSet, IndexSet)> {
        let mut v: Vec<_> = self.blocks.iter().map(|b| (b.rows.clone(), b.cols.clone())).collect();
        v.sort();
        v
    }
}

pub(crate) fn validate_blocks(blocks: &[Block], m: usize, n: usize) -> Result<(), SplittingError> {
    let mut row_cover = vec![0usize; m];
    let mut col_cover = vec![0usize; n];
    for (k, b) in blocks.iter().enumerate() {
        if b.rows.is_empty() || b.cols.is_empty() {
            return Err(SplittingError::EmptyBlock(k));
        }
        for i in b.rows.iter() {
            *row_cover.get_mut(i).ok_or(SplittingError::OutOfRange(k))? += 1;
        }
        for j in b.cols.iter() {
            *col_cover.get_mut(j).ok_or(SplittingError::OutOfRange(k))? += 1;
        }
    }
    if let Some((i, &cnt)) = row_cover.iter().enumerate().find(|(_, &c)| c != 1) {
        return Err(SplittingError::RowCover(i, cnt));
    }
    if let Some((j, &cnt)) = col_cover.iter().enumerate().find(|(_, &c)| c != 1) {
        return Err(SplittingError::ColCover(j, cnt));
    }
    Ok(())
}

/// The block decomposition of the row-adjusted limit, with the peel group
/// (step-I block) each block refines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub blocks: Vec<Block>,
    /// `groups[k]` is the index of the peel group containing `blocks[k]`.
    pub groups: Vec<usize>,
}

impl Decomposition {
    pub fn splitting(&self) -> Splitting {
        Splitting::new(self.blocks.clone())
    }

    pub fn group_count(&self) -> usize {
        self.groups.iter().max().map_or(0, |g| g + 1)
    }

    /// Blocks of peel group `g`, merged into one.
    pub fn merged_group(&self, g: usize) -> Option<Block> {
        let members: Vec<&Block> = self.blocks.iter().zip(&self.groups).filter(|(_, &k)| k == g).map(|(b, _)| b).collect();
        let first = members.first()?;
        let rows = members.iter().fold(IndexSet::new(), |acc, b| acc.union(&b.rows));
        let cols = members.iter().fold(IndexSet::new(), |acc, b| acc.union(&b.cols));
        Some(Block { rows, cols, quotient: first.quotient.clone() })
    }

    /// The merge of all maximal-quotient blocks.
    pub fn psi(&self) -> Block {
        self.merged_group(0).expect("decomposition has at least one block")
    }

    pub fn is_single_block(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn row_owner(&self, m: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; m];
        for (k, b) in self.blocks.iter().enumerate() {
            for i in b.rows.iter() {
                owner[i] = k;
            }
        }
        owner
    }

    pub fn col_owner(&self, n: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; n];
        for (k, b) in self.blocks.iter().enumerate() {
            for j in b.cols.iter() {
                owner[j] = k;
            }
        }
        owner
    }

    /// Checks that for every support entry `(i, j)` the quotient of `i`'s block
    /// is at most that of `j`'s block, with equality exactly when both lie in
    /// the same peel group. Entries joining two blocks of one group have equal
    /// quotients and still vanish in the limit.
    pub fn edge_ordering_holds(&self, support: &SupportPattern) -> bool {
        let rows = self.row_owner(support.rows());
        let cols = self.col_owner(support.cols());
        support.pairs().all(|(i, j)| {
            let (a, b) = (rows[i], cols[j]);
            let (qa, qb) = (&self.blocks[a].quotient, &self.blocks[b].quotient);
            if self.groups[a] == self.groups[b] {
                qa == qb
            } else {
                qa < qb
            }
        })
    }

    /// Quotients strictly decrease across peel groups and agree within one.
    pub fn quotient_order_holds(&self) -> bool {
        let g = self.group_count();
        let mut group_q: Vec<Option<&Ratio>> = vec![None; g];
        for (b, &k) in self.blocks.iter().zip(&self.groups) {
            match group_q[k] {
                Some(q) if *q != b.quotient => return false,
                _ => group_q[k] = Some(&b.quotient),
            }
        }
        group_q.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if a > b))
    }
}
