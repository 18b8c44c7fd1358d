//! Generalized Hall condition via exact max-flow / min-cut.
//!
//! For a scale `t > 0` a matrix with support inside `S(A)`, row sums `r_i`
//! and column sums `t·c_j` exists iff no row set `I` has
//! `r(I) > t·c(N(I))`. Every cut of the flow network that avoids support
//! arcs corresponds to a row set `I` (with `N(I)` forced to the source side)
//! and has capacity `r([m]) − (r(I) − t·c(N(I)))`. The maximum flow therefore
//! yields the largest gap, and the rows that cannot reach the sink in the
//! residual graph form the unique maximal row set attaining it.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exact::{self, Ratio};
use crate::flow::{self, FlowNetwork, MaxFlowResult, Residual};
use crate::problem::{marginal_sum, IndexSet, SupportPattern};

pub use crate::flow::max_flow;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeasibilityError {
    #[error("instance is infeasible at this scale (gap {0})")]
    InfeasibleInstance(Ratio),
    #[error("row total {rows} differs from scaled column total {cols}")]
    TotalsMismatch { rows: Ratio, cols: Ratio },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
}

/// Outcome of the Hall test.
///
/// For an infeasible instance `witness` is the maximal row set with the
/// largest positive gap `r(I) − t·c(N(I))`. For a feasible one the largest gap
/// is zero and `witness` is the maximal tight set (possibly empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallCertificate {
    pub verdict: Verdict,
    pub witness: IndexSet,
    pub gap: Ratio,
}

impl HallCertificate {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Verdict::Feasible
    }
}

pub fn build_network(support: &SupportPattern, r: &[Ratio], c: &[Ratio], t: &Ratio) -> FlowNetwork {
    FlowNetwork::new(support, r, c, t)
}

fn gap_from_flow(net: &FlowNetwork, res: &MaxFlowResult, r: &[Ratio]) -> (Ratio, IndexSet) {
    let rows: IndexSet = (0..net.rows()).filter(|&i| !res.reach_to_sink[net.row_node(i)]).collect();
    (exact::sum(r) - &res.value, rows)
}

/// `max_I r(I) − t·c(N(I))` over all row sets (the empty set counts, so the
/// value is at least zero) and the unique maximal optimizer.
pub fn max_gap_set(support: &SupportPattern, r: &[Ratio], c: &[Ratio], t: &Ratio) -> (Ratio, IndexSet) {
    let net = build_network(support, r, c, t);
    let res = max_flow(&net);
    gap_from_flow(&net, &res, r)
}

pub fn hall_check(support: &SupportPattern, r: &[Ratio], c: &[Ratio], t: &Ratio) -> HallCertificate {
    let (gap, witness) = max_gap_set(support, r, c, t);
    debug_assert!(!gap.is_negative());
    let verdict = if gap.is_zero() { Verdict::Feasible } else { Verdict::Infeasible };
    debug_assert_eq!(marginal_sum(r, &witness) - t * marginal_sum(c, &support.neighborhood(&witness)), gap);
    HallCertificate { verdict, witness, gap }
}

/// Support entries that are positive in at least one matrix with row sums
/// `r`, column sums `t·c` and support inside `support`.
///
/// From one maximum flow, entry `(i, j)` is flexible iff it carries flow or
/// the residual graph has a path from column `j` back to row `i`.
pub fn flexible_support(support: &SupportPattern, r: &[Ratio], c: &[Ratio], t: &Ratio) -> Result<SupportPattern, FeasibilityError> {
    let rows_total = exact::sum(r);
    let cols_total = t * exact::sum(c);
    if rows_total != cols_total {
        return Err(FeasibilityError::TotalsMismatch { rows: rows_total, cols: cols_total });
    }
    let net = build_network(support, r, c, t);
    let res = flow::max_flow(&net);
    if res.value != rows_total {
        return Err(FeasibilityError::InfeasibleInstance(rows_total - res.value));
    }
    let residual = Residual::new(&net, &res.flow);
    let mut reach: Vec<Option<Vec<bool>>> = vec![None; support.cols()];
    let mut flexible = Vec::new();
    for (a, (i, j)) in net.support_arcs() {
        let keep = res.flow[a].is_positive() || {
            let seen = reach[j].get_or_insert_with(|| residual.reachable_from(net.col_node(j)));
            seen[net.row_node(i)]
        };
        if keep {
            flexible.push((i, j));
        }
    }
    Ok(SupportPattern::from_pairs(support.rows(), support.cols(), flexible))
}

/// Connected components of the bipartite graph on `support`, as `(rows, cols)`
/// pairs ordered by smallest row index. Isolated columns are not reported.
pub fn components(support: &SupportPattern) -> Vec<(IndexSet, IndexSet)> {
    let (m, n) = (support.rows(), support.cols());
    let mut row_seen = vec![false; m];
    let mut col_seen = vec![false; n];
    let mut out = Vec::new();
    for root in 0..m {
        if row_seen[root] {
            continue;
        }
        row_seen[root] = true;
        let (mut rows, mut cols) = (vec![root], Vec::new());
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for &j in support.row_neighbors(i) {
                if col_seen[j] {
                    continue;
                }
                col_seen[j] = true;
                cols.push(j);
                for &k in support.col_neighbors(j) {
                    if !row_seen[k] {
                        row_seen[k] = true;
                        rows.push(k);
                        queue.push_back(k);
                    }
                }
            }
        }
        out.push((rows.into_iter().collect(), cols.into_iter().collect()));
    }
    out
}
