//! Exact max-flow on the bipartite transportation network.
//!
//! Nodes are laid out as `source, rows.., cols.., sink`. Augmenting paths are
//! found by breadth-first search (shortest augmenting path), which bounds
//! the number of augmentations by `O(VE)` regardless of capacity values.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::exact::{self, Ratio};
use crate::problem::SupportPattern;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub cap: Ratio,
}

/// Source → row `i` (capacity `r_i`), row `i` → column `j` for each support
/// entry (capacity larger than any feasible flow), column `j` → sink
/// (capacity `t·c_j`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    rows: usize,
    cols: usize,
    scale: Ratio,
    arcs: Vec<FlowArc>,
    support_arcs: Vec<(usize, usize)>,
}

impl FlowNetwork {
    /// Arc order is deterministic: source arcs, support arcs in row-major
    /// order, then sink arcs.
    pub fn new(support: &SupportPattern, r: &[Ratio], c: &[Ratio], t: &Ratio) -> Self {
        assert!(t.is_positive(), "scale factor must be positive");
        let (m, n) = (support.rows(), support.cols());
        assert_eq!(r.len(), m);
        assert_eq!(c.len(), n);
        let unbounded = exact::sum(r) + exact::one();
        let source = 0;
        let sink = m + n + 1;
        let mut arcs = Vec::with_capacity(m + n + support.len());
        for (i, ri) in r.iter().enumerate() {
            arcs.push(FlowArc { from: source, to: 1 + i, cap: ri.clone() });
        }
        let support_arcs: Vec<(usize, usize)> = support.pairs().collect();
        for &(i, j) in &support_arcs {
            arcs.push(FlowArc { from: 1 + i, to: 1 + m + j, cap: unbounded.clone() });
        }
        for (j, cj) in c.iter().enumerate() {
            arcs.push(FlowArc { from: 1 + m + j, to: sink, cap: t * cj });
        }
        Self { rows: m, cols: n, scale: t.clone(), arcs, support_arcs }
    }

    pub fn node_count(&self) -> usize {
        self.rows + self.cols + 2
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.rows + self.cols + 1
    }

    pub fn row_node(&self, i: usize) -> usize {
        1 + i
    }

    pub fn col_node(&self, j: usize) -> usize {
        1 + self.rows + j
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn scale(&self) -> &Ratio {
        &self.scale
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `(arc index, (i, j))` for each support arc.
    pub fn support_arcs(&self) -> impl Iterator<Item = (usize, (usize, usize))> + '_ {
        self.support_arcs.iter().enumerate().map(move |(k, &p)| (self.rows + k, p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlowResult {
    /// Flow on each arc, aligned with [`FlowNetwork::arcs`].
    pub flow: Vec<Ratio>,
    pub value: Ratio,
    /// Nodes reachable from the source in the residual graph.
    pub reach_from_source: Vec<bool>,
    /// Nodes from which the sink is reachable in the residual graph.
    pub reach_to_sink: Vec<bool>,
}

/// Residual view of a network under a given flow.
pub(crate) struct Residual<'a> {
    net: &'a FlowNetwork,
    flow: &'a [Ratio],
    /// `incident[u]` lists arcs with `u` as an endpoint.
    incident: Vec<Vec<usize>>,
}

impl<'a> Residual<'a> {
    pub(crate) fn new(net: &'a FlowNetwork, flow: &'a [Ratio]) -> Self {
        Self { net, flow, incident: incidence(net) }
    }

    /// Residual successors of `u`: `(next node, arc, forward?)`.
    fn successors(&self, u: usize) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        self.incident[u].iter().filter_map(move |&a| {
            let arc = &self.net.arcs[a];
            if arc.from == u && self.flow[a] < arc.cap {
                Some((arc.to, a, true))
            } else if arc.to == u && self.flow[a].is_positive() {
                Some((arc.from, a, false))
            } else {
                None
            }
        })
    }

    /// Residual predecessors of `v`.
    fn predecessors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident[v].iter().filter_map(move |&a| {
            let arc = &self.net.arcs[a];
            if arc.to == v && self.flow[a] < arc.cap {
                Some(arc.from)
            } else if arc.from == v && self.flow[a].is_positive() {
                Some(arc.to)
            } else {
                None
            }
        })
    }

    pub(crate) fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.net.node_count()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for (v, _, _) in self.successors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    pub(crate) fn reaching(&self, target: usize) -> Vec<bool> {
        let mut seen = vec![false; self.net.node_count()];
        seen[target] = true;
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            for u in self.predecessors(v) {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Shortest augmenting path as `(arc, forward?)` pairs from source to sink.
    fn shortest_path(&self) -> Option<Vec<(usize, bool)>> {
        let (s, t) = (self.net.source(), self.net.sink());
        let mut parent: Vec<Option<(usize, usize, bool)>> = vec![None; self.net.node_count()];
        let mut seen = vec![false; self.net.node_count()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for (v, a, fwd) in self.successors(u) {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                parent[v] = Some((u, a, fwd));
                if v == t {
                    let mut path = Vec::new();
                    let mut node = t;
                    while let Some((prev, a, fwd)) = parent[node] {
                        path.push((a, fwd));
                        node = prev;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(v);
            }
        }
        None
    }
}

fn incidence(net: &FlowNetwork) -> Vec<Vec<usize>> {
    let mut incident = vec![Vec::new(); net.node_count()];
    for (a, arc) in net.arcs.iter().enumerate() {
        incident[arc.from].push(a);
        incident[arc.to].push(a);
    }
    incident
}

pub fn max_flow(net: &FlowNetwork) -> MaxFlowResult {
    let mut flow = vec![Ratio::zero(); net.arcs.len()];
    loop {
        let path = {
            let residual = Residual::new(net, &flow);
            residual.shortest_path()
        };
        let Some(path) = path else { break };
        let bottleneck = path
            .iter()
            .map(|&(a, fwd)| if fwd { &net.arcs[a].cap - &flow[a] } else { flow[a].clone() })
            .min()
            .expect("augmenting path is nonempty");
        for (a, fwd) in path {
            if fwd {
                flow[a] += &bottleneck;
            } else {
                flow[a] -= &bottleneck;
            }
        }
    }
    let residual = Residual::new(net, &flow);
    let reach_from_source = residual.reachable_from(net.source());
    let reach_to_sink = residual.reaching(net.sink());
    let value = exact::sum(net.arcs.iter().zip(&flow).filter(|(arc, _)| arc.from == net.source()).map(|(_, f)| f));
    MaxFlowResult { flow, value, reach_from_source, reach_to_sink }
}
