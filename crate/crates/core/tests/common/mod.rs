//! Brute-force reference implementations and seeded instance generators
//! shared by the integration tests. Everything here enumerates subsets
//! directly, so it only scales to a handful of rows.

#![allow(dead_code)]

use isp_limits::exact::{int, ratio};
use isp_limits::{Grid, IndexSet, IspOptions, Problem, Ratio, SupportPattern};
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random support on `m × n` with every row and column nonempty.
pub fn random_support(rng: &mut impl Rng, m: usize, n: usize, density: f64) -> SupportPattern {
    let mut cells = vec![false; m * n];
    for cell in cells.iter_mut() {
        *cell = rng.gen_bool(density);
    }
    for i in 0..m {
        if !(0..n).any(|j| cells[i * n + j]) {
            cells[i * n + rng.gen_range(0..n)] = true;
        }
    }
    for j in 0..n {
        if !(0..m).any(|i| cells[i * n + j]) {
            cells[rng.gen_range(0..m) * n + j] = true;
        }
    }
    let pairs = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| cells[i * n + j]);
    SupportPattern::from_pairs(m, n, pairs.collect::<Vec<_>>())
}

pub fn random_targets(rng: &mut impl Rng, len: usize, max: i64) -> Vec<Ratio> {
    (0..len).map(|_| int(rng.gen_range(1..=max))).collect()
}

/// Positive rational with numerator and denominator up to `max`.
pub fn random_ratio(rng: &mut impl Rng, max: i64) -> Ratio {
    ratio(rng.gen_range(1..=max), rng.gen_range(1..=max))
}

/// Random instance with integer entries `1..=max_entry` on a random support.
pub fn random_problem(rng: &mut impl Rng, max_dim: usize, density: f64, max_entry: i64, max_target: i64) -> Problem {
    let m = rng.gen_range(1..=max_dim);
    let n = rng.gen_range(1..=max_dim);
    let support = random_support(rng, m, n, density);
    let matrix = Grid::from_fn(m, n, |i, j| if support.contains(i, j) { int(rng.gen_range(1..=max_entry)) } else { Ratio::zero() });
    let r = random_targets(rng, m, max_target);
    let c = random_targets(rng, n, max_target);
    Problem::new(matrix, r, c).expect("generated instance is valid")
}

pub fn mask_set(mask: u64, n: usize) -> IndexSet {
    IndexSet::from_mask(mask, n)
}

/// Neighbourhood of a row mask as a column mask, computed from scratch.
pub fn neighbour_mask(support: &SupportPattern, rows: u64) -> u64 {
    let mut out = 0u64;
    for i in 0..support.rows() {
        if rows >> i & 1 == 1 {
            for j in 0..support.cols() {
                if support.contains(i, j) {
                    out |= 1 << j;
                }
            }
        }
    }
    out
}

pub fn mask_sum(values: &[Ratio], mask: u64) -> Ratio {
    values.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).fold(Ratio::zero(), |acc, (_, v)| acc + v)
}

pub fn gap_of(support: &SupportPattern, r: &[Ratio], c: &[Ratio], t: &Ratio, rows: u64) -> Ratio {
    mask_sum(r, rows) - t * mask_sum(c, neighbour_mask(support, rows))
}

pub struct BruteGap {
    pub gap: Ratio,
    /// Union of all optimizers.
    pub maximal: u64,
    pub optimizers: Vec<u64>,
}

/// `max_I r(I) − t·c(N(I))` over all row sets including the empty one.
pub fn brute_max_gap(support: &SupportPattern, r: &[Ratio], c: &[Ratio], t: &Ratio) -> BruteGap {
    let mut best = Ratio::zero();
    let mut optimizers = vec![0u64];
    for mask in 1..(1u64 << support.rows()) {
        let g = gap_of(support, r, c, t, mask);
        if g > best {
            best = g;
            optimizers = vec![mask];
        } else if g == best {
            optimizers.push(mask);
        }
    }
    let maximal = optimizers.iter().fold(0, |acc, m| acc | m);
    BruteGap { gap: best, maximal, optimizers }
}

pub struct BrutePhi {
    pub ratio: Ratio,
    pub maximizers: Vec<u64>,
    /// The maximizer of largest cardinality.
    pub largest: u64,
}

/// Largest `r(I)/c(N(I))` over nonempty row sets; requires no empty rows.
pub fn brute_phi(support: &SupportPattern, r: &[Ratio], c: &[Ratio]) -> BrutePhi {
    let mut best: Option<Ratio> = None;
    let mut maximizers = Vec::new();
    for mask in 1..(1u64 << support.rows()) {
        let q = mask_sum(r, mask) / mask_sum(c, neighbour_mask(support, mask));
        match &best {
            Some(b) if q < *b => {}
            Some(b) if q == *b => maximizers.push(mask),
            _ => {
                best = Some(q);
                maximizers = vec![mask];
            }
        }
    }
    let largest = *maximizers.iter().max_by_key(|m| (m.count_ones(), **m)).expect("at least one row");
    BrutePhi { ratio: best.expect("at least one row"), maximizers, largest }
}

/// Connected components of a bipartite support via union-find, sorted.
/// Rows and columns with no entries are dropped.
pub fn bipartite_components(m: usize, n: usize, entries: &[(usize, usize)]) -> Vec<(IndexSet, IndexSet)> {
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut touched = vec![false; m + n];
    for &(i, j) in entries {
        let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
        parent[a] = b;
        touched[i] = true;
        touched[m + j] = true;
    }
    let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for (v, _) in touched.iter().enumerate().filter(|(_, t)| **t) {
        let root = find(&mut parent, v);
        let e = groups.entry(root).or_default();
        if v < m {
            e.0.push(v);
        } else {
            e.1.push(v - m);
        }
    }
    let mut out: Vec<(IndexSet, IndexSet)> =
        groups.into_values().map(|(r, c)| (r.into_iter().collect(), c.into_iter().collect())).collect();
    out.sort();
    out
}

/// Naive scaling for `rounds` rounds, returning `B(rounds)`, `C(rounds)` and
/// the components of the entries of `B` above `threshold`.
pub fn naive_blocks(problem: &Problem, rounds: usize, threshold: f64) -> (Grid<f64>, Grid<f64>, Vec<(IndexSet, IndexSet)>) {
    let trace = isp_limits::isp_run(problem, &IspOptions::rounds(rounds)).expect("scaling runs");
    let last = trace.last();
    let big: Vec<(usize, usize)> = last.b.indexed().filter(|(_, _, &v)| v > threshold).map(|(i, j, _)| (i, j)).collect();
    let blocks = bipartite_components(problem.rows(), problem.cols(), &big);
    (last.b.clone(), last.c.clone(), blocks)
}

/// Plain alternating scaling written out loop by loop.
pub fn reference_rounds(a: &Grid<f64>, r: &[f64], c: &[f64], rounds: usize) -> (Grid<f64>, Grid<f64>) {
    let (m, n) = a.shape();
    let mut b = a.clone();
    let mut cm = a.clone();
    for _ in 0..rounds {
        b = cm.clone();
        for i in 0..m {
            let s: f64 = (0..n).map(|j| b[(i, j)]).sum();
            for j in 0..n {
                b[(i, j)] *= r[i] / s;
            }
        }
        cm = b.clone();
        for j in 0..n {
            let s: f64 = (0..m).map(|i| cm[(i, j)]).sum();
            for i in 0..m {
                cm[(i, j)] *= c[j] / s;
            }
        }
    }
    (b, cm)
}
