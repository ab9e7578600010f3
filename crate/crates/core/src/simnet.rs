//! Cosine similarity network with permutation-test edge filtering.
//!
//! The null model shuffles the entries of every document row independently,
//! which keeps each document's frequency multiset (and so its norm) while
//! destroying which terms carry the mass. An edge survives when the observed
//! similarity is rarely matched by shuffled rows.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Node, WeightedGraph};
use crate::rng::instance_rng;

/// Position of the pair `i < j` in condensed upper-triangle storage.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `x·y / (‖x‖‖y‖)`. Errors on a zero vector or mismatched lengths.
pub fn cosine(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok(dot / (nx * ny))
}

/// Symmetric similarity matrix with zero diagonal, stored as the condensed
/// upper triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.values[pair_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.values[pair_index(self.n, j, i)],
        }
    }

    /// All `C(n,2)` off-diagonal values, row-major over `i < j`.
    pub fn pairs(&self) -> &[f64] {
        &self.values
    }
}

pub fn similarity_matrix(rows: &[Vec<f64>]) -> Result<SimilarityMatrix> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::invalid("similarity needs at least two rows"));
    }
    let values = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| cosine(&rows[i], &rows[j]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(SimilarityMatrix { n, values })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationConfig {
    pub n_perm: usize,
    pub seed: u64,
    /// Report `(count + 1) / (n_perm + 1)` instead of `count / n_perm`.
    pub smoothing: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            n_perm: 1000,
            seed: 0,
            smoothing: false,
            workers: None,
        }
    }
}

/// Exceedance counts from the permutation test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PValueMatrix {
    pub n: usize,
    pub n_perm: usize,
    pub seed: u64,
    pub smoothing: bool,
    /// Number of instances whose shuffled similarity was `>=` the observed
    /// one, condensed like [`SimilarityMatrix`].
    pub exceedances: Vec<u32>,
}

impl PValueMatrix {
    pub fn count(&self, i: usize, j: usize) -> u32 {
        let (a, b) = (i.min(j), i.max(j));
        self.exceedances[pair_index(self.n, a, b)]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.from_count(self.count(i, j))
    }

    fn from_count(&self, c: u32) -> f64 {
        if self.smoothing {
            (c as f64 + 1.0) / (self.n_perm as f64 + 1.0)
        } else {
            c as f64 / self.n_perm as f64
        }
    }

    pub fn pvalues(&self) -> Vec<f64> {
        self.exceedances.iter().map(|&c| self.from_count(c)).collect()
    }
}

/// Sparse copy of a shuffled row: nonzero entries in ascending column order.
/// Summing only nonzero products in column order reproduces the dense dot
/// product bit for bit.
fn sparse(row: &[f64], out: &mut Vec<(u32, f64)>) {
    out.clear();
    out.extend(
        row.iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, &v)| (k as u32, v)),
    );
}

struct Scratch {
    counts: Vec<u32>,
    dense: Vec<Vec<f64>>,
    sparse: Vec<Vec<(u32, f64)>>,
    norms: Vec<f64>,
}

fn run_instance(rows: &[Vec<f64>], observed: &[f64], seed: u64, t: usize, s: &mut Scratch) {
    let n = rows.len();
    let mut rng = instance_rng(seed, t as u64);
    for i in 0..n {
        s.dense[i].copy_from_slice(&rows[i]);
        s.dense[i].shuffle(&mut rng);
        sparse(&s.dense[i], &mut s.sparse[i]);
        s.norms[i] = norm(&s.dense[i]);
    }
    let mut idx = 0;
    for i in 0..n {
        let xi = &s.dense[i];
        for j in (i + 1)..n {
            let dot: f64 = s.sparse[j].iter().map(|&(k, v)| xi[k as usize] * v).sum();
            let w = dot / (s.norms[i] * s.norms[j]);
            if w >= observed[idx] {
                s.counts[idx] += 1;
            }
            idx += 1;
        }
    }
}

/// Row-shuffle permutation test.
///
/// Instance `t` draws from its own stream of `config.seed`, so results are
/// identical for any worker count. Counters are accumulated per worker and
/// summed; the full set of shuffled matrices is never held in memory.
pub fn permutation_pvalues(rows: &[Vec<f64>], config: &PermutationConfig) -> Result<PValueMatrix> {
    if config.n_perm == 0 {
        return Err(Error::invalid("n_perm must be at least 1"));
    }
    if config.n_perm > u32::MAX as usize {
        return Err(Error::invalid("n_perm too large"));
    }
    let observed = similarity_matrix(rows)?;
    let n = rows.len();
    let dim = rows[0].len();
    let pairs = pair_count(n);

    let work = || {
        (0..config.n_perm)
            .into_par_iter()
            .fold(
                || Scratch {
                    counts: vec![0; pairs],
                    dense: vec![vec![0.0; dim]; n],
                    sparse: vec![Vec::new(); n],
                    norms: vec![0.0; n],
                },
                |mut s, t| {
                    run_instance(rows, observed.pairs(), config.seed, t, &mut s);
                    s
                },
            )
            .map(|s| s.counts)
            .reduce(
                || vec![0; pairs],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    };
    let exceedances = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(PValueMatrix {
        n,
        n_perm: config.n_perm,
        seed: config.seed,
        smoothing: config.smoothing,
        exceedances,
    })
}

/// `alpha / C(n,2)`.
pub fn bonferroni_threshold(alpha: f64, n: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must be in (0, 1), got {alpha}")));
    }
    if n < 2 {
        return Err(Error::invalid("Bonferroni threshold needs n >= 2"));
    }
    Ok(alpha / pair_count(n) as f64)
}

/// Per-edge threshold, with or without the Bonferroni correction.
pub fn edge_threshold(alpha: f64, n: usize, corrected: bool) -> Result<f64> {
    if corrected {
        bonferroni_threshold(alpha, n)
    } else if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(Error::invalid(format!("alpha must be in (0, 1), got {alpha}")))
    }
}

/// Keep edge `(i, j, w_ij)` iff `p_ij < tau` (and `w_ij > 0`).
pub fn filter_network(
    w: &SimilarityMatrix,
    p: &PValueMatrix,
    tau: f64,
    nodes: Vec<Node>,
) -> Result<WeightedGraph> {
    if w.n != p.n || nodes.len() != w.n {
        return Err(Error::DimensionMismatch(w.n, p.n.min(nodes.len())));
    }
    let n = w.n;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let weight = w.get(i, j);
            if p.get(i, j) < tau && weight > 0.0 {
                edges.push((i, j, weight));
            }
        }
    }
    WeightedGraph::new(nodes, edges)
}

/// Connected components as sorted node lists, ordered by first node.
pub fn components(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for (v, _) in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Induced subgraph on the largest connected component. Among equally large
/// components the one containing the smallest node index wins.
pub fn largest_component(g: &WeightedGraph) -> Result<WeightedGraph> {
    if g.node_count() == 0 {
        return Err(Error::invalid("graph has no nodes"));
    }
    let comps = components(g);
    // components are ordered by smallest member, so the first maximum wins ties
    let best = comps
        .iter()
        .fold(&comps[0], |best, c| if c.len() > best.len() { c } else { best });
    g.induced(best)
}

/// `2m / (n(n-1))`.
pub fn density(g: &WeightedGraph) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::invalid("density needs n >= 2"));
    }
    Ok(2.0 * g.edge_count() as f64 / (n as f64 * (n as f64 - 1.0)))
}
