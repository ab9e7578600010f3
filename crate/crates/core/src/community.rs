//! Community detection (Louvain, label propagation, greedy agglomeration),
//! modularity, and partition comparison by Adjusted Rand Index.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::instance_rng;

/// Community assignment aligned with the graph's node order. Community ids
/// are dense and numbered by first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub method: String,
    assignment: Vec<usize>,
}

impl Partition {
    /// Relabels arbitrary ids into dense ids in order of first appearance.
    pub fn new(method: impl Into<String>, labels: &[usize]) -> Self {
        let mut map = HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            method: method.into(),
            assignment,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    pub fn community(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Checks that the partition covers exactly the graph's nodes and that ids
    /// are dense.
    pub fn validate(&self, g: &WeightedGraph) -> Result<()> {
        if self.assignment.len() != g.node_count() {
            return Err(Error::InvalidPartition(format!(
                "{} assigns {} nodes, graph has {}",
                self.method,
                self.assignment.len(),
                g.node_count()
            )));
        }
        let k = self.community_count();
        let mut seen = vec![false; k];
        for &c in &self.assignment {
            seen[c] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPartition(format!("{} has non-dense community ids", self.method)));
        }
        Ok(())
    }

    /// CSV `node_id,community_id`.
    pub fn save(&self, g: &WeightedGraph, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["node_id", "community_id"])?;
        for (node, c) in g.nodes().iter().zip(&self.assignment) {
            w.write_record([node.id.as_str(), &c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Import an external partition. Every graph node must appear exactly
    /// once; community ids may be any strings and are densified.
    pub fn load(g: &WeightedGraph, path: &Path, method: impl Into<String>) -> Result<Self> {
        let index: HashMap<&str, usize> = g
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let mut labels: Vec<Option<String>> = vec![None; g.node_count()];
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        for rec in reader.records() {
            let rec = rec?;
            let (Some(node), Some(comm)) = (rec.get(0), rec.get(1)) else {
                return Err(Error::parse(path, "expected node_id,community_id"));
            };
            let &i = index
                .get(node)
                .ok_or_else(|| Error::InvalidPartition(format!("unknown node {node:?}")))?;
            if labels[i].replace(comm.to_string()).is_some() {
                return Err(Error::InvalidPartition(format!("node {node:?} assigned twice")));
            }
        }
        if let Some(i) = labels.iter().position(Option::is_none) {
            return Err(Error::InvalidPartition(format!(
                "node {:?} has no community",
                g.nodes()[i].id
            )));
        }
        let mut ids: HashMap<String, usize> = HashMap::new();
        let raw: Vec<usize> = labels
            .into_iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l.unwrap()).or_insert(next)
            })
            .collect();
        let p = Partition::new(method, &raw);
        p.validate(g)?;
        Ok(p)
    }
}

fn edge_weight(w: f64, binary: bool) -> f64 {
    if binary {
        1.0
    } else {
        w
    }
}

/// Modularity on the binary adjacency:
/// `Q = 1/2m sum_ij (a_ij - k_i k_j / 2m) d(P_i, P_j)`.
pub fn modularity(g: &WeightedGraph, p: &Partition) -> Result<f64> {
    generalized_modularity(g, p, true)
}

/// Modularity with edge weights as strengths.
pub fn weighted_modularity(g: &WeightedGraph, p: &Partition) -> Result<f64> {
    generalized_modularity(g, p, false)
}

fn generalized_modularity(g: &WeightedGraph, p: &Partition, binary: bool) -> Result<f64> {
    p.validate(g)?;
    let k = p.community_count();
    let mut inside = vec![0.0; k];
    let mut total = vec![0.0; k];
    let mut m2 = 0.0;
    for e in g.edges() {
        let w = edge_weight(e.weight, binary);
        let (a, b) = (p.community(e.u), p.community(e.v));
        if a == b {
            inside[a] += 2.0 * w;
        }
        total[a] += w;
        total[b] += w;
        m2 += 2.0 * w;
    }
    if m2 == 0.0 {
        return Ok(0.0);
    }
    Ok((0..k).map(|c| inside[c] / m2 - (total[c] / m2).powi(2)).sum())
}

/// Largest modularity gain available from moving a single node into a
/// neighbouring community. A non-positive value means the partition is a
/// local optimum under single-node moves.
pub fn best_single_move_gain(g: &WeightedGraph, p: &Partition, binary: bool) -> f64 {
    let k = p.community_count();
    let mut total = vec![0.0; k];
    let strength: Vec<f64> = (0..g.node_count())
        .map(|i| g.neighbors(i).map(|(_, w)| edge_weight(w, binary)).sum())
        .collect();
    for (i, s) in strength.iter().enumerate() {
        total[p.community(i)] += s;
    }
    let m2: f64 = strength.iter().sum();
    if m2 == 0.0 {
        return 0.0;
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..g.node_count() {
        let own = p.community(i);
        let mut links: HashMap<usize, f64> = HashMap::new();
        for (j, w) in g.neighbors(i) {
            *links.entry(p.community(j)).or_default() += edge_weight(w, binary);
        }
        let ki = strength[i];
        let stay = links.get(&own).copied().unwrap_or(0.0) - (total[own] - ki) * ki / m2;
        for (&c, &w) in &links {
            if c != own {
                let gain = 2.0 * ((w - total[c] * ki / m2) - stay) / m2;
                best = best.max(gain);
            }
        }
    }
    best
}

/// Weighted adjacency used by Louvain levels; self-loop weight is kept
/// separately and counted twice in the node strength.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
}

impl LevelGraph {
    fn from_graph(g: &WeightedGraph, binary: bool) -> Self {
        LevelGraph {
            adj: (0..g.node_count())
                .map(|i| g.neighbors(i).map(|(j, w)| (j, edge_weight(w, binary))).collect())
                .collect(),
            self_loops: vec![0.0; g.node_count()],
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn strength(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|e| e.1).sum::<f64>() + 2.0 * self.self_loops[i]
    }

    fn aggregate(&self, comm: &[usize], k: usize) -> LevelGraph {
        let mut weights: Vec<HashMap<usize, f64>> = vec![HashMap::new(); k];
        let mut self_loops = vec![0.0; k];
        for i in 0..self.len() {
            let ci = comm[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if ci == cj {
                    // each internal edge is visited from both ends
                    self_loops[ci] += w / 2.0;
                } else {
                    *weights[ci].entry(cj).or_default() += w;
                }
            }
        }
        let adj = weights
            .into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().collect();
                v.sort_by_key(|e| e.0);
                v
            })
            .collect();
        LevelGraph { adj, self_loops }
    }
}

/// Local moving phase. Returns whether any node changed community.
fn local_moves(lg: &LevelGraph, comm: &mut [usize], order: &[usize], m2: f64) -> bool {
    let n = lg.len();
    let strength: Vec<f64> = (0..n).map(|i| lg.strength(i)).collect();
    let mut total = vec![0.0; n];
    for i in 0..n {
        total[comm[i]] += strength[i];
    }
    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any = false;
    loop {
        let mut moved = false;
        for &i in order {
            let own = comm[i];
            let ki = strength[i];
            for &(j, w) in &lg.adj[i] {
                let c = comm[j];
                if links[c] == 0.0 {
                    touched.push(c);
                }
                links[c] += w;
            }
            total[own] -= ki;
            let mut best = own;
            let mut best_gain = links[own] - total[own] * ki / m2;
            for &c in &touched {
                let gain = links[c] - total[c] * ki / m2;
                if gain > best_gain + 1e-12 || (gain > best_gain - 1e-12 && gain >= best_gain && c < best && c != own && best != own) {
                    best = c;
                    best_gain = gain;
                }
            }
            total[best] += ki;
            if best != own {
                comm[i] = best;
                moved = true;
                any = true;
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            return any;
        }
    }
}

fn renumber(comm: &mut [usize]) -> usize {
    let mut map = HashMap::new();
    for c in comm.iter_mut() {
        let next = map.len();
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}

/// Louvain modularity optimisation. Node order is shuffled from `seed` at
/// every level; a final node-level pass leaves no improving single move.
pub fn louvain(g: &WeightedGraph, seed: u64, binary: bool) -> Partition {
    let n = g.node_count();
    let mut lg = LevelGraph::from_graph(g, binary);
    let m2: f64 = (0..n).map(|i| lg.strength(i)).sum();
    if m2 == 0.0 {
        return Partition::new("louvain", &(0..n).collect::<Vec<_>>());
    }
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level = 0u64;
    loop {
        let mut order: Vec<usize> = (0..lg.len()).collect();
        order.shuffle(&mut instance_rng(seed, level));
        let mut comm: Vec<usize> = (0..lg.len()).collect();
        let moved = local_moves(&lg, &mut comm, &order, m2);
        if !moved {
            break;
        }
        let k = renumber(&mut comm);
        for m in membership.iter_mut() {
            *m = comm[*m];
        }
        lg = lg.aggregate(&comm, k);
        level += 1;
    }
    // node-level refinement on the final assignment
    let base = LevelGraph::from_graph(g, binary);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut instance_rng(seed, level + 1));
    local_moves(&base, &mut membership, &order, m2);
    Partition::new("louvain", &membership)
}

/// Asynchronous label propagation. Each sweep visits nodes in a fresh random
/// order and moves a node to the label with the largest incident weight; a
/// node whose current label is among the best keeps it, other ties are broken
/// at random. Stops after a sweep without changes.
pub fn label_propagation(g: &WeightedGraph, seed: u64, binary: bool) -> Partition {
    const MAX_SWEEPS: u64 = 10_000;
    let n = g.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut weight_by_label = vec![0.0; n];
    let mut touched = Vec::new();
    for sweep in 0..MAX_SWEEPS {
        let mut rng = instance_rng(seed, sweep);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut changed = false;
        for &i in &order {
            for (j, w) in g.neighbors(i) {
                let l = labels[j];
                if weight_by_label[l] == 0.0 {
                    touched.push(l);
                }
                weight_by_label[l] += edge_weight(w, binary);
            }
            if touched.is_empty() {
                continue;
            }
            let best = touched
                .iter()
                .map(|&l| weight_by_label[l])
                .fold(f64::NEG_INFINITY, f64::max);
            let tol = 1e-12 * best.abs().max(1.0);
            let mut tied: Vec<usize> = touched
                .iter()
                .copied()
                .filter(|&l| weight_by_label[l] >= best - tol)
                .collect();
            if !tied.contains(&labels[i]) {
                tied.sort_unstable();
                labels[i] = tied[rng.gen_range(0..tied.len())];
                changed = true;
            }
            for &l in &touched {
                weight_by_label[l] = 0.0;
            }
            touched.clear();
        }
        if !changed {
            break;
        }
    }
    Partition::new("label_propagation", &labels)
}

/// Greedy agglomerative modularity maximisation: repeatedly merge the pair of
/// connected communities with the largest modularity gain, stopping when no
/// merge has positive gain. Ties go to the pair with the lowest ids.
pub fn greedy_modularity(g: &WeightedGraph, binary: bool) -> Partition {
    let n = g.node_count();
    let m2: f64 = g.edges().iter().map(|e| 2.0 * edge_weight(e.weight, binary)).sum();
    if m2 == 0.0 {
        return Partition::new("greedy", &(0..n).collect::<Vec<_>>());
    }
    // between[a][b]: fraction e_ab of edge ends joining a and b
    let mut between: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
    let mut ends = vec![0.0; n];
    for e in g.edges() {
        let w = edge_weight(e.weight, binary) / m2;
        *between[e.u].entry(e.v).or_default() += w;
        *between[e.v].entry(e.u).or_default() += w;
        ends[e.u] += w;
        ends[e.v] += w;
    }
    let mut active = vec![true; n];
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            let mut partners: Vec<(&usize, &f64)> = between[a].iter().filter(|(&b, _)| b > a).collect();
            partners.sort_by_key(|p| *p.0);
            for (&b, &e_ab) in partners {
                let gain = 2.0 * (e_ab - ends[a] * ends[b]);
                if best.is_none_or(|(g0, _, _)| gain > g0) {
                    best = Some((gain, a, b));
                }
            }
        }
        let Some((gain, a, b)) = best else { break };
        if gain <= 0.0 {
            break;
        }
        // merge b into a
        let from_b: Vec<(usize, f64)> = between[b].drain().collect();
        for (c, w) in from_b {
            between[c].remove(&b);
            if c == a {
                continue;
            }
            *between[a].entry(c).or_default() += w;
            *between[c].entry(a).or_default() += w;
        }
        ends[a] += ends[b];
        ends[b] = 0.0;
        active[b] = false;
        for m in membership.iter_mut() {
            if *m == b {
                *m = a;
            }
        }
    }
    Partition::new("greedy", &membership)
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand Index from the contingency table of two partitions.
pub fn adjusted_rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::InvalidPartition(format!(
            "{} covers {} nodes but {} covers {}",
            p1.method,
            p1.len(),
            p2.method,
            p2.len()
        )));
    }
    let n = p1.len();
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows = vec![0usize; p1.community_count()];
    let mut cols = vec![0usize; p2.community_count()];
    for i in 0..n {
        let (a, b) = (p1.community(i), p2.community(i));
        *table.entry((a, b)).or_default() += 1;
        rows[a] += 1;
        cols[b] += 1;
    }
    let index: f64 = table.values().map(|&c| comb2(c)).sum();
    let sa: f64 = rows.iter().map(|&c| comb2(c)).sum();
    let sb: f64 = cols.iter().map(|&c| comb2(c)).sum();
    let total = comb2(n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sa * sb / total;
    let max = (sa + sb) / 2.0;
    if max == expected {
        // both partitions trivial and identical in shape
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Pairwise ARI over all partitions; the diagonal is 1.
pub fn ari_matrix(partitions: &[Partition]) -> Result<Vec<Vec<f64>>> {
    if partitions.len() < 2 {
        return Err(Error::invalid("ARI matrix needs at least two partitions"));
    }
    let k = partitions.len();
    let mut m = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let v = adjusted_rand_index(&partitions[i], &partitions[j])?;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    Ok(m)
}

/// Message for graphs dense enough that sparse-graph community methods are
/// on shaky ground.
pub fn density_warning(density: f64) -> Option<String> {
    (density > 0.2).then(|| {
        format!("network density {density:.3} > 0.2: community detection methods assume sparse graphs")
    })
}
