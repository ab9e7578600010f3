//! Naive reference implementations working on dense matrices, written from
//! the textbook definitions and sharing no code with the library.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;

use econet::rng::instance_rng;
use econet::WeightedGraph;

pub struct Dense {
    pub n: usize,
    pub a: Vec<Vec<bool>>,
    pub w: Vec<Vec<f64>>,
}

impl Dense {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let n = g.node_count();
        let mut a = vec![vec![false; n]; n];
        let mut w = vec![vec![0.0; n]; n];
        for e in g.edges() {
            a[e.u][e.v] = true;
            a[e.v][e.u] = true;
            w[e.u][e.v] = e.weight;
            w[e.v][e.u] = e.weight;
        }
        Dense { n, a, w }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.a[i].iter().filter(|&&x| x).count()
    }

    /// Row sum in ascending column order.
    pub fn strength(&self, i: usize) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            if self.a[i][j] {
                s += self.w[i][j];
            }
        }
        s
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }
}

/// Closed triples over connected triples, counting every (center, pair).
pub fn global_clustering(d: &Dense) -> Option<f64> {
    let (mut closed, mut triples) = (0usize, 0usize);
    for c in 0..d.n {
        for j in 0..d.n {
            for h in (j + 1)..d.n {
                if j != c && h != c && d.a[c][j] && d.a[c][h] {
                    triples += 1;
                    if d.a[j][h] {
                        closed += 1;
                    }
                }
            }
        }
    }
    (triples > 0).then(|| closed as f64 / triples as f64)
}

/// Ordered-pair form: `1/(s_i(k_i-1)) sum_{j != h} (w_ij + w_ih)/2 a_ij a_ih a_jh`.
pub fn local_weighted(d: &Dense, i: usize) -> Option<f64> {
    let k = d.degree(i);
    if k < 2 {
        return None;
    }
    let mut sum = 0.0;
    for j in 0..d.n {
        for h in 0..d.n {
            if j != h && d.a[i][j] && d.a[i][h] && d.a[j][h] {
                sum += (d.w[i][j] + d.w[i][h]) / 2.0;
            }
        }
    }
    Some(sum / (d.strength(i) * (k as f64 - 1.0)))
}

pub fn local_unweighted(d: &Dense, i: usize) -> Option<f64> {
    let k = d.degree(i);
    if k < 2 {
        return None;
    }
    let mut closed = 0usize;
    for j in 0..d.n {
        for h in 0..d.n {
            if j != h && d.a[i][j] && d.a[i][h] && d.a[j][h] {
                closed += 1;
            }
        }
    }
    Some(closed as f64 / (k * (k - 1)) as f64)
}

pub fn density(d: &Dense) -> f64 {
    d.edge_count() as f64 / (d.n * (d.n - 1) / 2) as f64
}

/// Pearson correlation of `(x_i, x_j)` over both orientations of every edge.
pub fn assortativity_scalar(d: &Dense, x: &[f64]) -> Option<f64> {
    let mut pairs = Vec::new();
    for i in 0..d.n {
        for j in 0..d.n {
            if d.a[i][j] {
                pairs.push((x[i], x[j]));
            }
        }
    }
    if pairs.is_empty() {
        return None;
    }
    let m = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / m;
    let vx = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / m;
    let vy = pairs.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / m;
    let scale = pairs.iter().map(|p| p.0 * p.0).sum::<f64>() / m;
    if vx <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Mixing-matrix form `(sum_a e_aa - sum_a q_a^2) / (1 - sum_a q_a^2)`.
pub fn assortativity_categorical(d: &Dense, f: &[&str]) -> Option<f64> {
    let mut e: HashMap<(&str, &str), f64> = HashMap::new();
    let mut ends = 0.0;
    for i in 0..d.n {
        for j in 0..d.n {
            if d.a[i][j] {
                *e.entry((f[i], f[j])).or_default() += 1.0;
                ends += 1.0;
            }
        }
    }
    if ends == 0.0 {
        return None;
    }
    let mut q: HashMap<&str, f64> = HashMap::new();
    let mut trace = 0.0;
    for (&(a, b), &c) in &e {
        *q.entry(a).or_default() += c / ends;
        if a == b {
            trace += c / ends;
        }
    }
    let qq: f64 = q.values().map(|v| v * v).sum();
    if 1.0 - qq <= 1e-12 {
        return None;
    }
    Some((trace - qq) / (1.0 - qq))
}

/// `1/2m sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j)` with `A` binary or
/// weighted.
pub fn modularity(d: &Dense, labels: &[usize], weighted: bool) -> f64 {
    let val = |i: usize, j: usize| {
        if !d.a[i][j] {
            0.0
        } else if weighted {
            d.w[i][j]
        } else {
            1.0
        }
    };
    let k: Vec<f64> = (0..d.n).map(|i| (0..d.n).map(|j| val(i, j)).sum()).collect();
    let m2: f64 = k.iter().sum();
    if m2 == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..d.n {
        for j in 0..d.n {
            if labels[i] == labels[j] {
                q += val(i, j) - k[i] * k[j] / m2;
            }
        }
    }
    q / m2
}

/// Pair-counting form of the Adjusted Rand Index.
pub fn ari(p: &[usize], q: &[usize]) -> f64 {
    let n = p.len();
    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            match (p[i] == p[j], q[i] == q[j]) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    let den = (a + b) * (b + d) + (a + c) * (c + d);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (a * d - b * c) / den
}

#[derive(Clone, Copy, Debug)]
pub enum Attr {
    Degree,
    Strength,
    Rank,
}

/// Node values by definition; ranks order by strength then index.
pub fn values(d: &Dense, attr: Attr) -> Vec<f64> {
    match attr {
        Attr::Degree => (0..d.n).map(|i| d.degree(i) as f64).collect(),
        Attr::Strength => (0..d.n).map(|i| d.strength(i)).collect(),
        Attr::Rank => {
            let s: Vec<f64> = (0..d.n).map(|i| d.strength(i)).collect();
            (0..d.n)
                .map(|i| {
                    let below = (0..d.n).filter(|&j| s[j] < s[i] || (s[j] == s[i] && j < i)).count();
                    (below + 1) as f64
                })
                .collect()
        }
    }
}

/// Density of the subgraph on nodes with value above `threshold`.
pub fn phi(d: &Dense, attr: Attr, threshold: f64) -> Option<f64> {
    let v = values(d, attr);
    let club: Vec<usize> = (0..d.n).filter(|&i| v[i] > threshold).collect();
    if club.len() < 2 {
        return None;
    }
    let mut edges = 0usize;
    for (x, &i) in club.iter().enumerate() {
        for &j in &club[x + 1..] {
            if d.a[i][j] {
                edges += 1;
            }
        }
    }
    Some(edges as f64 / (club.len() * (club.len() - 1) / 2) as f64)
}

/// Plain cosine of two dense vectors.
pub fn cosine(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny: f64 = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nx * ny)
}

/// Straightforward reimplementation of the row-shuffle test.
pub fn exceedances(rows: &[Vec<f64>], n_perm: usize, seed: u64) -> Vec<u32> {
    let n = rows.len();
    let observed: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| cosine(&rows[i], &rows[j]))
        .collect();
    let mut counts = vec![0u32; observed.len()];
    for t in 0..n_perm {
        let mut r = instance_rng(seed, t as u64);
        let shuffled: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| {
                let mut v = row.clone();
                v.shuffle(&mut r);
                v
            })
            .collect();
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if cosine(&shuffled[i], &shuffled[j]) >= observed[idx] {
                    counts[idx] += 1;
                }
                idx += 1;
            }
        }
    }
    counts
}

/// Length-priority consumption over an explicit list of surface forms.
pub fn longest_match_counts(tokens: &[&str], forms: &[(Vec<&str>, &str)]) -> BTreeMap<String, u32> {
    let mut consumed = vec![false; tokens.len()];
    let mut counts = BTreeMap::new();
    let longest = forms.iter().map(|f| f.0.len()).max().unwrap_or(0);
    for len in (1..=longest).rev() {
        let mut pos = 0;
        while pos + len <= tokens.len() {
            let window = &tokens[pos..pos + len];
            let free = !consumed[pos..pos + len].iter().any(|&c| c);
            let hit = forms.iter().find(|(f, _)| f.len() == len && f.as_slice() == window);
            match (free, hit) {
                (true, Some((_, canonical))) => {
                    *counts.entry(canonical.to_string()).or_insert(0) += 1;
                    consumed[pos..pos + len].iter_mut().for_each(|c| *c = true);
                    pos += len;
                }
                _ => pos += 1,
            }
        }
    }
    counts
}
