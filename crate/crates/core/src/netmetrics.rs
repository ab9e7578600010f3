//! Per-node statistics, clustering and assortativity.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::instance_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub id: String,
    pub degree: usize,
    pub strength: f64,
    /// Weighted local clustering; `None` when degree < 2.
    pub clustering: Option<f64>,
    pub clustering_unweighted: Option<f64>,
}

/// Per node: number of closed unordered neighbor pairs and the summed
/// `w_ij + w_ih` over those pairs.
fn closed_pairs(g: &WeightedGraph) -> Vec<(usize, f64)> {
    let n = g.node_count();
    (0..n)
        .into_par_iter()
        .map_init(
            || vec![f64::NAN; n],
            |mark, i| {
                for (j, w) in g.neighbors(i) {
                    mark[j] = w;
                }
                let mut closed = 0usize;
                let mut weight = 0.0;
                for (j, wij) in g.neighbors(i) {
                    for (h, _) in g.neighbors(j) {
                        if h > j && !mark[h].is_nan() {
                            closed += 1;
                            weight += wij + mark[h];
                        }
                    }
                }
                for (j, _) in g.neighbors(i) {
                    mark[j] = f64::NAN;
                }
                (closed, weight)
            },
        )
        .collect()
}

pub fn node_stats(g: &WeightedGraph) -> Vec<NodeStats> {
    closed_pairs(g)
        .into_iter()
        .enumerate()
        .map(|(i, (closed, wsum))| {
            let k = g.degree(i);
            let s = g.strength(i);
            let (c, cu) = if k < 2 {
                (None, None)
            } else {
                let kf = k as f64;
                (
                    Some(wsum / (s * (kf - 1.0))),
                    Some(closed as f64 / (kf * (kf - 1.0) / 2.0)),
                )
            };
            NodeStats {
                id: g.nodes()[i].id.clone(),
                degree: k,
                strength: s,
                clustering: c,
                clustering_unweighted: cu,
            }
        })
        .collect()
}

/// `3 n_triangles / n_connected_triples` on the binary topology; `None`
/// when there is no connected triple.
pub fn global_clustering(g: &WeightedGraph) -> Option<f64> {
    let closed: usize = closed_pairs(g).iter().map(|c| c.0).sum();
    let triples: usize = (0..g.node_count())
        .map(|i| {
            let k = g.degree(i);
            k * k.saturating_sub(1) / 2
        })
        .sum();
    (triples > 0).then(|| closed as f64 / triples as f64)
}

/// Weighted local clustering of node `i`:
/// `1/(s_i (k_i - 1)) * sum over ordered neighbor pairs (j, h) of (w_ij + w_ih)/2 a_jh`.
pub fn local_weighted_clustering(g: &WeightedGraph, i: usize) -> Option<f64> {
    let k = g.degree(i);
    if k < 2 {
        return None;
    }
    let nbrs: Vec<(usize, f64)> = g.neighbors(i).collect();
    let mut sum = 0.0;
    for (a, &(j, wij)) in nbrs.iter().enumerate() {
        for &(h, wih) in &nbrs[a + 1..] {
            if g.has_edge(j, h) {
                sum += wij + wih;
            }
        }
    }
    Some(sum / (g.strength(i) * (k as f64 - 1.0)))
}

pub fn local_unweighted_clustering(g: &WeightedGraph, i: usize) -> Option<f64> {
    let k = g.degree(i);
    if k < 2 {
        return None;
    }
    let nbrs: Vec<usize> = g.neighbors(i).map(|(j, _)| j).collect();
    let mut closed = 0usize;
    for (a, &j) in nbrs.iter().enumerate() {
        closed += nbrs[a + 1..].iter().filter(|&&h| g.has_edge(j, h)).count();
    }
    Some(closed as f64 / (k * (k - 1) / 2) as f64)
}

/// Mean over defined values; nodes with degree < 2 are skipped.
pub fn mean_defined(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Complementary CDF `P(X > x)` evaluated at every distinct sample value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ccdf {
    pub values: Vec<f64>,
    pub exceed: Vec<f64>,
}

pub fn ccdf(samples: &[f64]) -> Ccdf {
    let mut sorted: Vec<f64> = samples.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut values = Vec::new();
    let mut exceed = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
        values.push(v);
        exceed.push((sorted.len() - i) as f64 / n);
    }
    Ccdf { values, exceed }
}

impl Ccdf {
    /// `P(X > x)` for an arbitrary `x`.
    pub fn at(&self, x: f64) -> f64 {
        match self.values.partition_point(|&v| v <= x) {
            0 => 1.0,
            k => self.exceed[k - 1],
        }
    }
}

/// Weight-reshuffled null model: topology fixed, edge weights permuted
/// uniformly at random, one independent stream per instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullEnsemble {
    pub instances: usize,
    pub seed: u64,
}

impl NullEnsemble {
    pub fn new(instances: usize, seed: u64) -> Self {
        NullEnsemble { instances, seed }
    }

    /// Permuted edge weights for instance `t`, in the graph's edge order.
    pub fn weights(&self, g: &WeightedGraph, t: usize) -> Vec<f64> {
        let mut w = g.weights();
        w.shuffle(&mut instance_rng(self.seed, t as u64));
        w
    }

    pub fn instance(&self, g: &WeightedGraph, t: usize) -> WeightedGraph {
        g.with_weights(&self.weights(g, t))
            .expect("permuted weights keep the graph valid")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringNull {
    pub actual: Ccdf,
    pub actual_mean: Option<f64>,
    /// Ccdf of the weighted coefficient pooled over all null instances.
    pub null_pooled: Ccdf,
    pub instance_means: Vec<Option<f64>>,
    pub null_mean: Option<f64>,
}

/// Weighted local clustering of the actual graph against the
/// weight-reshuffled ensemble.
pub fn clustering_null(g: &WeightedGraph, ensemble: &NullEnsemble) -> Result<ClusteringNull> {
    if ensemble.instances == 0 {
        return Err(Error::invalid("ensemble needs at least one instance"));
    }
    let actual: Vec<Option<f64>> = node_stats(g).into_iter().map(|s| s.clustering).collect();
    let per_instance: Vec<Vec<Option<f64>>> = (0..ensemble.instances)
        .into_par_iter()
        .map(|t| {
            node_stats(&ensemble.instance(g, t))
                .into_iter()
                .map(|s| s.clustering)
                .collect()
        })
        .collect();
    let pooled: Vec<f64> = per_instance.iter().flatten().flatten().copied().collect();
    let instance_means: Vec<Option<f64>> = per_instance
        .iter()
        .map(|v| mean_defined(v.iter().copied()))
        .collect();
    let defined: Vec<f64> = actual.iter().flatten().copied().collect();
    Ok(ClusteringNull {
        actual: ccdf(&defined),
        actual_mean: mean_defined(actual.iter().copied()),
        null_pooled: ccdf(&pooled),
        null_mean: mean_defined(pooled.iter().map(|&v| Some(v))),
        instance_means,
    })
}

/// Scalar assortativity on the binary adjacency:
/// `sum_ij (a_ij - k_i k_j / 2m) x_i x_j / sum_ij (a_ij x_i^2 - k_i k_j / 2m x_i x_j)`.
///
/// Evaluated on values centred at the edge-end mean, which leaves the ratio
/// unchanged and avoids cancellation for large attributes such as dates.
/// `None` for an edgeless graph or when the attribute is constant over edge
/// endpoints.
pub fn assortativity_scalar(g: &WeightedGraph, x: &[f64]) -> Result<Option<f64>> {
    if x.len() != g.node_count() {
        return Err(Error::DimensionMismatch(x.len(), g.node_count()));
    }
    let m2 = 2.0 * g.edge_count() as f64;
    if m2 == 0.0 {
        return Ok(None);
    }
    let mean = (0..x.len()).map(|i| g.degree(i) as f64 * x[i]).sum::<f64>() / m2;
    let y: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let num: f64 = 2.0 * g.edges().iter().map(|e| y[e.u] * y[e.v]).sum::<f64>();
    let den: f64 = (0..y.len()).map(|i| g.degree(i) as f64 * y[i] * y[i]).sum();
    let scale: f64 = (0..x.len()).map(|i| g.degree(i) as f64 * x[i] * x[i]).sum();
    if den <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Ok(None);
    }
    Ok(Some((num / den).clamp(-1.0, 1.0)))
}

/// Categorical assortativity:
/// `sum_ij (a_ij - k_i k_j / 2m) d(f_i, f_j) / (2m - sum_ij k_i k_j / 2m d(f_i, f_j))`.
/// `None` when the denominator vanishes (a single category on all edges).
pub fn assortativity_categorical<S: AsRef<str>>(g: &WeightedGraph, f: &[S]) -> Result<Option<f64>> {
    if f.len() != g.node_count() {
        return Err(Error::DimensionMismatch(f.len(), g.node_count()));
    }
    let m2 = 2.0 * g.edge_count() as f64;
    if m2 == 0.0 {
        return Ok(None);
    }
    let mut degree_mass: HashMap<&str, f64> = HashMap::new();
    for (i, c) in f.iter().enumerate() {
        *degree_mass.entry(c.as_ref()).or_default() += g.degree(i) as f64;
    }
    let expected: f64 = degree_mass.values().map(|k| k * k).sum::<f64>() / m2;
    let within = 2.0
        * g.edges()
            .iter()
            .filter(|e| f[e.u].as_ref() == f[e.v].as_ref())
            .count() as f64;
    let den = m2 - expected;
    if den <= 1e-12 * m2 {
        return Ok(None);
    }
    Ok(Some(((within - expected) / den).clamp(-1.0, 1.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width histogram over `[min, max]`. A constant sample is centred in
/// a unit-wide range.
pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::invalid("histogram of empty input"));
    }
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("histogram input must be finite"));
    }
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|b| lo + b as f64 * width).collect();
    let mut counts = vec![0; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Hartigan's dip statistic of unimodality for a sample.
///
/// Returns the sup distance between the empirical CDF and the closest
/// unimodal CDF. Values near `1/(2n)` indicate unimodality; larger values
/// point to multiple modes. The statistic is reported, not tested.
pub fn dip_statistic(sample: &[f64]) -> Option<f64> {
    let mut x: Vec<f64> = sample.iter().copied().filter(|v| v.is_finite()).collect();
    if x.is_empty() {
        return None;
    }
    x.sort_by(f64::total_cmp);
    let n = x.len();
    if n < 4 || x[0] == x[n - 1] {
        return Some(0.5 / n as f64);
    }
    // 1-based indexing below follows the classic formulation
    let xs = |i: usize| x[i - 1];

    let mut mn = vec![0usize; n + 1];
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1
                || (xs(j) - xs(mnj)) * ((mnj - mnmnj) as f64) < (xs(mnj) - xs(mnmnj)) * ((j - mnj) as f64)
            {
                break;
            }
            mn[j] = mnmnj;
        }
    }
    let mut mj = vec![0usize; n + 1];
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n
                || (xs(k) - xs(mjk)) * (mjk as f64 - mjmjk as f64)
                    < (xs(mjk) - xs(mjmjk)) * (k as f64 - mjk as f64)
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut low = 1usize;
    let mut high = n;
    let mut dip = 1.0f64;
    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];
    loop {
        let mut ic = 1;
        gcm[1] = high;
        while gcm[ic] > low {
            let i = gcm[ic];
            ic += 1;
            gcm[ic] = mn[i];
        }
        let l_gcm = ic;
        ic = 1;
        lcm[1] = low;
        while lcm[ic] < high {
            let i = lcm[ic];
            ic += 1;
            lcm[ic] = mj[i];
        }
        let l_lcm = ic;

        let mut ig = l_gcm;
        let mut ih = l_lcm;
        let mut ix = l_gcm - 1;
        let mut iv = 2usize;
        let mut d = 0.0f64;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - gcmi1 as f64 + 1.0)
                        - (xs(lcmiv) - xs(gcmi1)) * (gcmix as f64 - gcmi1 as f64) / (xs(gcmix) - xs(gcmi1));
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (xs(gcmix) - xs(lcmiv1)) * (lcmiv as f64 - lcmiv1 as f64) / (xs(lcmiv) - xs(lcmiv1))
                        - (gcmix as f64 - lcmiv1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                if ix < 1 {
                    ix = 1;
                }
                if iv > l_lcm {
                    iv = l_lcm;
                }
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }
        if d < dip {
            break;
        }

        let mut dip_l = 0.0f64;
        for j in ig..l_gcm {
            let mut max_t = 1.0f64;
            let (ju, jb) = (gcm[j], gcm[j + 1]);
            if ju - jb > 1 && xs(ju) != xs(jb) {
                let c = (ju - jb) as f64 / (xs(ju) - xs(jb));
                for jk in jb..=ju {
                    let t = (jk - jb + 1) as f64 - (xs(jk) - xs(jb)) * c;
                    max_t = max_t.max(t);
                }
            }
            dip_l = dip_l.max(max_t);
        }
        let mut dip_u = 0.0f64;
        for j in ih..l_lcm {
            let mut max_t = 1.0f64;
            let (ju, jb) = (lcm[j], lcm[j + 1]);
            if jb - ju > 1 && xs(jb) != xs(ju) {
                let c = (jb - ju) as f64 / (xs(jb) - xs(ju));
                for jk in ju..=jb {
                    let t = (xs(jk) - xs(ju)) * c - (jk as f64 - ju as f64 - 1.0);
                    max_t = max_t.max(t);
                }
            }
            dip_u = dip_u.max(max_t);
        }
        dip = dip.max(dip_l.max(dip_u));

        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }
    Some(dip / (2.0 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_with_pendant() -> WeightedGraph {
        WeightedGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 0, 1.0)]).unwrap()
    }

    #[test]
    fn global_clustering_cases() {
        let k3 = WeightedGraph::from_edges(3, [(0, 1, 0.3), (1, 2, 0.7), (0, 2, 0.1)]).unwrap();
        assert_eq!(global_clustering(&k3), Some(1.0));
        let path = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(global_clustering(&path), Some(0.0));
        assert!((global_clustering(&triangle_with_pendant()).unwrap() - 0.6).abs() < 1e-15);
        let single = WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(global_clustering(&single), None);
    }

    #[test]
    fn weighted_local_cases() {
        let k3 = WeightedGraph::from_edges(3, [(0, 1, 0.3), (1, 2, 0.7), (0, 2, 0.1)]).unwrap();
        for i in 0..3 {
            assert!((local_weighted_clustering(&k3, i).unwrap() - 1.0).abs() < 1e-15);
        }
        // i=0 with neighbours j=1, h=2, l=3; only 1-2 closed
        let g = WeightedGraph::from_edges(4, [(0, 1, 0.5), (0, 2, 1.0), (0, 3, 0.5), (1, 2, 0.9)]).unwrap();
        assert!((local_weighted_clustering(&g, 0).unwrap() - 0.375).abs() < 1e-15);
        assert!((local_unweighted_clustering(&g, 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let star = WeightedGraph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        assert_eq!(local_weighted_clustering(&star, 0), Some(0.0));
        assert_eq!(local_weighted_clustering(&star, 1), None);

        let stats = node_stats(&g);
        assert!((stats[0].clustering.unwrap() - 0.375).abs() < 1e-15);
        assert_eq!(stats[3].clustering, None);
    }

    #[test]
    fn ccdf_shape() {
        let c = ccdf(&[0.2, 0.5, 0.5, 1.0]);
        assert_eq!(c.values, vec![0.2, 0.5, 1.0]);
        assert_eq!(c.exceed, vec![0.75, 0.25, 0.0]);
        assert_eq!(c.at(0.0), 1.0);
        assert_eq!(c.at(0.7), 0.25);
    }

    #[test]
    fn ensemble_conserves_weights() {
        let g = WeightedGraph::from_edges(5, [(0, 1, 0.1), (1, 2, 0.2), (2, 3, 0.3), (3, 4, 0.4), (0, 4, 0.5)]).unwrap();
        let ens = NullEnsemble::new(10, 9);
        for t in 0..10 {
            let inst = ens.instance(&g, t);
            assert_eq!(inst.degrees(), g.degrees());
            let mut a = inst.weights();
            let mut b = g.weights();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn constant_weight_null_matches_actual() {
        let g = triangle_with_pendant().with_constant_weight(0.4).unwrap();
        let r = clustering_null(&g, &NullEnsemble::new(5, 1)).unwrap();
        assert_eq!(r.actual, r.null_pooled);
    }

    #[test]
    fn scalar_assortativity_cases() {
        let g = WeightedGraph::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let r = assortativity_scalar(&g, &[1.0, 1.0, 9.0, 9.0]).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let e = WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let r = assortativity_scalar(&e, &[0.0, 1.0]).unwrap().unwrap();
        assert!((r + 1.0).abs() < 1e-12);
        // regular graph with x = degree: zero variance
        let c4 = WeightedGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let deg: Vec<f64> = c4.degrees().iter().map(|&d| d as f64).collect();
        assert_eq!(assortativity_scalar(&c4, &deg).unwrap(), None);
    }

    #[test]
    fn categorical_assortativity_cases() {
        let g = WeightedGraph::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(assortativity_categorical(&g, &["a", "a", "b", "b"]).unwrap(), Some(1.0));
        let k22 = WeightedGraph::from_edges(4, [(0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0)]).unwrap();
        assert_eq!(assortativity_categorical(&k22, &["a", "a", "b", "b"]).unwrap(), Some(-1.0));
        assert_eq!(assortativity_categorical(&k22, &["a"; 4]).unwrap(), None);
    }

    #[test]
    fn histogram_cases() {
        let h = histogram(&[1.0, 1.0, 2.0], 2).unwrap();
        assert_eq!(h.counts, vec![2, 1]);
        assert_eq!(h.edges, vec![1.0, 1.5, 2.0]);
        assert!(histogram(&[], 3).is_err());
        assert_eq!(histogram(&[4.0, 4.0], 3).unwrap().counts, vec![0, 2, 0]);
    }

    #[test]
    fn dip_separates_modes() {
        let uni: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let mut bi: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        bi.extend((0..100).map(|i| 10.0 + i as f64 / 100.0));
        let du = dip_statistic(&uni).unwrap();
        let db = dip_statistic(&bi).unwrap();
        assert!(du < 0.01, "uniform dip {du}");
        assert!(db > 0.2 && db <= 0.25, "bimodal dip {db}");
    }
}
