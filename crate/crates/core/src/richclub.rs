//! Rich-club coefficients by degree, strength and strength rank, their
//! normalisation against the weight-reshuffled ensemble, and the
//! core/periphery split.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::netmetrics::NullEnsemble;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Degree,
    Strength,
    Rank,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Degree => "degree",
            Mode::Strength => "strength",
            Mode::Rank => "rank",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" | "k" => Ok(Mode::Degree),
            "strength" | "s" => Ok(Mode::Strength),
            "rank" | "p" => Ok(Mode::Rank),
            other => Err(Error::invalid(format!("unknown rich-club mode {other:?}"))),
        }
    }
}

/// Ascending strength ranks `1..=n` (rank n is the strongest). Equal
/// strengths are ordered by node index, so ranks are a permutation.
pub fn strength_ranks(g: &WeightedGraph) -> Vec<usize> {
    ranks_of(&g.strengths())
}

fn ranks_of(strengths: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..strengths.len()).collect();
    order.sort_by(|&a, &b| strengths[a].total_cmp(&strengths[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; strengths.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// Per-node value compared against the threshold in each mode.
pub fn node_values(g: &WeightedGraph, mode: Mode) -> Vec<f64> {
    match mode {
        Mode::Degree => g.degrees().into_iter().map(|k| k as f64).collect(),
        Mode::Strength => g.strengths(),
        Mode::Rank => strength_ranks(g).into_iter().map(|r| r as f64).collect(),
    }
}

/// Nodes whose value exceeds `threshold`.
pub fn club(g: &WeightedGraph, mode: Mode, threshold: f64) -> Vec<usize> {
    node_values(g, mode)
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > threshold)
        .map(|(i, _)| i)
        .collect()
}

fn density_of(size: usize, edges: usize) -> Option<f64> {
    (size >= 2).then(|| 2.0 * edges as f64 / (size as f64 * (size as f64 - 1.0)))
}

/// Binary density of the club above `threshold`; `None` when the club has
/// fewer than two nodes.
pub fn phi(g: &WeightedGraph, mode: Mode, threshold: f64) -> Option<f64> {
    let members = club(g, mode, threshold);
    let mut inside = vec![false; g.node_count()];
    for &i in &members {
        inside[i] = true;
    }
    let edges = g.edges().iter().filter(|e| inside[e.u] && inside[e.v]).count();
    density_of(members.len(), edges)
}

/// Thresholds at which the curve is evaluated: the distinct node values
/// (degree, strength) or every rank cut `1..n`.
pub fn thresholds(g: &WeightedGraph, mode: Mode) -> Vec<f64> {
    match mode {
        Mode::Rank => (1..g.node_count()).map(|p| p as f64).collect(),
        _ => {
            let mut v = node_values(g, mode);
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        }
    }
}

/// Club size and club edge count at each threshold (ascending), computed by
/// adding nodes from the largest value down.
fn sweep(g: &WeightedGraph, values: &[f64], thresholds: &[f64]) -> Vec<(usize, usize)> {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut inside = vec![false; n];
    let mut next = 0;
    let (mut size, mut edges) = (0usize, 0usize);
    let mut out = vec![(0, 0); thresholds.len()];
    for (slot, &t) in thresholds.iter().enumerate().rev() {
        while next < n && values[order[next]] > t {
            let i = order[next];
            edges += g.neighbors(i).filter(|&(j, _)| inside[j]).count();
            inside[i] = true;
            size += 1;
            next += 1;
        }
        out[slot] = (size, edges);
    }
    out
}

fn phi_series(g: &WeightedGraph, mode: Mode, thresholds: &[f64]) -> Vec<(Option<f64>, usize)> {
    sweep(g, &node_values(g, mode), thresholds)
        .into_iter()
        .map(|(size, edges)| (density_of(size, edges), size))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub phi: Option<f64>,
    pub phi_null_mean: Option<f64>,
    pub phi_norm: Option<f64>,
    pub club_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RichClubCurve {
    pub mode: Mode,
    pub points: Vec<CurvePoint>,
    pub regime_start: Option<f64>,
}

/// Rich-club curve of `g` normalised by the ensemble mean. Each instance
/// recomputes its own node values, so in rank mode the club of an instance
/// is the top of that instance's strength ranking. The null mean at a
/// threshold averages the instances where the club is defined.
pub fn normalized_curve(g: &WeightedGraph, mode: Mode, ensemble: &NullEnsemble) -> Result<RichClubCurve> {
    if g.node_count() == 0 {
        return Err(Error::InvalidGraph("empty graph".into()));
    }
    if ensemble.instances == 0 {
        return Err(Error::invalid("ensemble needs at least one instance"));
    }
    let ts = thresholds(g, mode);
    let actual = phi_series(g, mode, &ts);
    let per_instance: Vec<Vec<(Option<f64>, usize)>> = (0..ensemble.instances)
        .into_par_iter()
        .map(|t| phi_series(&ensemble.instance(g, t), mode, &ts))
        .collect();
    let mut points = Vec::with_capacity(ts.len());
    for (k, (&threshold, &(phi, club_size))) in ts.iter().zip(&actual).enumerate() {
        let (sum, count) = per_instance
            .iter()
            .filter_map(|inst| inst[k].0)
            .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        let phi_null_mean = (count > 0).then(|| sum / count as f64);
        let phi_norm = match (phi, phi_null_mean) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
        points.push(CurvePoint {
            threshold,
            phi,
            phi_null_mean,
            phi_norm,
            club_size,
        });
    }
    let mut curve = RichClubCurve {
        mode,
        points,
        regime_start: None,
    };
    curve.regime_start = detect_regime(&curve, DEFAULT_SUSTAIN);
    Ok(curve)
}

pub const DEFAULT_SUSTAIN: f64 = 0.9;

/// Smallest threshold `t` with `phi_norm(t) > 1` such that at least a
/// fraction `sustain` of the defined points at thresholds `>= t` also
/// exceed 1.
pub fn detect_regime(curve: &RichClubCurve, sustain: f64) -> Option<f64> {
    let defined: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.club_size >= 2)
        .filter_map(|p| p.phi_norm.map(|v| (p.threshold, v)))
        .collect();
    let mut above_from = vec![0usize; defined.len() + 1];
    for i in (0..defined.len()).rev() {
        above_from[i] = above_from[i + 1] + usize::from(defined[i].1 > 1.0);
    }
    (0..defined.len())
        .find(|&i| {
            let tail = (defined.len() - i) as f64;
            defined[i].1 > 1.0 && above_from[i] as f64 >= sustain * tail
        })
        .map(|i| defined[i].0)
}

impl RichClubCurve {
    /// CSV `threshold,phi,phi_null_mean,phi_norm,club_size`; undefined
    /// values are empty cells.
    pub fn save(&self, path: &Path) -> Result<()> {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["threshold", "phi", "phi_null_mean", "phi_norm", "club_size"])?;
        for p in &self.points {
            w.write_record([
                format!("{:?}", p.threshold),
                cell(p.phi),
                cell(p.phi_null_mean),
                cell(p.phi_norm),
                p.club_size.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreMembership {
    pub cut: usize,
    pub ids: Vec<String>,
    pub ranks: Vec<usize>,
    pub in_core: Vec<bool>,
    /// category -> (core count, periphery count)
    pub composition: BTreeMap<String, (usize, usize)>,
}

impl CoreMembership {
    pub fn core_size(&self) -> usize {
        self.in_core.iter().filter(|&&c| c).count()
    }

    pub fn periphery_size(&self) -> usize {
        self.in_core.len() - self.core_size()
    }

    pub fn core_ids(&self) -> Vec<&str> {
        self.ids
            .iter()
            .zip(&self.in_core)
            .filter(|(_, &c)| c)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// Whether `id` is in the core; `None` for unknown ids.
    pub fn is_core(&self, id: &str) -> Option<bool> {
        self.ids.iter().position(|x| x == id).map(|i| self.in_core[i])
    }

    /// CSV `node_id,rank,in_core`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["node_id", "rank", "in_core"])?;
        for ((id, r), c) in self.ids.iter().zip(&self.ranks).zip(&self.in_core) {
            w.write_record([id.as_str(), &r.to_string(), if *c { "true" } else { "false" }])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Core = nodes with strength rank above `cut`.
pub fn core_periphery_split(g: &WeightedGraph, cut: Option<usize>) -> Result<CoreMembership> {
    let cut = cut.ok_or(Error::NoRegime)?;
    if cut >= g.node_count() {
        return Err(Error::invalid(format!(
            "club cut {cut} leaves an empty core in {} nodes",
            g.node_count()
        )));
    }
    let ranks = strength_ranks(g);
    let in_core: Vec<bool> = ranks.iter().map(|&r| r > cut).collect();
    let mut composition: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (node, &c) in g.nodes().iter().zip(&in_core) {
        let slot = composition.entry(node.category.clone()).or_default();
        if c {
            slot.0 += 1;
        } else {
            slot.1 += 1;
        }
    }
    Ok(CoreMembership {
        cut,
        ids: g.nodes().iter().map(|n| n.id.clone()).collect(),
        ranks,
        in_core,
        composition,
    })
}
