//! Undirected weighted graph with per-node metadata.

use std::collections::HashMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub date: Option<NaiveDate>,
    pub speaker: String,
    pub category: String,
}

impl Node {
    pub fn bare(id: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Edges are stored once with `u < v`, sorted. Adjacency lists hold
/// `(neighbor, edge index)` sorted by neighbor.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl WeightedGraph {
    /// Rejects self-loops, duplicate edges, out-of-range endpoints and
    /// non-positive or non-finite weights.
    pub fn new(nodes: Vec<Node>, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let n = nodes.len();
        let mut list: Vec<Edge> = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has weight {w}")));
            }
            list.push(Edge {
                u: a.min(b),
                v: a.max(b),
                weight: w,
            });
        }
        list.sort_by(|x, y| (x.u, x.v).cmp(&(y.u, y.v)));
        if let Some(d) = list.windows(2).find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", d[0].u, d[0].v)));
        }
        let mut adj = vec![Vec::new(); n];
        for (idx, e) in list.iter().enumerate() {
            adj[e.u].push((e.v, idx));
            adj[e.v].push((e.u, idx));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(WeightedGraph { nodes, edges: list, adj })
    }

    /// Graph over `n` anonymous nodes named `0..n`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        Self::new((0..n).map(|i| Node::bare(i.to_string())).collect(), edges)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn strength(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, e)| self.edges[e].weight).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|i| self.degree(i)).collect()
    }

    pub fn strengths(&self) -> Vec<f64> {
        (0..self.node_count()).map(|i| self.strength(i)).collect()
    }

    /// `(neighbor, weight)` pairs in ascending neighbor order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj[i].iter().map(move |&(j, e)| (j, self.edges[e].weight))
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.adj[i]
            .binary_search_by(|&(k, _)| k.cmp(&j))
            .ok()
            .map(|pos| self.edges[self.adj[i][pos].1].weight)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weight(i, j).is_some()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// Same topology, new weights given in edge order.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionMismatch(weights.len(), self.edges.len()));
        }
        let mut g = self.clone();
        for (e, &w) in g.edges.iter_mut().zip(weights) {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!("weight {w}")));
            }
            e.weight = w;
        }
        Ok(g)
    }

    /// The same graph with every weight set to `w`.
    pub fn with_constant_weight(&self, w: f64) -> Result<Self> {
        self.with_weights(&vec![w; self.edges.len()])
    }

    /// Induced subgraph on `keep` (node indices, in the order given).
    pub fn induced(&self, keep: &[usize]) -> Result<Self> {
        let mut remap = vec![usize::MAX; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let nodes = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| remap[e.u] != usize::MAX && remap[e.v] != usize::MAX)
            .map(|e| (remap[e.u], remap[e.v], e.weight));
        Self::new(nodes, edges)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Edge list CSV `src,dst,weight` (node ids) and node table CSV
    /// `id,date,speaker,category`.
    pub fn save(&self, edges_path: &Path, nodes_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(nodes_path)?;
        w.write_record(["id", "date", "speaker", "category"])?;
        for n in &self.nodes {
            let date = n.date.map(|d| d.to_string()).unwrap_or_default();
            w.write_record([n.id.as_str(), &date, &n.speaker, &n.category])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(edges_path)?;
        w.write_record(["src", "dst", "weight"])?;
        for e in &self.edges {
            w.write_record([&self.nodes[e.u].id, &self.nodes[e.v].id, &format!("{:?}", e.weight)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(edges_path: &Path, nodes_path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct NodeRow {
            id: String,
            date: String,
            speaker: String,
            category: String,
        }
        #[derive(Deserialize)]
        struct EdgeRow {
            src: String,
            dst: String,
            weight: f64,
        }
        let mut nodes = Vec::new();
        for row in csv::Reader::from_path(nodes_path)?.deserialize::<NodeRow>() {
            let row = row?;
            let date = if row.date.trim().is_empty() {
                None
            } else {
                Some(
                    crate::corpus::parse_date(&row.date)
                        .ok_or_else(|| Error::parse(nodes_path, format!("bad date {:?}", row.date)))?,
                )
            };
            nodes.push(Node {
                id: row.id,
                date,
                speaker: row.speaker,
                category: row.category,
            });
        }
        let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut edges = Vec::new();
        for row in csv::Reader::from_path(edges_path)?.deserialize::<EdgeRow>() {
            let row = row?;
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::parse(edges_path, format!("unknown node {id:?}")))
            };
            edges.push((lookup(&row.src)?, lookup(&row.dst)?, row.weight));
        }
        Self::new(nodes, edges)
    }
}
