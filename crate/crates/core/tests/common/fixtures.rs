//! Graph families and synthetic corpora shared by the integration tests.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use econet::glossary::RawEntry;
use econet::WeightedGraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every graph on 1..=8 nodes up to isomorphism (13,598 graphs), one graph6
/// string per line.
pub fn small_graph_family() -> Vec<(usize, Vec<(usize, usize)>)> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/graphs_upto8.g6");
    std::fs::read_to_string(path)
        .expect("graph family data")
        .lines()
        .map(parse_graph6)
        .collect()
}

pub fn parse_graph6(line: &str) -> (usize, Vec<(usize, usize)>) {
    let bytes = line.trim().as_bytes();
    let n = (bytes[0] - 63) as usize;
    let bits = bytes[1..].iter().flat_map(|&b| (0..6).rev().map(move |k| ((b - 63) >> k) & 1 == 1));
    let pairs = (1..n).flat_map(|j| (0..j).map(move |i| (i, j)));
    let edges = pairs.zip(bits).filter(|(_, b)| *b).map(|(p, _)| p).collect();
    (n, edges)
}

/// Weights drawn from `(0.01, 1]`.
pub fn weighted(n: usize, edges: &[(usize, usize)], rng: &mut ChaCha8Rng) -> WeightedGraph {
    WeightedGraph::from_edges(n, edges.iter().map(|&(u, v)| (u, v, rng.gen_range(0.01..=1.0)))).unwrap()
}

/// G(n, p) with uniform weights.
pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    weighted(n, &edges, rng)
}

pub fn two_cliques() -> (WeightedGraph, Vec<usize>) {
    let mut edges = Vec::new();
    for base in [0, 5] {
        for i in 0..5 {
            for j in (i + 1)..5 {
                edges.push((base + i, base + j, 1.0));
            }
        }
    }
    edges.push((4, 5, 1.0));
    (WeightedGraph::from_edges(10, edges).unwrap(), vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
}

/// Complete weighted graph on three blocks of `size`: weight 1.0 inside a
/// block, 0.05 across.
pub fn three_blocks(size: usize) -> (WeightedGraph, Vec<usize>) {
    let n = 3 * size;
    let truth: Vec<usize> = (0..n).map(|i| i / size).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, if truth[i] == truth[j] { 1.0 } else { 0.05 }));
        }
    }
    (WeightedGraph::from_edges(n, edges).unwrap(), truth)
}

/// All set partitions of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            go(prefix, n, max.max(c), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    go(&mut vec![0], n, 0, &mut out);
    out
}

/// Nested glossary for the counting oracle, with every surface form listed
/// by hand: `(canonical, forms)`.
pub fn nested_glossary() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("tax", vec!["tax", "taxes"]),
        ("tax rate", vec!["tax rate", "tax rates"]),
        ("federal tax rate", vec!["federal tax rate", "federal tax rates"]),
        ("rate", vec!["rate", "rates"]),
        ("interest", vec!["interest", "interests"]),
        ("interest rate", vec!["interest rate", "interest rates"]),
        ("rate cut", vec!["rate cut", "rate cuts"]),
        ("tax cut", vec!["tax cut", "tax cuts"]),
    ]
}

pub const NESTED_VOCABULARY: [&str; 11] = [
    "tax", "taxes", "rate", "rates", "interest", "federal", "cut", "cuts", "the", "and", "tax",
];

pub struct PlantedDoc {
    pub id: String,
    pub date: String,
    pub speaker: String,
    pub category: String,
    pub text: String,
    pub core: bool,
}

pub struct PlantedCorpus {
    pub docs: Vec<PlantedDoc>,
    pub glossary: Vec<RawEntry>,
    /// Terms used inside one block only, excluding the common sub-glossary.
    pub core_terms: Vec<String>,
    pub periphery_terms: Vec<String>,
    pub common_terms: Vec<String>,
}

pub const CORE_SIZE: usize = 12;
pub const PERIPHERY_SIZE: usize = 28;

/// Sylvester Hadamard sign `H[i][j]` of order 16.
fn hadamard(i: usize, j: usize) -> bool {
    (i & j).count_ones() % 2 == 0
}

/// 40 documents. The 12 core documents all use the 50-term common
/// sub-glossary four times each, plus three private core terms. The 28
/// periphery documents come in 14 complementary pairs over 16 pattern terms
/// (two documents of a pair share nothing, documents of different pairs
/// share four pattern terms), each with 80 private terms and two common
/// terms used once. Four periphery documents share six anchor terms with
/// one core document each, which keeps the network connected.
pub fn planted_corpus(seed: u64) -> PlantedCorpus {
    const COMMON: usize = 50;
    const PRIVATE: usize = 80;
    const ANCHORS: usize = 6;
    const LINKERS: [usize; 4] = [0, 5, 14, 20];
    let mut r = rng(seed);
    let mut bags: Vec<Vec<(String, usize)>> = Vec::new();
    let mut core_terms = Vec::new();
    let mut periphery_terms = Vec::new();
    let common_terms: Vec<String> = (0..COMMON).map(|c| format!("common{c}")).collect();

    for x in 0..CORE_SIZE {
        let mut bag: Vec<(String, usize)> = common_terms.iter().map(|t| (t.clone(), 4)).collect();
        for k in 0..3 {
            let t = format!("coreterm{x}x{k}");
            core_terms.push(t.clone());
            bag.push((t, 1));
        }
        bags.push(bag);
    }
    for y in 0..PERIPHERY_SIZE {
        let (pair, side) = (y / 2 + 1, y % 2);
        let mut bag = Vec::new();
        for t in 0..16 {
            if hadamard(pair, t) == (side == 0) {
                bag.push((format!("pattern{t}"), 3));
            }
        }
        for k in 0..PRIVATE {
            let t = format!("private{y}x{k}");
            periphery_terms.push(t.clone());
            bag.push((t, 1));
        }
        for k in 0..2 {
            bag.push((common_terms[(2 * y + k) % COMMON].clone(), 1));
        }
        bags.push(bag);
    }
    periphery_terms.extend((0..16).map(|t| format!("pattern{t}")));
    for (link, &y) in LINKERS.iter().enumerate() {
        for k in 0..ANCHORS {
            let t = format!("anchor{link}x{k}");
            bags[link].push((t.clone(), 4));
            bags[CORE_SIZE + y].push((t, 2));
        }
    }

    let mut glossary: Vec<RawEntry> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for bag in &bags {
        for (t, _) in bag {
            if seen.insert(t.clone()) {
                glossary.push(RawEntry::new(t.clone(), "planted"));
            }
        }
    }

    let filler = ["the", "and", "of", "people", "nation", "we", "shall"];
    let docs = bags
        .into_iter()
        .enumerate()
        .map(|(i, bag)| {
            let mut tokens: Vec<String> = bag
                .into_iter()
                .flat_map(|(t, c)| std::iter::repeat(t).take(c))
                .collect();
            for _ in 0..40 {
                tokens.push(filler[r.gen_range(0..filler.len())].to_string());
            }
            tokens.shuffle(&mut r);
            PlantedDoc {
                id: format!("doc{i:02}"),
                date: format!("{}-01-15", 1900 + 2 * i),
                speaker: format!("speaker{}", i % 7),
                category: if i % 2 == 0 { "party a" } else { "party b" }.to_string(),
                text: tokens.join(" "),
                core: i < CORE_SIZE,
            }
        })
        .collect();
    PlantedCorpus {
        docs,
        glossary,
        core_terms,
        periphery_terms,
        common_terms,
    }
}

impl PlantedCorpus {
    /// Writes `<id>.txt` files and `metadata.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> std::path::PathBuf {
        let texts = dir.join("texts");
        std::fs::create_dir_all(&texts).unwrap();
        let mut meta = String::from("id,date,speaker,category\n");
        for d in &self.docs {
            std::fs::write(texts.join(format!("{}.txt", d.id)), &d.text).unwrap();
            meta.push_str(&format!("{},{},{},{}\n", d.id, d.date, d.speaker, d.category));
        }
        let path = dir.join("metadata.csv");
        std::fs::write(&path, meta).unwrap();
        path
    }

    pub fn core_ids(&self) -> Vec<String> {
        self.docs.iter().filter(|d| d.core).map(|d| d.id.clone()).collect()
    }
}
