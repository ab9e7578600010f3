//! Longest-match-first glossary counting and the document-term matrix.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::glossary::Glossary;

/// Count locution occurrences into `counts` (indexed like
/// `glossary.locutions()`).
///
/// Lengths are processed from the longest bucket down. Within one length the
/// scan is left to right and a match consumes its positions immediately;
/// consumed positions can never be part of a later match.
pub fn count_into(tokens: &[String], glossary: &Glossary, counts: &mut [u32]) {
    let n = tokens.len();
    let mut consumed = vec![false; n];
    for len in (1..=glossary.max_len().min(n)).rev() {
        let Some(bucket) = glossary.bucket(len) else { continue };
        if bucket.is_empty() {
            continue;
        }
        let mut i = 0;
        while i + len <= n {
            if let Some(blocked) = consumed[i..i + len].iter().rposition(|&c| c) {
                i += blocked + 1;
                continue;
            }
            if let Some(&idx) = bucket.get(&tokens[i..i + len]) {
                counts[idx] += 1;
                consumed[i..i + len].iter_mut().for_each(|c| *c = true);
                i += len;
            } else {
                i += 1;
            }
        }
    }
}

/// Occurrence counts keyed by canonical form; zero counts are omitted.
pub fn count_occurrences(tokens: &[String], glossary: &Glossary) -> BTreeMap<String, u32> {
    let mut counts = vec![0u32; glossary.len()];
    count_into(tokens, glossary, &mut counts);
    glossary
        .locutions()
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(l, c)| (l.canonical.clone(), c))
        .collect()
}

/// Which matrix the similarity stage reads. Cosine is invariant to per-row
/// positive scaling so both give the same network up to rounding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Absolute,
    Relative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    pub doc_ids: Vec<String>,
    pub terms: Vec<String>,
    pub abs: Vec<Vec<u32>>,
    pub rel: Vec<Vec<f64>>,
    pub doc_lengths: Vec<usize>,
    /// Documents dropped because no locution occurred in them.
    pub removed_docs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    doc_lengths: Vec<usize>,
    removed_docs: Vec<String>,
}

impl DocTermMatrix {
    pub fn rows(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.terms.len()
    }

    /// Rows as float vectors for the similarity stage.
    pub fn vectors(&self, weighting: Weighting) -> Vec<Vec<f64>> {
        match weighting {
            Weighting::Absolute => self
                .abs
                .iter()
                .map(|r| r.iter().map(|&c| c as f64).collect())
                .collect(),
            Weighting::Relative => self.rel.clone(),
        }
    }

    /// Sum of absolute counts per term over the rows selected by `keep`.
    pub fn column_sums(&self, keep: impl Fn(usize) -> bool) -> Vec<u64> {
        let mut sums = vec![0u64; self.cols()];
        for (i, row) in self.abs.iter().enumerate() {
            if keep(i) {
                for (s, &c) in sums.iter_mut().zip(row) {
                    *s += c as u64;
                }
            }
        }
        sums
    }

    pub fn row_index(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == doc_id)
    }

    /// Write `<stem>.csv` (doc ids as first column, terms as header, absolute
    /// counts) and `<stem>.json` with lengths and removed documents.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path)?;
        let mut header = vec!["doc_id".to_string()];
        header.extend(self.terms.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in self.doc_ids.iter().zip(&self.abs) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(u32::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        let sidecar = Sidecar {
            doc_lengths: self.doc_lengths.clone(),
            removed_docs: self.removed_docs.clone(),
        };
        fs::write(csv_path.with_extension("json"), serde_json::to_vec_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(csv_path)?;
        let terms: Vec<String> = r.headers()?.iter().skip(1).map(String::from).collect();
        let mut doc_ids = Vec::new();
        let mut abs = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            doc_ids.push(rec.get(0).unwrap_or_default().to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|v| v.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(csv_path, e.to_string()))?;
            if row.len() != terms.len() {
                return Err(Error::parse(csv_path, format!("row {:?} has {} values", doc_ids.last(), row.len())));
            }
            abs.push(row);
        }
        let sidecar: Sidecar = serde_json::from_slice(&fs::read(csv_path.with_extension("json"))?)?;
        if sidecar.doc_lengths.len() != doc_ids.len() {
            return Err(Error::parse(csv_path, "sidecar doc_lengths does not match row count"));
        }
        let rel = relative(&abs, &sidecar.doc_lengths);
        Ok(DocTermMatrix {
            doc_ids,
            terms,
            abs,
            rel,
            doc_lengths: sidecar.doc_lengths,
            removed_docs: sidecar.removed_docs,
        })
    }
}

fn relative(abs: &[Vec<u32>], lengths: &[usize]) -> Vec<Vec<f64>> {
    abs.iter()
        .zip(lengths)
        .map(|(row, &len)| {
            row.iter()
                .map(|&c| if len == 0 { 0.0 } else { c as f64 / len as f64 })
                .collect()
        })
        .collect()
}

/// Count every document, drop documents with no occurrences and terms that
/// never occur.
pub fn build_matrix(corpus: &Corpus, glossary: &Glossary) -> Result<DocTermMatrix> {
    if corpus.is_empty() {
        return Err(Error::invalid("corpus is empty"));
    }
    let counts: Vec<Vec<u32>> = corpus
        .documents
        .par_iter()
        .map(|d| {
            let mut c = vec![0u32; glossary.len()];
            count_into(&d.tokens, glossary, &mut c);
            c
        })
        .collect();

    let mut doc_ids = Vec::new();
    let mut doc_lengths = Vec::new();
    let mut kept = Vec::new();
    let mut removed_docs = Vec::new();
    for (doc, row) in corpus.documents.iter().zip(counts) {
        if row.iter().all(|&c| c == 0) {
            removed_docs.push(doc.id.clone());
        } else {
            doc_ids.push(doc.id.clone());
            doc_lengths.push(doc.raw_length);
            kept.push(row);
        }
    }
    if kept.is_empty() {
        return Err(Error::NoOccurrences);
    }

    let live: Vec<usize> = (0..glossary.len())
        .filter(|&j| kept.iter().any(|r| r[j] > 0))
        .collect();
    let terms = live
        .iter()
        .map(|&j| glossary.locutions()[j].canonical.clone())
        .collect();
    let abs: Vec<Vec<u32>> = kept
        .iter()
        .map(|r| live.iter().map(|&j| r[j]).collect())
        .collect();
    let rel = relative(&abs, &doc_lengths);
    Ok(DocTermMatrix {
        doc_ids,
        terms,
        abs,
        rel,
        doc_lengths,
        removed_docs,
    })
}

/// Share of a document taken up by glossary locutions: the sum of its
/// relative frequencies. Multi-token locutions count once, so the score is
/// slightly biased low relative to a token proportion.
pub fn economic_content(rel_row: &[f64]) -> f64 {
    rel_row.iter().sum()
}
