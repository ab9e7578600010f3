//! Document ingestion and mechanical text normalization.
//!
//! A corpus is a directory of `<id>.txt` files plus a metadata CSV with the
//! header `id,date,speaker,category`. Every file must have exactly one
//! metadata row and vice versa.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercase `text`, turn every non-alphanumeric character into a token
/// boundary and split. When `cut_marker` occurs in the text, everything from
/// its first occurrence onwards is discarded before tokenizing.
pub fn normalize(text: &str, cut_marker: Option<&str>) -> Vec<String> {
    let text = match cut_marker {
        Some(marker) if !marker.is_empty() => match text.find(marker) {
            Some(pos) => &text[..pos],
            None => text,
        },
        _ => text,
    };
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            // a few code points lowercase into combining marks or have no
            // lowercase form at all; those are dropped
            current.extend(c.to_lowercase().filter(|l| l.is_alphanumeric() && !l.is_uppercase()));
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub date: NaiveDate,
    pub speaker: String,
    pub category: String,
    pub tokens: Vec<String>,
    pub raw_length: usize,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        date: NaiveDate,
        speaker: impl Into<String>,
        category: impl Into<String>,
        text: &str,
        cut_marker: Option<&str>,
    ) -> Self {
        let tokens = normalize(text, cut_marker);
        Document {
            id: id.into(),
            date,
            speaker: speaker.into(),
            category: category.into(),
            raw_length: tokens.len(),
            tokens,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub ingested_at: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub provenance: Provenance,
}

/// Things worth telling the user about that did not stop ingestion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub documents: usize,
    pub empty_documents: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct MetadataRow {
    id: String,
    date: String,
    speaker: String,
    category: String,
}

impl Corpus {
    /// Assemble a corpus from already-built documents. Documents are sorted by
    /// id; duplicate ids and an empty list are rejected.
    pub fn from_documents(mut documents: Vec<Document>, source: impl Into<String>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::Ingestion {
                problems: vec!["corpus is empty".into()],
            });
        }
        documents.sort_by(|a, b| a.id.cmp(&b.id));
        let dups: BTreeSet<&str> = documents
            .windows(2)
            .filter(|w| w[0].id == w[1].id)
            .map(|w| w[0].id.as_str())
            .collect();
        if !dups.is_empty() {
            return Err(Error::Ingestion {
                problems: dups.into_iter().map(|d| format!("duplicate id {d:?}")).collect(),
            });
        }
        Ok(Corpus {
            documents,
            provenance: Provenance {
                source: source.into(),
                ingested_at: chrono::Utc::now().to_rfc3339(),
            },
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Keep only documents whose id is in `ids`, preserving order.
    pub fn retain_ids(&self, ids: &[String]) -> Corpus {
        let keep: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
        Corpus {
            documents: self
                .documents
                .iter()
                .filter(|d| keep.contains(d.id.as_str()))
                .cloned()
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let data = fs::read(path)?;
        Ok(serde_json::from_slice(&data)?)
    }
}

/// Days since 0001-01-01, for dates used as a scalar attribute.
pub fn day_number(date: NaiveDate) -> f64 {
    chrono::Datelike::num_days_from_ce(&date) as f64
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

/// Read every `<id>.txt` in `corpus_dir` and join it with its metadata row.
///
/// All problems (unmatched files, orphan rows, bad dates, duplicate ids) are
/// collected and reported together.
pub fn ingest(corpus_dir: &Path, metadata: &Path, cut_marker: Option<&str>) -> Result<(Corpus, IngestReport)> {
    let mut problems = Vec::new();

    let mut rows: BTreeMap<String, (NaiveDate, String, String)> = BTreeMap::new();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(metadata)?;
    for (line, row) in reader.deserialize::<MetadataRow>().enumerate() {
        let row = row?;
        let Some(date) = parse_date(&row.date) else {
            problems.push(format!("row {} ({}): unparseable date {:?}", line + 2, row.id, row.date));
            continue;
        };
        if rows.contains_key(&row.id) {
            problems.push(format!("duplicate id {:?} in metadata", row.id));
            continue;
        }
        rows.insert(row.id, (date, row.speaker, row.category));
    }

    let mut files: BTreeMap<String, std::path::PathBuf> = BTreeMap::new();
    for entry in fs::read_dir(corpus_dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            files.insert(stem.to_string(), path);
        }
    }

    for id in files.keys() {
        if !rows.contains_key(id) {
            problems.push(format!("file {id}.txt has no metadata row"));
        }
    }
    for id in rows.keys() {
        if !files.contains_key(id) {
            problems.push(format!("metadata row {id:?} has no {id}.txt file"));
        }
    }
    if !problems.is_empty() {
        return Err(Error::Ingestion { problems });
    }

    let documents: Vec<Document> = files
        .par_iter()
        .map(|(id, path)| {
            let text = fs::read_to_string(path)?;
            let (date, speaker, category) = &rows[id];
            Ok(Document::new(id.clone(), *date, speaker.clone(), category.clone(), &text, cut_marker))
        })
        .collect::<Result<_>>()?;

    let report = IngestReport {
        documents: documents.len(),
        empty_documents: documents
            .iter()
            .filter(|d| d.raw_length == 0)
            .map(|d| d.id.clone())
            .collect(),
    };
    let corpus = Corpus::from_documents(documents, corpus_dir.display().to_string())?;
    Ok((corpus, report))
}
