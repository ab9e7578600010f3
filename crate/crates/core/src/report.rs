//! Figure-ready tables: economic content over time with period labels, and
//! term frequencies of the core and periphery groups.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{parse_date, Corpus};
use crate::error::{Error, Result};
use crate::richclub::CoreMembership;
use crate::termmatrix::{economic_content, DocTermMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodLabel {
    Normal,
    Recession,
}

impl fmt::Display for PeriodLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeriodLabel::Normal => "normal",
            PeriodLabel::Recession => "recession",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub label: PeriodLabel,
}

/// Labelled closed date ranges. Where ranges overlap, recession wins; dates
/// outside every range are normal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodConfig {
    pub periods: Vec<Period>,
}

impl PeriodConfig {
    pub fn new(periods: Vec<Period>) -> Result<Self> {
        if let Some(p) = periods.iter().find(|p| p.start > p.end) {
            return Err(Error::invalid(format!("period {} starts after it ends ({})", p.start, p.end)));
        }
        Ok(PeriodConfig { periods })
    }

    pub fn label(&self, date: NaiveDate) -> PeriodLabel {
        self.periods
            .iter()
            .filter(|p| p.start <= date && date <= p.end)
            .map(|p| p.label)
            .max()
            .unwrap_or(PeriodLabel::Normal)
    }

    /// CSV `start,end,label` with ISO dates and label `recession|normal`.
    pub fn load(path: &Path) -> Result<Self> {
        let mut periods = Vec::new();
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| rec.get(k).unwrap_or("");
            let date = |k: usize| {
                parse_date(field(k))
                    .ok_or_else(|| Error::parse(path, format!("row {}: bad date {:?}", line + 2, field(k))))
            };
            let label = match field(2).to_ascii_lowercase().as_str() {
                "recession" => PeriodLabel::Recession,
                "normal" => PeriodLabel::Normal,
                other => {
                    return Err(Error::parse(path, format!("row {}: unknown label {other:?}", line + 2)));
                }
            };
            periods.push(Period {
                start: date(0)?,
                end: date(1)?,
                label,
            });
        }
        Self::new(periods)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentRow {
    pub doc_id: String,
    pub date: NaiveDate,
    pub score: f64,
    pub percentage: f64,
    pub label: PeriodLabel,
}

/// Economic content of every corpus document, ordered by date then id.
/// Documents dropped from the matrix for having no occurrences score 0.
pub fn content_timeseries(corpus: &Corpus, matrix: &DocTermMatrix, periods: &PeriodConfig) -> Result<Vec<ContentRow>> {
    let rows: HashMap<&str, usize> = matrix
        .doc_ids
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();
    let mut out = Vec::with_capacity(corpus.len());
    for doc in &corpus.documents {
        let score = match rows.get(doc.id.as_str()) {
            Some(&i) => economic_content(&matrix.rel[i]),
            None if matrix.removed_docs.contains(&doc.id) => 0.0,
            None => {
                return Err(Error::invalid(format!("document {:?} is not in the matrix", doc.id)));
            }
        };
        out.push(ContentRow {
            doc_id: doc.id.clone(),
            date: doc.date,
            score,
            percentage: score * 100.0,
            label: periods.label(doc.date),
        });
    }
    out.sort_by(|a, b| (a.date, &a.doc_id).cmp(&(b.date, &b.doc_id)));
    Ok(out)
}

/// Mean score per period label, for labels that occur.
pub fn mean_by_label(rows: &[ContentRow]) -> Vec<(PeriodLabel, f64)> {
    let mut acc: std::collections::BTreeMap<PeriodLabel, (f64, usize)> = Default::default();
    for r in rows {
        let e = acc.entry(r.label).or_default();
        e.0 += r.score;
        e.1 += 1;
    }
    acc.into_iter().map(|(l, (s, n))| (l, s / n as f64)).collect()
}

pub fn save_timeseries(rows: &[ContentRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["doc_id", "date", "score", "percentage", "label"])?;
    for r in rows {
        w.write_record([
            r.doc_id.clone(),
            r.date.to_string(),
            format!("{:?}", r.score),
            format!("{:?}", r.percentage),
            r.label.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const DEFAULT_CUTOFF: f64 = 0.02;

/// Terms removed by a high-frequency cutoff `q`: the `ceil(q * T)` terms with
/// the largest total count over the whole matrix, ties by term name.
pub fn high_frequency_terms(matrix: &DocTermMatrix, q: f64) -> Result<Vec<String>> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("cutoff must be in [0, 1], got {q}")));
    }
    let sums = matrix.column_sums(|_| true);
    let mut order: Vec<usize> = (0..matrix.cols()).collect();
    order.sort_by(|&a, &b| sums[b].cmp(&sums[a]).then_with(|| matrix.terms[a].cmp(&matrix.terms[b])));
    let k = (q * matrix.cols() as f64).ceil() as usize;
    Ok(order[..k.min(order.len())].iter().map(|&j| matrix.terms[j].clone()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupTermTable {
    pub group: String,
    /// Non-zero totals, largest first, ties by term.
    pub terms: Vec<(String, u64)>,
    pub cutoff: Option<f64>,
}

impl GroupTermTable {
    pub fn get(&self, term: &str) -> Option<u64> {
        self.terms.iter().find(|(t, _)| t == term).map(|e| e.1)
    }

    /// CSV `term,frequency`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["term", "frequency"])?;
        for (t, f) in &self.terms {
            w.write_record([t.as_str(), &f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Term totals for the core and the periphery. Matrix rows absent from the
/// membership (documents outside the analysed component) are ignored.
pub fn group_terms(
    matrix: &DocTermMatrix,
    membership: &CoreMembership,
    cutoff: Option<f64>,
) -> Result<(GroupTermTable, GroupTermTable)> {
    let side: HashMap<&str, bool> = membership
        .ids
        .iter()
        .zip(&membership.in_core)
        .map(|(id, &c)| (id.as_str(), c))
        .collect();
    let group_of: Vec<Option<bool>> = matrix.doc_ids.iter().map(|d| side.get(d.as_str()).copied()).collect();
    let removed: Vec<String> = match cutoff {
        Some(q) => high_frequency_terms(matrix, q)?,
        None => Vec::new(),
    };
    let table = |core: bool, label: &str| -> Result<GroupTermTable> {
        if !group_of.contains(&Some(core)) {
            return Err(Error::EmptyGroup(label.to_string()));
        }
        let sums = matrix.column_sums(|i| group_of[i] == Some(core));
        let mut terms: Vec<(String, u64)> = matrix
            .terms
            .iter()
            .zip(sums)
            .filter(|(t, s)| *s > 0 && !removed.contains(t))
            .map(|(t, s)| (t.clone(), s))
            .collect();
        terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(GroupTermTable {
            group: label.to_string(),
            terms,
            cutoff,
        })
    };
    Ok((table(true, "core")?, table(false, "periphery")?))
}
