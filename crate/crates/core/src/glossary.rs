//! Glossary loading, merging and surface-variant generation.
//!
//! Each locution has a canonical form and a set of surface variants. Variants
//! are turned into match keys with the same normalizer the corpus uses, then
//! bucketed by token length so the counter can go longest-first.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::normalize;
use crate::error::{Error, Result};

/// One glossary line before merging.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEntry {
    pub canonical: String,
    #[serde(default)]
    pub variants: Vec<String>,
    #[serde(default)]
    pub source: String,
}

impl RawEntry {
    pub fn new(canonical: impl Into<String>, source: impl Into<String>) -> Self {
        RawEntry {
            canonical: canonical.into(),
            variants: Vec::new(),
            source: source.into(),
        }
    }

    pub fn with_variants<I, S>(mut self, variants: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.variants.extend(variants.into_iter().map(Into::into));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Locution {
    pub canonical: String,
    /// Surface forms: the canonical, hyphen forms and explicit variants.
    pub variants: BTreeSet<String>,
    /// Rule-generated plural forms.
    pub plurals: BTreeSet<String>,
    pub sources: BTreeSet<String>,
}

impl Locution {
    pub fn surface_forms(&self) -> impl Iterator<Item = &String> {
        self.variants.iter().chain(self.plurals.iter())
    }

    /// Distinct token sequences this locution matches.
    pub fn match_keys(&self) -> BTreeSet<Vec<String>> {
        self.surface_forms()
            .map(|v| normalize(v, None))
            .filter(|k| !k.is_empty())
            .collect()
    }
}

/// Lowercase, trim and collapse internal whitespace. Hyphens are kept so the
/// canonical reads the way the source wrote it.
pub fn normalize_entry(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn pluralize(form: &str) -> Option<String> {
    let last = form.chars().last()?;
    if !last.is_alphabetic() {
        return None;
    }
    const SIBILANT: [&str; 5] = ["s", "x", "z", "ch", "sh"];
    if SIBILANT.iter().any(|s| form.ends_with(s)) {
        return Some(format!("{form}es"));
    }
    if let Some(stem) = form.strip_suffix('y') {
        let before = stem.chars().last();
        if before.is_some_and(|c| c.is_alphabetic() && !"aeiou".contains(c)) {
            return Some(format!("{stem}ies"));
        }
    }
    Some(format!("{form}s"))
}

/// Build a locution from a single raw entry: the normalized form, its
/// hyphen-split counterpart, plurals of both, and any explicit variants.
pub fn generate_variants(entry: &RawEntry) -> Locution {
    let canonical = normalize_entry(&entry.canonical);
    let mut variants = BTreeSet::new();
    let mut base = vec![canonical.clone()];
    if canonical.contains('-') {
        let split = normalize_entry(&canonical.replace('-', " "));
        if !split.is_empty() {
            base.push(split);
        }
    }
    let plurals = base.iter().filter_map(|f| pluralize(f)).collect();
    variants.extend(base);
    variants.extend(
        entry
            .variants
            .iter()
            .map(|v| normalize_entry(v))
            .filter(|v| !v.is_empty()),
    );
    let mut sources = BTreeSet::new();
    if !entry.source.is_empty() {
        sources.insert(entry.source.clone());
    }
    Locution {
        canonical,
        variants,
        plurals,
        sources,
    }
}

#[derive(Clone, Debug)]
pub struct Glossary {
    locutions: Vec<Locution>,
    /// `buckets[l - 1]` maps every match key of `l` tokens to a locution index.
    buckets: Vec<HashMap<Vec<String>, usize>>,
}

impl Glossary {
    /// Merge raw entries into a glossary. Entries whose canonical forms
    /// tokenize identically are folded together. A rule-generated plural that
    /// equals another locution's surface form yields to it; any other shared
    /// match key is an error.
    pub fn from_entries<'a, I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a RawEntry>,
    {
        let mut merged: BTreeMap<Vec<String>, Locution> = BTreeMap::new();
        for entry in entries {
            let loc = generate_variants(entry);
            let key = normalize(&loc.canonical, None);
            if key.is_empty() {
                return Err(Error::EmptyEntry { line: 0 });
            }
            match merged.get_mut(&key) {
                Some(existing) => {
                    if loc.canonical < existing.canonical {
                        existing.canonical = loc.canonical.clone();
                    }
                    existing.variants.extend(loc.variants);
                    existing.plurals.extend(loc.plurals);
                    existing.sources.extend(loc.sources);
                }
                None => {
                    merged.insert(key, loc);
                }
            }
        }
        let mut locutions: Vec<Locution> = merged.into_values().collect();
        locutions.sort_by(|a, b| a.canonical.cmp(&b.canonical));

        // primary surface keys win over generated plurals
        let mut primary: HashMap<Vec<String>, usize> = HashMap::new();
        for (idx, loc) in locutions.iter().enumerate() {
            for v in &loc.variants {
                let key = normalize(v, None);
                if key.is_empty() {
                    continue;
                }
                if let Some(&other) = primary.get(&key) {
                    if other != idx {
                        return Err(collision(v, &locutions[other], loc));
                    }
                }
                primary.insert(key, idx);
            }
        }
        for idx in 0..locutions.len() {
            let shadowed: Vec<String> = locutions[idx]
                .plurals
                .iter()
                .filter(|p| {
                    let key = normalize(p, None);
                    primary.get(&key).is_some_and(|&o| o != idx)
                })
                .cloned()
                .collect();
            for p in shadowed {
                locutions[idx].plurals.remove(&p);
            }
        }

        let mut keys: HashMap<Vec<String>, usize> = HashMap::new();
        for (idx, loc) in locutions.iter().enumerate() {
            for v in loc.surface_forms() {
                let key = normalize(v, None);
                if key.is_empty() {
                    continue;
                }
                if let Some(&other) = keys.get(&key) {
                    if other != idx {
                        return Err(collision(v, &locutions[other], loc));
                    }
                }
                keys.insert(key, idx);
            }
        }

        let max_len = keys.keys().map(Vec::len).max().unwrap_or(0);
        let mut buckets = vec![HashMap::new(); max_len];
        for (key, idx) in keys {
            buckets[key.len() - 1].insert(key, idx);
        }
        Ok(Glossary { locutions, buckets })
    }

    pub fn locutions(&self) -> &[Locution] {
        &self.locutions
    }

    pub fn len(&self) -> usize {
        self.locutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locutions.is_empty()
    }

    /// Longest match key, in tokens.
    pub fn max_len(&self) -> usize {
        self.buckets.len()
    }

    /// Match keys of exactly `len` tokens.
    pub fn bucket(&self, len: usize) -> Option<&HashMap<Vec<String>, usize>> {
        len.checked_sub(1).and_then(|i| self.buckets.get(i))
    }

    pub fn index_of(&self, canonical: &str) -> Option<usize> {
        self.locutions
            .binary_search_by(|l| l.canonical.as_str().cmp(canonical))
            .ok()
    }

    /// Write the merged glossary in the JSON entry format; reloading it
    /// reproduces the same glossary.
    pub fn to_entries(&self) -> Vec<RawEntry> {
        self.locutions
            .iter()
            .map(|l| RawEntry {
                canonical: l.canonical.clone(),
                variants: l.variants.iter().filter(|v| **v != l.canonical).cloned().collect(),
                source: l.sources.iter().cloned().collect::<Vec<_>>().join(","),
            })
            .collect()
    }
}

fn collision(variant: &str, a: &Locution, b: &Locution) -> Error {
    Error::VariantCollision {
        variant: variant.to_string(),
        first: a.canonical.clone(),
        second: b.canonical.clone(),
    }
}

/// Union of two raw lists.
pub fn merge_glossaries(a: &[RawEntry], b: &[RawEntry]) -> Result<Glossary> {
    Glossary::from_entries(a.iter().chain(b.iter()))
}

/// Parse the tab-separated format: `canonical[TAB]variant1|variant2|...`,
/// `#` comments and blank lines ignored.
pub fn parse_tsv(text: &str, source: &str) -> Result<Vec<RawEntry>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(2, '\t');
        let canonical = parts.next().unwrap_or("").trim();
        if canonical.is_empty() {
            return Err(Error::EmptyEntry { line: n + 1 });
        }
        let variants = parts
            .next()
            .map(|v| {
                v.split('|')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default();
        out.push(RawEntry {
            canonical: canonical.to_string(),
            variants,
            source: source.to_string(),
        });
    }
    Ok(out)
}

/// Load a glossary source file. `.json` files hold an array of
/// `{canonical, variants, source}` objects; anything else is read as TSV.
/// The file stem is used as the source tag when an entry carries none. A
/// comma-separated `source` is split into several tags.
pub fn load_entries(path: &Path) -> Result<Vec<RawEntry>> {
    let text = fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("glossary")
        .to_string();
    let is_json = path.extension().and_then(|e| e.to_str()) == Some("json")
        || text.trim_start().starts_with('[');
    if !is_json {
        return parse_tsv(&text, &stem);
    }
    let entries: Vec<RawEntry> =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    let mut out = Vec::new();
    for (i, mut e) in entries.into_iter().enumerate() {
        if e.canonical.trim().is_empty() {
            return Err(Error::EmptyEntry { line: i + 1 });
        }
        if e.source.is_empty() {
            e.source = stem.clone();
        }
        if e.source.contains(',') {
            for tag in e.source.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                out.push(RawEntry {
                    canonical: e.canonical.clone(),
                    variants: e.variants.clone(),
                    source: tag.to_string(),
                });
            }
        } else {
            out.push(e);
        }
    }
    Ok(out)
}

pub fn save_json(glossary: &Glossary, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(&glossary.to_entries())?)?;
    Ok(())
}
