//! Bag-of-words vectors, the deterministic hashing embedder, and the
//! id-keyed feature-file format shared with external encoders.
//!
//! Feature file layout:
//!
//! ```text
//! #dim=3
//! # optional comment lines
//! tweet-1<TAB>0.5 1.0 -2e-3
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::hash::Hasher;
use std::path::Path;

use siphasher::sip::SipHasher13;

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::textprep::TokenSequence;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_index: BTreeMap<String, usize>,
    min_count: usize,
}

impl Vocabulary {
    /// Builds from tokens listed in index order (the saved vocabulary layout).
    pub fn from_ordered(tokens: impl IntoIterator<Item = String>, min_count: usize) -> Result<Vocabulary> {
        let mut token_to_index = BTreeMap::new();
        for (i, t) in tokens.into_iter().enumerate() {
            if token_to_index.insert(t.clone(), i).is_some() {
                return Err(Error::DuplicateId(t));
            }
        }
        if token_to_index.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if token_to_index.values().zip(0..).any(|(&i, expected)| i != expected) {
            return Err(Error::Format("vocabulary tokens must be listed in sorted order".into()));
        }
        Ok(Vocabulary {
            token_to_index,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.token_to_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_to_index.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.token_to_index.get(token).copied()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    /// Tokens in index order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.token_to_index.keys().map(String::as_str)
    }

    pub fn to_text(&self) -> String {
        self.tokens().fold(String::new(), |mut s, t| {
            s.push_str(t);
            s.push('\n');
            s
        })
    }

    pub fn parse(content: &str) -> Result<Vocabulary> {
        Vocabulary::from_ordered(
            content
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned),
            1,
        )
    }
}

/// Keeps tokens whose total corpus count reaches `min_count`, indexed in
/// lexicographic order.
pub fn build_vocabulary(docs: &[TokenSequence], min_count: usize) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::invalid("min_count must be at least 1"));
    }
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for token in docs.iter().flat_map(|d| d.iter()) {
        *freq.entry(token.as_str()).or_default() += 1;
    }
    let token_to_index: BTreeMap<String, usize> = freq
        .into_iter()
        .filter(|&(_, n)| n >= min_count)
        .enumerate()
        .map(|(i, (t, _))| (t.to_owned(), i))
        .collect();
    if token_to_index.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Ok(Vocabulary {
        token_to_index,
        min_count,
    })
}

/// Raw occurrence counts; out-of-vocabulary tokens are ignored.
pub fn bow_vectorize(doc: &TokenSequence, vocab: &Vocabulary) -> Vec<f64> {
    let mut v = vec![0.0; vocab.len()];
    for i in doc.iter().filter_map(|t| vocab.index_of(t)) {
        v[i] += 1.0;
    }
    v
}

/// Signed feature hashing: each token adds ±1 to a seeded bucket, then the
/// vector is scaled to unit L2 norm unless it is zero.
pub fn hash_embed(doc: &TokenSequence, dim: usize, seed: u64) -> Vec<f64> {
    assert!(dim >= 1, "hash_embed needs dim >= 1");
    let mut v = vec![0.0; dim];
    for token in doc {
        let mut h = SipHasher13::new_with_keys(seed, 0x6861_7368_656d_6264);
        h.write(token.as_bytes());
        let hash = h.finish();
        let sign = if hash >> 63 == 0 { 1.0 } else { -1.0 };
        v[(hash % dim as u64) as usize] += sign;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Id-keyed dense rows of a fixed width.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    ids: Vec<String>,
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl FeatureMatrix {
    pub fn new(ids: Vec<String>, rows: Vec<Vec<f64>>, dim: usize) -> Result<FeatureMatrix> {
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        if ids.len() != rows.len() {
            return Err(Error::invalid(format!("{} ids for {} rows", ids.len(), rows.len())));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (id, row) in ids.iter().zip(&rows) {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
            if row.len() != dim {
                return Err(Error::Dimension {
                    id: id.clone(),
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        Ok(FeatureMatrix { ids, rows, dim })
    }

    /// Matrix with generated ids `0..n`; handy for in-memory training data.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<FeatureMatrix> {
        let dim = rows.first().map_or(0, Vec::len);
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        FeatureMatrix::new(ids, rows, dim)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn into_parts(self) -> (Vec<String>, Vec<Vec<f64>>, usize) {
        (self.ids, self.rows, self.dim)
    }

    /// Rows at the given positions, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            dim: self.dim,
        }
    }

    pub fn position_map(&self) -> HashMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
    }

    /// Serializes in the feature-file format. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_feature_text(&self) -> String {
        let mut out = format!("#dim={}\n", self.dim);
        for (id, row) in self.ids.iter().zip(&self.rows) {
            out.push_str(id);
            out.push('\t');
            write_values(&mut out, row);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_feature_text()).map_err(|e| Error::io(path, e))
    }
}

/// Space-separated values in the feature-file numeric syntax.
pub(crate) fn write_values(out: &mut String, values: &[f64]) {
    for (j, v) in values.iter().enumerate() {
        if j > 0 {
            out.push(' ');
        }
        write!(out, "{v}").expect("writing to a String cannot fail");
    }
}

pub(crate) fn parse_values(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split_ascii_whitespace()
        .map(|tok| match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("invalid number {tok:?}")),
        })
        .collect()
}

pub fn parse_feature_text(content: &str) -> Result<FeatureMatrix> {
    let mut lines = content.lines().enumerate();
    let header = lines
        .next()
        .map(|(_, l)| l.trim_end_matches('\r'))
        .ok_or_else(|| Error::Format("empty feature file, expected #dim=<n> header".into()))?;
    let dim: usize = header
        .strip_prefix("#dim=")
        .and_then(|d| d.trim().parse().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::Format(format!("bad header {header:?}, expected #dim=<positive integer>")))?;

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, values) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: "expected <id><TAB><values>".into(),
        })?;
        if id.is_empty() {
            return Err(Error::Parse {
                line: idx + 1,
                message: "empty id".into(),
            });
        }
        let row = parse_values(values).map_err(|message| Error::Parse { line: idx + 1, message })?;
        if row.len() != dim {
            return Err(Error::Dimension {
                id: id.to_owned(),
                expected: dim,
                found: row.len(),
            });
        }
        if !seen.insert(id.to_owned()) {
            return Err(Error::DuplicateId(id.to_owned()));
        }
        ids.push(id.to_owned());
        rows.push(row);
    }
    Ok(FeatureMatrix { ids, rows, dim })
}

pub fn load_feature_file(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_feature_text(&content)
}

/// Reorders rows to follow the dataset's record order, failing with every
/// dataset id the matrix lacks.
pub fn align_features(ds: &Dataset, fm: &FeatureMatrix) -> Result<FeatureMatrix> {
    let (present, missing) = align_partial(ds, fm);
    if !missing.is_empty() {
        return Err(Error::MissingFeatures(missing));
    }
    let indices: Vec<usize> = present.into_iter().map(|p| p.expect("no missing ids")).collect();
    Ok(fm.select(&indices))
}

/// Row position in `fm` for each record (None where absent), plus the
/// absent ids.
pub fn align_partial(ds: &Dataset, fm: &FeatureMatrix) -> (Vec<Option<usize>>, Vec<String>) {
    let positions = fm.position_map();
    let mut missing = Vec::new();
    let present = ds
        .ids()
        .map(|id| {
            let pos = positions.get(id).copied();
            if pos.is_none() {
                missing.push(id.to_owned());
            }
            pos
        })
        .collect();
    (present, missing)
}
