//! Labeled tweet datasets: loading from CSV or JSON-lines, saving, and
//! stratified train/dev splitting.
//!
//! JSON-lines rows carry `id`, `text`, optional `images` (array of strings)
//! and optional `label` (0 or 1); unknown keys are ignored. CSV files have
//! the header `id,text,images,label`, where `images` is a `;`-separated list
//! and an empty cell means the value is absent.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use siphasher::sip::SipHasher13;

use crate::error::{Error, Result};

/// Binary relevance label. `Relevant` is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    NotRelevant = 0,
    Relevant = 1,
}

impl Label {
    pub fn from_bit(bit: u8) -> Option<Label> {
        match bit {
            0 => Some(Label::NotRelevant),
            1 => Some(Label::Relevant),
            _ => None,
        }
    }

    pub fn as_bit(self) -> u8 {
        self as u8
    }

    pub fn flip(self) -> Label {
        match self {
            Label::NotRelevant => Label::Relevant,
            Label::Relevant => Label::NotRelevant,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub image_refs: Vec<String>,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    JsonLines,
}

impl DatasetFormat {
    /// Guess the format from a file extension; anything but `.csv` is JSON-lines.
    pub fn from_path(path: &Path) -> DatasetFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::JsonLines,
        }
    }
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DatasetFormat::Csv),
            "jsonl" | "jsonlines" | "json-lines" | "ndjson" => Ok(DatasetFormat::JsonLines),
            other => Err(Error::invalid(format!("unknown dataset format {other:?}"))),
        }
    }
}

/// An ordered, validated collection of records. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<TweetRecord>,
    positive_count: usize,
    negative_count: usize,
}

impl Dataset {
    /// Builds a dataset, rejecting empty or duplicate ids.
    pub fn new(records: Vec<TweetRecord>) -> Result<Dataset> {
        let mut seen = HashSet::with_capacity(records.len());
        let (mut pos, mut neg) = (0, 0);
        for r in &records {
            if r.id.is_empty() {
                return Err(Error::invalid("record id must be nonempty"));
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
            match r.label {
                Some(Label::Relevant) => pos += 1,
                Some(Label::NotRelevant) => neg += 1,
                None => {}
            }
        }
        Ok(Dataset {
            records,
            positive_count: pos,
            negative_count: neg,
        })
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn positive_count(&self) -> usize {
        self.positive_count
    }

    pub fn negative_count(&self) -> usize {
        self.negative_count
    }

    pub fn unlabeled_count(&self) -> usize {
        self.records.len() - self.positive_count - self.negative_count
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.id.as_str())
    }

    /// Labels of every record, failing on the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.records
            .iter()
            .map(|r| r.label.ok_or_else(|| Error::Unlabeled(r.id.clone())))
            .collect()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.unlabeled_count() == 0
    }

    /// Subset by record positions, keeping the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let records = indices.iter().map(|&i| self.records[i].clone()).collect();
        Dataset::new(records).expect("subset of a valid dataset is valid")
    }
}

#[derive(Deserialize)]
struct JsonRow {
    id: Option<String>,
    text: Option<String>,
    #[serde(default)]
    images: Option<Vec<String>>,
    #[serde(default)]
    label: Option<serde_json::Value>,
}

fn parse_label(raw: &str, line: usize) -> Result<Label> {
    match raw.trim() {
        "0" => Ok(Label::NotRelevant),
        "1" => Ok(Label::Relevant),
        other => Err(Error::Parse {
            line,
            message: format!("label must be 0 or 1, got {other:?}"),
        }),
    }
}

fn json_label(value: Option<serde_json::Value>, line: usize) -> Result<Option<Label>> {
    use serde_json::Value;
    match value {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => match n.as_u64() {
            Some(0) => Ok(Some(Label::NotRelevant)),
            Some(1) => Ok(Some(Label::Relevant)),
            _ => Err(Error::Parse {
                line,
                message: format!("label must be 0 or 1, got {n}"),
            }),
        },
        Some(Value::String(s)) => parse_label(&s, line).map(Some),
        Some(other) => Err(Error::Parse {
            line,
            message: format!("label must be 0 or 1, got {other}"),
        }),
    }
}

fn parse_jsonlines(content: &str) -> Result<Vec<TweetRecord>> {
    let mut records = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(raw).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let id = row.id.filter(|s| !s.is_empty()).ok_or(Error::Parse {
            line,
            message: "missing id".into(),
        })?;
        let text = row.text.ok_or(Error::Parse {
            line,
            message: "missing text".into(),
        })?;
        records.push(TweetRecord {
            id,
            text,
            image_refs: row.images.unwrap_or_default(),
            label: json_label(row.label, line)?,
        });
    }
    Ok(records)
}

fn parse_csv(content: &str) -> Result<Vec<TweetRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(content.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (id_col, text_col) = match (column("id"), column("text")) {
        (Some(i), Some(t)) => (i, t),
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "header must contain id and text columns".into(),
            })
        }
    };
    let images_col = column("images");
    let label_col = column("label");

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let cell = |col: Option<usize>| col.and_then(|c| row.get(c)).filter(|s| !s.is_empty());
        let id = cell(Some(id_col)).ok_or(Error::Parse {
            line,
            message: "missing id".into(),
        })?;
        let text = cell(Some(text_col)).ok_or(Error::Parse {
            line,
            message: "missing text".into(),
        })?;
        let image_refs = cell(images_col)
            .map(|s| s.split(';').filter(|p| !p.is_empty()).map(str::to_owned).collect())
            .unwrap_or_default();
        let label = cell(label_col).map(|s| parse_label(s, line)).transpose()?;
        records.push(TweetRecord {
            id: id.to_owned(),
            text: text.to_owned(),
            image_refs,
            label,
        });
    }
    Ok(records)
}

/// Parses dataset text already in memory.
pub fn parse_dataset(content: &str, format: DatasetFormat) -> Result<Dataset> {
    let records = match format {
        DatasetFormat::JsonLines => parse_jsonlines(content)?,
        DatasetFormat::Csv => parse_csv(content)?,
    };
    Dataset::new(records)
}

pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Dataset> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&content, format)
}

/// Serializes as JSON-lines with a fixed key order, so saving a reloaded
/// dataset reproduces the same bytes.
pub fn write_jsonlines<W: Write>(ds: &Dataset, mut out: W) -> std::io::Result<()> {
    for r in ds.records() {
        let mut obj = serde_json::Map::new();
        obj.insert("id".into(), r.id.clone().into());
        obj.insert("text".into(), r.text.clone().into());
        if !r.image_refs.is_empty() {
            obj.insert("images".into(), r.image_refs.clone().into());
        }
        if let Some(label) = r.label {
            obj.insert("label".into(), label.as_bit().into());
        }
        serde_json::to_writer(&mut out, &serde_json::Value::Object(obj))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_jsonlines(ds, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Number of class members sent to dev: round-half-up of `fraction * n`,
/// never below one.
pub fn dev_count(n: usize, fraction: f64) -> usize {
    // the epsilon absorbs binary representation error in products such as 0.29 * 50
    let rounded = (fraction * n as f64 + 0.5 + 1e-9).floor() as usize;
    rounded.clamp(1, n)
}

/// Keyed hash of a record id; orders records for seeded assignment.
pub(crate) fn id_rank(id: &str, seed: u64) -> u64 {
    use std::hash::Hasher;
    let mut h = SipHasher13::new_with_keys(seed, 0x666c_6f6f_6473_706c);
    h.write(id.as_bytes());
    h.finish()
}

/// Record positions per class, each class ordered by the seeded id hash.
fn class_orders(ds: &Dataset, seed: u64) -> Result<[Vec<usize>; 2]> {
    let labels = ds.labels()?;
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, label) in labels.iter().enumerate() {
        by_class[label.as_bit() as usize].push(i);
    }
    for members in &mut by_class {
        members.sort_by_key(|&i| (id_rank(&ds.records[i].id, seed), i));
    }
    Ok(by_class)
}

/// Splits a labeled dataset so each class contributes `dev_count(n_c, fraction)`
/// records to dev. Both halves keep load order.
pub fn stratified_split(ds: &Dataset, dev_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "dev_fraction must lie in (0,1), got {dev_fraction}"
        )));
    }
    let by_class = class_orders(ds, seed)?;
    let mut in_dev = vec![false; ds.len()];
    for members in &by_class {
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::invalid("each present class needs at least 2 records to split"));
        }
        for &i in &members[..dev_count(members.len(), dev_fraction)] {
            in_dev[i] = true;
        }
    }
    let (dev, train): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| in_dev[i]);
    Ok((ds.select(&train), ds.select(&dev)))
}

/// Assigns each record a fold in `0..folds`, dealing every class round-robin
/// in seeded-hash order so folds stay stratified.
pub fn stratified_folds(ds: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    let by_class = class_orders(ds, seed)?;
    let mut fold_of = vec![0; ds.len()];
    for members in &by_class {
        for (rank, &i) in members.iter().enumerate() {
            fold_of[i] = rank % folds;
        }
    }
    Ok(fold_of)
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_bit())
    }
}
