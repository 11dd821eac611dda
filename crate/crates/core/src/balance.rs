//! SMOTE oversampling of the minority class in feature space.
//!
//! Base rows are taken round-robin; each synthetic row interpolates between
//! its base and one of the base's k nearest minority neighbours (Euclidean,
//! ties to the lower row index).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub vector: Vec<f64>,
    pub base_index: usize,
    pub neighbor_index: usize,
    pub u: f64,
}

/// `base + u * (neighbor - base)`, componentwise.
pub fn interpolate(base: &[f64], neighbor: &[f64], u: f64) -> Vec<f64> {
    base.iter().zip(neighbor).map(|(b, n)| b + u * (n - b)).collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest other rows of every row, closest first.
pub fn nearest_neighbors(rows: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    (0..rows.len())
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..rows.len())
                .filter(|&j| j != i)
                .map(|j| (squared_distance(&rows[i], &rows[j]), j))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// SMOTE with the neighbour choice and interpolation weight supplied by
/// `draw(k) -> (neighbor_rank in 0..k, u in [0,1])`.
pub fn smote_with<F>(
    minority: &FeatureMatrix,
    k: usize,
    n_synthetic: usize,
    mut draw: F,
) -> Result<Vec<SyntheticSample>>
where
    F: FnMut(usize) -> (usize, f64),
{
    let rows = minority.rows();
    if rows.len() < 2 {
        return Err(Error::invalid(format!(
            "SMOTE needs at least 2 minority rows, got {}",
            rows.len()
        )));
    }
    if k == 0 || k > rows.len() - 1 {
        return Err(Error::invalid(format!(
            "SMOTE k={k} must lie in 1..={}",
            rows.len() - 1
        )));
    }
    if n_synthetic == 0 {
        return Ok(Vec::new());
    }
    let neighbors = nearest_neighbors(rows, k);
    Ok((0..n_synthetic)
        .map(|j| {
            let base_index = j % rows.len();
            let (rank, u) = draw(k);
            let neighbor_index = neighbors[base_index][rank];
            SyntheticSample {
                vector: interpolate(&rows[base_index], &rows[neighbor_index], u),
                base_index,
                neighbor_index,
                u,
            }
        })
        .collect())
}

pub fn smote(minority: &FeatureMatrix, k: usize, n_synthetic: usize, seed: u64) -> Result<Vec<SyntheticSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    smote_with(minority, k, n_synthetic, |k| {
        let rank = rng.random_range(0..k);
        (rank, rng.random::<f64>())
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RebalanceMode {
    /// Grow the minority class to the majority count.
    Equalize,
    /// Grow the minority class to `f` times its original count.
    Factor(f64),
}

impl std::str::FromStr for RebalanceMode {
    type Err = Error;

    /// Accepts `equalize`, `factor:<f>` or `factor(<f>)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("equalize") {
            return Ok(RebalanceMode::Equalize);
        }
        let inner = s
            .strip_prefix("factor:")
            .or_else(|| s.strip_prefix("factor(").and_then(|r| r.strip_suffix(')')));
        match inner.and_then(|f| f.trim().parse::<f64>().ok()) {
            Some(f) if f >= 1.0 && f.is_finite() => Ok(RebalanceMode::Factor(f)),
            _ => Err(Error::invalid(format!(
                "bad SMOTE mode {s:?}, expected equalize or factor:<f >= 1>"
            ))),
        }
    }
}

impl std::fmt::Display for RebalanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RebalanceMode::Equalize => write!(f, "equalize"),
            RebalanceMode::Factor(x) => write!(f, "factor:{x}"),
        }
    }
}

/// Appends SMOTE rows for the minority class (ties count `Relevant` as the
/// minority). `k` is clamped to the minority size minus one.
pub fn rebalance(
    features: &FeatureMatrix,
    labels: &[Label],
    mode: RebalanceMode,
    k: usize,
    seed: u64,
) -> Result<(FeatureMatrix, Vec<Label>)> {
    if labels.len() != features.len() {
        return Err(Error::invalid(format!(
            "{} labels for {} rows",
            labels.len(),
            features.len()
        )));
    }
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == Label::Relevant).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == Label::NotRelevant).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass(if pos.is_empty() {
            "NotRelevant"
        } else {
            "Relevant"
        }));
    }
    let (minority, majority_len, minority_label) = if pos.len() <= neg.len() {
        (pos, neg.len(), Label::Relevant)
    } else {
        (neg, pos.len(), Label::NotRelevant)
    };
    let target = match mode {
        RebalanceMode::Equalize => majority_len,
        RebalanceMode::Factor(f) => (f * minority.len() as f64).round() as usize,
    };
    let n_synthetic = target.saturating_sub(minority.len());
    if n_synthetic == 0 {
        return Ok((features.clone(), labels.to_vec()));
    }

    let minority_fm = features.select(&minority);
    let k = k.clamp(1, minority.len().saturating_sub(1).max(1));
    let synthetic = smote(&minority_fm, k, n_synthetic, seed)?;

    let (mut ids, mut rows, dim) = features.clone().into_parts();
    let mut out_labels = labels.to_vec();
    for (j, s) in synthetic.into_iter().enumerate() {
        ids.push(format!("{}#smote{j}", minority_fm.ids()[s.base_index]));
        rows.push(s.vector);
        out_labels.push(minority_label);
    }
    Ok((FeatureMatrix::new(ids, rows, dim)?, out_labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(labels: &[Label]) -> (usize, usize) {
        let pos = labels.iter().filter(|&&l| l == Label::Relevant).count();
        (labels.len() - pos, pos)
    }

    fn imbalanced(neg: usize, pos: usize) -> (FeatureMatrix, Vec<Label>) {
        let rows = (0..neg + pos).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let labels = (0..neg + pos)
            .map(|i| if i < neg { Label::NotRelevant } else { Label::Relevant })
            .collect();
        (FeatureMatrix::from_rows(rows).unwrap(), labels)
    }

    #[test]
    fn forced_midpoint() {
        let fm = FeatureMatrix::from_rows(vec![vec![0.0, 0.0], vec![2.0, 2.0]]).unwrap();
        let out = smote_with(&fm, 1, 1, |_| (0, 0.5)).unwrap();
        assert_eq!(out[0].vector, [1.0, 1.0]);
        assert_eq!((out[0].base_index, out[0].neighbor_index), (0, 1));
    }

    #[test]
    fn zero_weight_reproduces_base() {
        let fm = FeatureMatrix::from_rows(vec![vec![0.3, 1.0], vec![2.0, -2.0], vec![5.0, 5.0]]).unwrap();
        for s in smote_with(&fm, 2, 6, |_| (1, 0.0)).unwrap() {
            assert_eq!(s.vector, fm.row(s.base_index));
        }
    }

    #[test]
    fn degenerate_requests() {
        let fm = FeatureMatrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(smote(&fm, 1, 0, 0).unwrap().is_empty());
        assert!(smote(&fm, 2, 3, 0).is_err());
        let single = FeatureMatrix::from_rows(vec![vec![0.0]]).unwrap();
        assert!(smote(&single, 1, 3, 0).is_err());
    }

    #[test]
    fn round_robin_bases() {
        let fm = FeatureMatrix::from_rows(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let bases: Vec<_> = smote(&fm, 2, 7, 11).unwrap().iter().map(|s| s.base_index).collect();
        assert_eq!(bases, [0, 1, 2, 0, 1, 2, 0]);
    }

    #[test]
    fn neighbor_ties_prefer_lower_index() {
        let rows = vec![vec![0.0], vec![1.0], vec![-1.0], vec![5.0]];
        assert_eq!(nearest_neighbors(&rows, 2)[0], [1, 2]);
    }

    #[test]
    fn factor_three_equalizes_thirty_ten() {
        let (fm, labels) = imbalanced(30, 10);
        let (out, out_labels) = rebalance(&fm, &labels, RebalanceMode::Factor(3.0), 5, 1).unwrap();
        assert_eq!(counts(&out_labels), (30, 30));
        assert_eq!(out.len(), 60);
        assert_eq!(&out.rows()[..40], fm.rows());
    }

    #[test]
    fn equalize_and_balanced_noop() {
        let (fm, labels) = imbalanced(30, 10);
        let (_, l) = rebalance(&fm, &labels, RebalanceMode::Equalize, 5, 1).unwrap();
        assert_eq!(counts(&l), (30, 30));
        let (fm, labels) = imbalanced(10, 10);
        let (out, l) = rebalance(&fm, &labels, RebalanceMode::Equalize, 5, 1).unwrap();
        assert_eq!(out, fm);
        assert_eq!(l, labels);
    }

    #[test]
    fn single_class_rejected() {
        let (fm, _) = imbalanced(4, 0);
        let labels = vec![Label::NotRelevant; 4];
        assert!(matches!(
            rebalance(&fm, &labels, RebalanceMode::Equalize, 5, 0),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("equalize".parse::<RebalanceMode>().unwrap(), RebalanceMode::Equalize);
        assert_eq!("factor:3".parse::<RebalanceMode>().unwrap(), RebalanceMode::Factor(3.0));
        assert_eq!(
            "factor(2.5)".parse::<RebalanceMode>().unwrap(),
            RebalanceMode::Factor(2.5)
        );
        assert!("factor:0.5".parse::<RebalanceMode>().is_err());
    }
}
