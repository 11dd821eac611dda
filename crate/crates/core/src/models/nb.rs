use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

use super::{check_dim, check_training_set, PosteriorPair};

pub const DEFAULT_ALPHA: f64 = 1.0;

/// Multinomial naive Bayes over (possibly fractional) term counts.
/// Per-class arrays are indexed by label bit: 0 = NotRelevant, 1 = Relevant.
#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    pub log_prior: [f64; 2],
    pub log_likelihood: [Vec<f64>; 2],
    pub alpha: f64,
}

impl NbModel {
    pub fn dim(&self) -> usize {
        self.log_likelihood[0].len()
    }
}

/// Laplace-smoothed maximum likelihood:
/// `P(t|c) = (count_c[t] + alpha) / (total_c + alpha * V)`.
pub fn nb_train(counts: &FeatureMatrix, labels: &[Label], alpha: f64) -> Result<NbModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    check_training_set(counts, labels)?;
    let vocab = counts.dim();
    let mut class_docs = [0usize; 2];
    let mut term_counts = [vec![0.0; vocab], vec![0.0; vocab]];
    for (row, label) in counts.rows().iter().zip(labels) {
        let c = label.as_bit() as usize;
        class_docs[c] += 1;
        for (acc, &x) in term_counts[c].iter_mut().zip(row) {
            if x < 0.0 {
                return Err(Error::invalid(format!(
                    "naive Bayes needs nonnegative counts, found {x}"
                )));
            }
            *acc += x;
        }
    }
    let n = labels.len() as f64;
    let log_prior = class_docs.map(|d| (d as f64 / n).ln());
    let log_likelihood = term_counts.map(|tc| {
        let denom = tc.iter().sum::<f64>() + alpha * vocab as f64;
        tc.iter().map(|&c| ((c + alpha) / denom).ln()).collect()
    });
    Ok(NbModel {
        log_prior,
        log_likelihood,
        alpha,
    })
}

/// Class posterior via log-sum-exp over the two joint log scores.
pub fn nb_predict(model: &NbModel, x: &[f64]) -> Result<PosteriorPair> {
    check_dim(model.dim(), x.len())?;
    if let Some(bad) = x.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::invalid(format!(
            "naive Bayes needs nonnegative counts, found {bad}"
        )));
    }
    let score = |c: usize| -> f64 {
        model.log_prior[c]
            + x.iter()
                .zip(&model.log_likelihood[c])
                .map(|(xi, ll)| xi * ll)
                .sum::<f64>()
    };
    let (neg, pos) = (score(0), score(1));
    let max = neg.max(pos);
    let (en, ep) = ((neg - max).exp(), (pos - max).exp());
    Ok(PosteriorPair {
        p_neg: en / (en + ep),
        p_pos: ep / (en + ep),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{bow_vectorize, build_vocabulary};
    use crate::textprep::TokenSequence;

    fn flood_corpus() -> (FeatureMatrix, Vec<Label>, crate::features::Vocabulary) {
        let docs: Vec<TokenSequence> = ["alluvione strada", "alluvione pioggia", "sole mare"]
            .iter()
            .map(|d| TokenSequence::new(d.split(' ')))
            .collect();
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let rows = docs.iter().map(|d| bow_vectorize(d, &vocab)).collect();
        let labels = vec![Label::Relevant, Label::Relevant, Label::NotRelevant];
        (FeatureMatrix::from_rows(rows).unwrap(), labels, vocab)
    }

    #[test]
    fn hand_computed_parameters() {
        let (x, y, vocab) = flood_corpus();
        assert_eq!(vocab.len(), 5);
        let m = nb_train(&x, &y, 1.0).unwrap();
        assert!((m.log_prior[1].exp() - 2.0 / 3.0).abs() < 1e-15);
        let a = vocab.index_of("alluvione").unwrap();
        assert!((m.log_likelihood[1][a].exp() - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.log_likelihood[0][a].exp() - 1.0 / 7.0).abs() < 1e-15);
        for c in 0..2 {
            let total: f64 = m.log_likelihood[c].iter().map(|l| l.exp()).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_token_query_is_fourteen_seventeenths() {
        let (x, y, vocab) = flood_corpus();
        let m = nb_train(&x, &y, 1.0).unwrap();
        let q = bow_vectorize(&TokenSequence::new(["alluvione"]), &vocab);
        let p = nb_predict(&m, &q).unwrap();
        assert!((p.p_pos - 14.0 / 17.0).abs() < 1e-12);
        assert!((p.p_neg + p.p_pos - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unseen_token_keeps_positive_likelihood() {
        let (x, y, vocab) = flood_corpus();
        let m = nb_train(&x, &y, 1.0).unwrap();
        let sole = vocab.index_of("sole").unwrap();
        // 0 + 1 over 4 + 5
        assert!((m.log_likelihood[1][sole].exp() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn empty_query_returns_prior() {
        let (x, y, _) = flood_corpus();
        let m = nb_train(&x, &y, 1.0).unwrap();
        let p = nb_predict(&m, &[0.0; 5]).unwrap();
        assert!((p.p_pos - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_priors_match() {
        let x = FeatureMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let m = nb_train(&x, &[Label::Relevant, Label::NotRelevant], 1.0).unwrap();
        assert_eq!(m.log_prior[0], m.log_prior[1]);
    }

    #[test]
    fn fractional_counts_accepted_negative_rejected() {
        let x = FeatureMatrix::from_rows(vec![vec![0.5, 1.25], vec![2.0, 0.0]]).unwrap();
        let y = [Label::Relevant, Label::NotRelevant];
        assert!(nb_train(&x, &y, 1.0).is_ok());
        let bad = FeatureMatrix::from_rows(vec![vec![-0.5, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(nb_train(&bad, &y, 1.0).is_err());
        assert!(nb_train(&x, &[Label::Relevant; 2], 1.0).is_err());
        assert!(nb_train(&x, &y, 0.0).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let (x, y, _) = flood_corpus();
        let m = nb_train(&x, &y, 1.0).unwrap();
        assert!(matches!(
            nb_predict(&m, &[1.0]),
            Err(Error::DimensionMismatch { expected: 5, found: 1 })
        ));
    }
}
