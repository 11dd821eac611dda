//! Binary classifiers that emit posterior pairs: multinomial naive Bayes,
//! logistic regression, and a linear SVM calibrated with a fitted sigmoid.

mod lr;
mod nb;
mod persist;
mod platt;
mod scale;
mod svm;

pub use lr::{lr_gradient, lr_predict, lr_train, LrGradient, LrModel, LrParams};
pub use nb::{nb_predict, nb_train, NbModel, DEFAULT_ALPHA};
pub use persist::{load_model, model_to_text, parse_model, save_model};
pub use platt::{platt_fit, PlattFit};
pub use scale::Standardizer;
pub use svm::{svm_predict, svm_train, svm_train_margins, SvmModel, SvmParams};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Normalized class posterior `(p_neg, p_pos)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorPair {
    pub p_neg: f64,
    pub p_pos: f64,
}

impl PosteriorPair {
    /// Pair from the positive-class probability, clamped to `[0, 1]`.
    pub fn from_positive(p_pos: f64) -> PosteriorPair {
        let p_pos = p_pos.clamp(0.0, 1.0);
        PosteriorPair {
            p_neg: 1.0 - p_pos,
            p_pos,
        }
    }

    /// Normalizes nonnegative class masses.
    pub fn from_masses(neg: f64, pos: f64) -> Result<PosteriorPair> {
        let total = neg + pos;
        if !(neg >= 0.0 && pos >= 0.0 && total > 0.0 && total.is_finite()) {
            return Err(Error::invalid(format!("cannot normalize class masses ({neg}, {pos})")));
        }
        Ok(PosteriorPair {
            p_neg: neg / total,
            p_pos: pos / total,
        })
    }

    pub fn uniform() -> PosteriorPair {
        PosteriorPair { p_neg: 0.5, p_pos: 0.5 }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.p_neg)
            && (0.0..=1.0).contains(&self.p_pos)
            && (self.p_neg + self.p_pos - 1.0).abs() <= 1e-9
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Verifies row/label agreement and that both classes occur.
pub(crate) fn check_training_set(x: &FeatureMatrix, y: &[Label]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let pos = y.iter().filter(|&&l| l == Label::Relevant).count();
    if pos == 0 {
        return Err(Error::SingleClass("NotRelevant"));
    }
    if pos == y.len() {
        return Err(Error::SingleClass("Relevant"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    NaiveBayes(NbModel),
    Logistic(LrModel),
    Svm(SvmModel),
}

impl Classifier {
    pub fn kind(&self) -> &'static str {
        match self {
            Classifier::NaiveBayes(_) => "nb",
            Classifier::Logistic(_) => "lr",
            Classifier::Svm(_) => "svm",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Classifier::NaiveBayes(m) => m.dim(),
            Classifier::Logistic(m) => m.weights.len(),
            Classifier::Svm(m) => m.weights.len(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<PosteriorPair> {
        match self {
            Classifier::NaiveBayes(m) => nb_predict(m, x),
            Classifier::Logistic(m) => lr_predict(m, x),
            Classifier::Svm(m) => svm_predict(m, x),
        }
    }
}

/// A classifier plus the optional feature standardization applied before it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub classifier: Classifier,
    pub scaler: Option<Standardizer>,
}

impl TrainedModel {
    pub fn new(classifier: Classifier) -> TrainedModel {
        TrainedModel {
            classifier,
            scaler: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.classifier.dim()
    }

    pub fn predict(&self, x: &[f64]) -> Result<PosteriorPair> {
        match &self.scaler {
            Some(s) => self.classifier.predict(&s.transform(x)?),
            None => self.classifier.predict(x),
        }
    }
}
