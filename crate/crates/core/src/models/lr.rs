use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

use super::{check_dim, check_training_set, dot, sigmoid, softplus, PosteriorPair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Recorded for provenance; full-batch descent from zero draws no randomness.
    pub seed: u64,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub params: LrParams,
}

impl LrModel {
    pub fn zeros(dim: usize, params: LrParams) -> LrModel {
        LrModel {
            weights: vec![0.0; dim],
            bias: 0.0,
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrGradient {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub loss: f64,
}

/// Mean cross-entropy plus `(l2 / 2) * |w|^2`, with its exact gradient.
pub fn lr_gradient(model: &LrModel, x: &FeatureMatrix, y: &[Label]) -> Result<LrGradient> {
    if x.is_empty() {
        return Err(Error::invalid("logistic gradient needs at least one row"));
    }
    check_dim(model.weights.len(), x.dim())?;
    if x.len() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let n = x.len() as f64;
    let mut grad_w = vec![0.0; x.dim()];
    let mut grad_b = 0.0;
    let mut loss = 0.0;
    for (row, label) in x.rows().iter().zip(y) {
        let target = label.as_bit() as f64;
        let z = dot(&model.weights, row) + model.bias;
        loss += softplus(z) - target * z;
        let residual = sigmoid(z) - target;
        for (g, xi) in grad_w.iter_mut().zip(row) {
            *g += residual * xi;
        }
        grad_b += residual;
    }
    let l2 = model.params.l2;
    for (g, w) in grad_w.iter_mut().zip(&model.weights) {
        *g = *g / n + l2 * w;
    }
    let penalty = 0.5 * l2 * dot(&model.weights, &model.weights);
    Ok(LrGradient {
        weights: grad_w,
        bias: grad_b / n,
        loss: loss / n + penalty,
    })
}

/// Full-batch gradient descent from zero for `params.epochs` steps.
pub fn lr_train(x: &FeatureMatrix, y: &[Label], params: LrParams) -> Result<LrModel> {
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(Error::invalid(format!(
            "learning_rate must be positive, got {}",
            params.learning_rate
        )));
    }
    if !(params.l2 >= 0.0) {
        return Err(Error::invalid(format!("l2 must be nonnegative, got {}", params.l2)));
    }
    check_training_set(x, y)?;
    let mut model = LrModel::zeros(x.dim(), params);
    for _ in 0..params.epochs {
        let g = lr_gradient(&model, x, y)?;
        for (w, gw) in model.weights.iter_mut().zip(&g.weights) {
            *w -= params.learning_rate * gw;
        }
        model.bias -= params.learning_rate * g.bias;
    }
    Ok(model)
}

pub fn lr_predict(model: &LrModel, x: &[f64]) -> Result<PosteriorPair> {
    check_dim(model.weights.len(), x.len())?;
    let p = sigmoid(dot(&model.weights, x) + model.bias);
    Ok(PosteriorPair {
        p_neg: 1.0 - p,
        p_pos: p,
    })
}
