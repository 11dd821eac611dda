use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

use super::platt::platt_fit;
use super::{check_dim, check_training_set, dot, sigmoid, PosteriorPair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-3,
            epochs: 200,
            seed: 0,
        }
    }
}

/// Linear SVM with sigmoid-calibrated outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub params: SvmParams,
    pub platt_a: f64,
    pub platt_b: f64,
}

impl SvmModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

/// Primal hinge-loss SGD: one pass per epoch over a seeded shuffle, step
/// `1 / (lambda * t)` at update `t`. The bias is not regularized.
/// Returns `(weights, bias)`.
pub fn svm_train_margins(x: &FeatureMatrix, y: &[Label], params: SvmParams) -> Result<(Vec<f64>, f64)> {
    if !(params.lambda > 0.0 && params.lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {}",
            params.lambda
        )));
    }
    check_training_set(x, y)?;
    let signs: Vec<f64> = y
        .iter()
        .map(|&l| if l == Label::Relevant { 1.0 } else { -1.0 })
        .collect();
    let mut w = vec![0.0; x.dim()];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (params.lambda * t as f64);
            let row = x.row(i);
            let violated = signs[i] * (dot(&w, row) + b) < 1.0;
            let shrink = 1.0 - eta * params.lambda;
            w.iter_mut().for_each(|wj| *wj *= shrink);
            if violated {
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += eta * signs[i] * xj;
                }
                b += eta * signs[i];
            }
        }
    }
    Ok((w, b))
}

/// Trains margins, then calibrates them with a sigmoid fit on the training set.
pub fn svm_train(x: &FeatureMatrix, y: &[Label], params: SvmParams) -> Result<SvmModel> {
    let (weights, bias) = svm_train_margins(x, y, params)?;
    let margins: Vec<f64> = x.rows().iter().map(|r| dot(&weights, r) + bias).collect();
    let fit = platt_fit(&margins, y)?;
    Ok(SvmModel {
        weights,
        bias,
        params,
        platt_a: fit.a,
        platt_b: fit.b,
    })
}

pub fn svm_predict(model: &SvmModel, x: &[f64]) -> Result<PosteriorPair> {
    check_dim(model.weights.len(), x.len())?;
    let p = sigmoid(-(model.platt_a * model.margin(x) + model.platt_b));
    Ok(PosteriorPair {
        p_neg: 1.0 - p,
        p_pos: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (FeatureMatrix, Vec<Label>) {
        let x =
            FeatureMatrix::from_rows(vec![vec![-1.0, -0.5], vec![-2.0, -1.0], vec![1.5, 1.0], vec![0.8, 2.0]]).unwrap();
        let y = [0u8, 0, 1, 1].map(|b| Label::from_bit(b).unwrap()).to_vec();
        (x, y)
    }

    #[test]
    fn zero_epochs_leave_zero_margin() {
        let (x, y) = toy();
        let (w, b) = svm_train_margins(
            &x,
            &y,
            SvmParams {
                epochs: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(w, [0.0, 0.0]);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn label_negation_negates_margins() {
        let (x, y) = toy();
        let flipped: Vec<Label> = y.iter().map(|l| l.flip()).collect();
        let p = SvmParams {
            epochs: 30,
            seed: 4,
            ..Default::default()
        };
        let (w1, b1) = svm_train_margins(&x, &y, p).unwrap();
        let (w2, b2) = svm_train_margins(&x, &flipped, p).unwrap();
        for row in x.rows() {
            assert_eq!(dot(&w1, row) + b1, -(dot(&w2, row) + b2));
        }
    }

    #[test]
    fn calibrated_predictions() {
        let (x, y) = toy();
        let m = svm_train(&x, &y, SvmParams::default()).unwrap();
        for (row, label) in x.rows().iter().zip(&y) {
            let p = svm_predict(&m, row).unwrap();
            assert!(p.is_valid());
            assert_eq!(p.p_pos > 0.5, *label == Label::Relevant);
        }
        assert!(svm_predict(&m, &[1.0]).is_err());
    }

    #[test]
    fn fixed_calibration_values() {
        let m = SvmModel {
            weights: vec![1.0],
            bias: 0.0,
            params: SvmParams::default(),
            platt_a: -2f64.ln(),
            platt_b: 0.0,
        };
        assert_eq!(svm_predict(&m, &[0.0]).unwrap().p_pos, 0.5);
        assert!((svm_predict(&m, &[1.0]).unwrap().p_pos - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_lambda() {
        let (x, y) = toy();
        assert!(svm_train(
            &x,
            &y,
            SvmParams {
                lambda: 0.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
