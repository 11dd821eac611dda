//! Sigmoid calibration `P(y=1 | m) = 1 / (1 + exp(a*m + b))`, fit by damped
//! Newton iterations with backtracking on smoothed targets.

use crate::corpus::Label;
use crate::error::{Error, Result};

const MAX_ITER: usize = 200;
const GRAD_TOL: f64 = 1e-8;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_RIDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlattFit {
    pub a: f64,
    pub b: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl PlattFit {
    pub fn probability(&self, margin: f64) -> f64 {
        super::sigmoid(-(self.a * margin + self.b))
    }
}

/// Cross-entropy of the target `t` against `1 / (1 + e^f)`.
fn point_loss(f: f64, t: f64) -> f64 {
    if f >= 0.0 {
        t * f + (-f).exp().ln_1p()
    } else {
        (t - 1.0) * f + f.exp().ln_1p()
    }
}

fn objective(margins: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    margins
        .iter()
        .zip(targets)
        .map(|(&m, &t)| point_loss(a * m + b, t))
        .sum()
}

pub fn platt_fit(margins: &[f64], labels: &[Label]) -> Result<PlattFit> {
    if margins.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} margins but {} labels",
            margins.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l == Label::Relevant).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass(if n_pos == 0 { "NotRelevant" } else { "Relevant" }));
    }
    if let Some(m) = margins.iter().find(|m| !m.is_finite()) {
        return Err(Error::invalid(format!("non-finite margin {m}")));
    }
    let hi = (n_pos as f64 + 1.0) / (n_pos as f64 + 2.0);
    let lo = 1.0 / (n_neg as f64 + 2.0);
    let targets: Vec<f64> = labels
        .iter()
        .map(|&l| if l == Label::Relevant { hi } else { lo })
        .collect();

    let mut a = 0.0;
    let mut b = ((n_neg as f64 + 1.0) / (n_pos as f64 + 1.0)).ln();
    let mut fval = objective(margins, &targets, a, b);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITER {
        let (mut h11, mut h22, mut h21) = (HESSIAN_RIDGE, HESSIAN_RIDGE, 0.0);
        let (mut g1, mut g2) = (0.0, 0.0);
        for (&m, &t) in margins.iter().zip(&targets) {
            let p = super::sigmoid(-(a * m + b));
            let d2 = p * (1.0 - p);
            h11 += m * m * d2;
            h22 += d2;
            h21 += m * d2;
            let d1 = t - p;
            g1 += m * d1;
            g2 += d1;
        }
        if g1.hypot(g2) < GRAD_TOL {
            converged = true;
            break;
        }
        iterations += 1;

        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let descent = g1 * da + g2 * db;

        let mut step = 1.0;
        loop {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(margins, &targets, na, nb);
            if nf < fval + 1e-4 * step * descent {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
            if step < MIN_STEP {
                break;
            }
        }
        if step < MIN_STEP {
            // no sufficient decrease left; a, b are as good as double precision allows
            break;
        }
    }
    Ok(PlattFit {
        a,
        b,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_fit_is_analytic() {
        let fit = platt_fit(&[-1.0, 1.0], &[Label::NotRelevant, Label::Relevant]).unwrap();
        assert!(fit.converged);
        assert!((fit.a + 2f64.ln()).abs() < 1e-6, "{fit:?}");
        assert!(fit.b.abs() < 1e-6, "{fit:?}");
        assert!((fit.probability(1.0) - 2.0 / 3.0).abs() < 1e-6);
        assert!((fit.probability(0.0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn constant_margins_give_smoothed_rate() {
        let labels = [
            Label::Relevant,
            Label::NotRelevant,
            Label::NotRelevant,
            Label::Relevant,
            Label::NotRelevant,
        ];
        let fit = platt_fit(&[0.0; 5], &labels).unwrap();
        let (hi, lo) = (3.0 / 4.0, 1.0 / 5.0);
        let mean_target = (2.0 * hi + 3.0 * lo) / 5.0;
        assert_eq!(fit.a, 0.0);
        for m in [-4.0, 0.0, 9.0] {
            assert!((fit.probability(m) - mean_target).abs() < 1e-9);
        }
    }

    #[test]
    fn margin_rescaling_rescales_slope() {
        let margins = [-2.0, -1.3, -0.2, 0.4, 0.9, 1.7, -0.6, 2.2];
        let labels = [0u8, 0, 1, 0, 1, 1, 0, 1].map(|b| Label::from_bit(b).unwrap());
        let base = platt_fit(&margins, &labels).unwrap();
        for c in [0.1, 3.0, 25.0] {
            let scaled: Vec<f64> = margins.iter().map(|m| m * c).collect();
            let fit = platt_fit(&scaled, &labels).unwrap();
            assert!((fit.a * c - base.a).abs() < 1e-6 * base.a.abs().max(1.0));
            for (m, s) in margins.iter().zip(&scaled) {
                assert!((fit.probability(*s) - base.probability(*m)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(
            platt_fit(&[0.1, 0.2], &[Label::Relevant; 2]),
            Err(Error::SingleClass(_))
        ));
    }
}
