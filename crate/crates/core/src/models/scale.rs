use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

use super::check_dim;

/// Per-dimension z-scoring with statistics from the training rows.
/// Constant dimensions get unit scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &FeatureMatrix) -> Result<Standardizer> {
        if x.is_empty() {
            return Err(Error::invalid("cannot standardize an empty matrix"));
        }
        let n = x.len() as f64;
        let mut mean = vec![0.0; x.dim()];
        for row in x.rows() {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v / n);
        }
        let mut var = vec![0.0; x.dim()];
        for row in x.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let std = var.into_iter().map(|v| if v > 0.0 { v.sqrt() } else { 1.0 }).collect();
        Ok(Standardizer { mean, std })
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.mean.len(), x.len())?;
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn transform_matrix(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let rows = x.rows().iter().map(|r| self.transform(r)).collect::<Result<Vec<_>>>()?;
        FeatureMatrix::new(x.ids().to_vec(), rows, x.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_unit_variance() {
        let x = FeatureMatrix::from_rows(vec![vec![1.0, 5.0], vec![3.0, 5.0], vec![5.0, 5.0]]).unwrap();
        let s = Standardizer::fit(&x).unwrap();
        let t = s.transform_matrix(&x).unwrap();
        let col: Vec<f64> = t.rows().iter().map(|r| r[0]).collect();
        assert!(col.iter().sum::<f64>().abs() < 1e-12);
        assert!((col.iter().map(|v| v * v).sum::<f64>() / 3.0 - 1.0).abs() < 1e-12);
        assert!(t.rows().iter().all(|r| r[1] == 0.0));
    }
}
