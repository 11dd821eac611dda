//! Plain-text model files.
//!
//! ```text
//! #model=svm
//! bias=0.125
//! lambda=0.001
//! ...
//! weights<TAB>0.5 -1.25
//! ```
//!
//! Scalars are `key=value`; vectors are `name<TAB>values` in the feature-file
//! numeric syntax. Values are written in shortest round-trip form, so a
//! reloaded model predicts bit-identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{parse_values, write_values};

use super::{Classifier, LrModel, LrParams, NbModel, Standardizer, SvmModel, SvmParams, TrainedModel};

struct Writer {
    scalars: BTreeMap<&'static str, String>,
    vectors: Vec<(&'static str, Vec<f64>)>,
}

impl Writer {
    fn scalar(&mut self, key: &'static str, value: impl std::fmt::Display) {
        self.scalars.insert(key, value.to_string());
    }

    fn vector(&mut self, key: &'static str, values: &[f64]) {
        self.vectors.push((key, values.to_vec()));
    }
}

pub fn model_to_text(model: &TrainedModel) -> String {
    let mut w = Writer {
        scalars: BTreeMap::new(),
        vectors: Vec::new(),
    };
    w.scalar("dim", model.dim());
    match &model.classifier {
        Classifier::NaiveBayes(m) => {
            w.scalar("alpha", m.alpha);
            w.scalar("log_prior_neg", m.log_prior[0]);
            w.scalar("log_prior_pos", m.log_prior[1]);
            w.vector("log_likelihood_neg", &m.log_likelihood[0]);
            w.vector("log_likelihood_pos", &m.log_likelihood[1]);
        }
        Classifier::Logistic(m) => {
            w.scalar("learning_rate", m.params.learning_rate);
            w.scalar("epochs", m.params.epochs);
            w.scalar("l2", m.params.l2);
            w.scalar("seed", m.params.seed);
            w.scalar("bias", m.bias);
            w.vector("weights", &m.weights);
        }
        Classifier::Svm(m) => {
            w.scalar("lambda", m.params.lambda);
            w.scalar("epochs", m.params.epochs);
            w.scalar("seed", m.params.seed);
            w.scalar("bias", m.bias);
            w.scalar("platt_a", m.platt_a);
            w.scalar("platt_b", m.platt_b);
            w.vector("weights", &m.weights);
        }
    }
    if let Some(s) = &model.scaler {
        w.vector("scaler_mean", &s.mean);
        w.vector("scaler_std", &s.std);
    }

    let mut out = format!("#model={}\n", model.classifier.kind());
    for (k, v) in &w.scalars {
        writeln!(out, "{k}={v}").expect("writing to a String cannot fail");
    }
    for (k, v) in &w.vectors {
        out.push_str(k);
        out.push('\t');
        write_values(&mut out, v);
        out.push('\n');
    }
    out
}

struct Fields {
    scalars: BTreeMap<String, String>,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl Fields {
    fn scalar<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .scalars
            .get(key)
            .ok_or_else(|| Error::Format(format!("model file lacks {key}")))?;
        raw.parse()
            .map_err(|_| Error::Format(format!("bad value for {key}: {raw:?}")))
    }

    fn vector(&self, key: &str, dim: usize) -> Result<Vec<f64>> {
        let v = self
            .vectors
            .get(key)
            .ok_or_else(|| Error::Format(format!("model file lacks {key}")))?;
        if v.len() != dim {
            return Err(Error::Dimension {
                id: key.to_owned(),
                expected: dim,
                found: v.len(),
            });
        }
        Ok(v.clone())
    }
}

pub fn parse_model(content: &str) -> Result<TrainedModel> {
    let mut lines = content.lines().enumerate();
    let kind = lines
        .next()
        .and_then(|(_, l)| l.trim_end().strip_prefix("#model="))
        .ok_or_else(|| Error::Format("model file must start with #model=<kind>".into()))?
        .to_owned();
    let mut fields = Fields {
        scalars: BTreeMap::new(),
        vectors: BTreeMap::new(),
    };
    for (idx, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((name, values)) = line.split_once('\t') {
            let v = parse_values(values).map_err(|message| Error::Parse { line: idx + 1, message })?;
            fields.vectors.insert(name.to_owned(), v);
        } else if let Some((k, v)) = line.split_once('=') {
            fields.scalars.insert(k.trim().to_owned(), v.trim().to_owned());
        } else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("unrecognized model line {line:?}"),
            });
        }
    }

    let dim: usize = fields.scalar("dim")?;
    let classifier = match kind.as_str() {
        "nb" => Classifier::NaiveBayes(NbModel {
            log_prior: [fields.scalar("log_prior_neg")?, fields.scalar("log_prior_pos")?],
            log_likelihood: [
                fields.vector("log_likelihood_neg", dim)?,
                fields.vector("log_likelihood_pos", dim)?,
            ],
            alpha: fields.scalar("alpha")?,
        }),
        "lr" => Classifier::Logistic(LrModel {
            weights: fields.vector("weights", dim)?,
            bias: fields.scalar("bias")?,
            params: LrParams {
                learning_rate: fields.scalar("learning_rate")?,
                epochs: fields.scalar("epochs")?,
                l2: fields.scalar("l2")?,
                seed: fields.scalar("seed")?,
            },
        }),
        "svm" => Classifier::Svm(SvmModel {
            weights: fields.vector("weights", dim)?,
            bias: fields.scalar("bias")?,
            params: SvmParams {
                lambda: fields.scalar("lambda")?,
                epochs: fields.scalar("epochs")?,
                seed: fields.scalar("seed")?,
            },
            platt_a: fields.scalar("platt_a")?,
            platt_b: fields.scalar("platt_b")?,
        }),
        other => return Err(Error::Format(format!("unknown model kind {other:?}"))),
    };
    let scaler = match (
        fields.vectors.contains_key("scaler_mean"),
        fields.vectors.contains_key("scaler_std"),
    ) {
        (false, false) => None,
        _ => Some(Standardizer {
            mean: fields.vector("scaler_mean", dim)?,
            std: fields.vector("scaler_std", dim)?,
        }),
    };
    Ok(TrainedModel { classifier, scaler })
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&content)
}
