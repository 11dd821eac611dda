//! Confusion counts and positive-class precision/recall/F1.

use std::fmt;

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> EvalReport {
        EvalReport {
            tp,
            fp,
            fn_,
            tn,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            // equals 2PR/(P+R) whenever that is defined, and 0 when tp = 0
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// The same predictions scored with `NotRelevant` as the positive class.
    pub fn swapped(&self) -> EvalReport {
        EvalReport::from_counts(self.tn, self.fn_, self.fp, self.tp)
    }

    /// Unweighted mean of both classes' F1.
    pub fn macro_f1(&self) -> f64 {
        (self.f1 + self.swapped().f1) / 2.0
    }

    /// One-line `key=value` record.
    pub fn to_kv(&self, run: &str, include_macro: bool) -> String {
        let mut line = format!(
            "run={run} n={} tp={} fp={} fn={} tn={} precision={} recall={} f1={}",
            self.total(),
            self.tp,
            self.fp,
            self.fn_,
            self.tn,
            self.precision,
            self.recall,
            self.f1
        );
        if include_macro {
            line.push_str(&format!(" macro_f1={}", self.macro_f1()));
        }
        line
    }

    /// Aligned plain-text table.
    pub fn to_table(&self, run: &str, include_macro: bool) -> String {
        let mut rows = vec![
            ("run", run.to_owned()),
            ("records", self.total().to_string()),
            ("tp / fp", format!("{} / {}", self.tp, self.fp)),
            ("fn / tn", format!("{} / {}", self.fn_, self.tn)),
            ("precision", format!("{:.4}", self.precision)),
            ("recall", format!("{:.4}", self.recall)),
            ("f1", format!("{:.4}", self.f1)),
        ];
        if include_macro {
            rows.push(("macro f1", format!("{:.4}", self.macro_f1())));
        }
        rows.iter().map(|(k, v)| format!("{k:<10} {v}\n")).collect()
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "precision={:.4} recall={:.4} f1={:.4}",
            self.precision, self.recall, self.f1
        )
    }
}

pub fn score_binary(labels: &[Label], preds: &[Label]) -> Result<EvalReport> {
    if labels.is_empty() {
        return Err(Error::invalid("cannot score zero predictions"));
    }
    if labels.len() != preds.len() {
        return Err(Error::invalid(format!(
            "{} labels but {} predictions",
            labels.len(),
            preds.len()
        )));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&l, &p) in labels.iter().zip(preds) {
        match (l, p) {
            (Label::Relevant, Label::Relevant) => tp += 1,
            (Label::NotRelevant, Label::Relevant) => fp += 1,
            (Label::Relevant, Label::NotRelevant) => fn_ += 1,
            (Label::NotRelevant, Label::NotRelevant) => tn += 1,
        }
    }
    Ok(EvalReport::from_counts(tp, fp, fn_, tn))
}
