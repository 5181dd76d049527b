use std::ops::AddAssign;

use crate::error::{Error, Result};

/// Binary classification scores with their confusion counts. Undefined
/// precision or recall (zero denominator) is reported as 0 and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let ratio = |a: usize, b: usize| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
        let precision = ratio(tp, fp);
        let recall = ratio(tp, fn_);
        let f_score = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Metrics {
            precision,
            recall,
            f_score,
            tp,
            fp,
            fn_,
            tn,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision_undefined(&self) -> bool {
        self.tp + self.fp == 0
    }

    pub fn recall_undefined(&self) -> bool {
        self.tp + self.fn_ == 0
    }

    /// `-`, or a comma-separated list of `P-undefined` / `R-undefined`.
    pub fn flags(&self) -> String {
        let mut f = Vec::new();
        if self.precision_undefined() {
            f.push("P-undefined");
        }
        if self.recall_undefined() {
            f.push("R-undefined");
        }
        if f.is_empty() {
            "-".into()
        } else {
            f.join(",")
        }
    }
}

impl AddAssign for Metrics {
    /// Pools confusion counts and recomputes the scores.
    fn add_assign(&mut self, o: Metrics) {
        *self = Metrics::from_counts(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn);
    }
}

pub fn compute_metrics<L: PartialEq + Copy>(predictions: &[L], golds: &[L], positive: L) -> Result<Metrics> {
    if predictions.len() != golds.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            golds.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::invalid("no predictions to score"));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &g) in predictions.iter().zip(golds) {
        match (p == positive, g == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, fn_, tn))
}
