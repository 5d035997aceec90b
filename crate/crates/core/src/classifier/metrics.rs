use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }
}

/// Precision, recall and F1. A metric whose denominator is zero is 0 and
/// flagged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub precision_undefined: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub recall_undefined: bool,
}

impl Metrics {
    pub fn from_confusion(c: &Confusion) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { (0.0, true) } else { (num as f64 / den as f64, false) };
        let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
        let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
            precision_undefined,
            recall_undefined,
        }
    }

    /// Arithmetic mean of each metric; flags are set if any input was flagged.
    pub fn mean(all: &[Metrics]) -> Self {
        if all.is_empty() {
            return Self::default();
        }
        let n = all.len() as f64;
        Self {
            precision: all.iter().map(|m| m.precision).sum::<f64>() / n,
            recall: all.iter().map(|m| m.recall).sum::<f64>() / n,
            f1: all.iter().map(|m| m.f1).sum::<f64>() / n,
            precision_undefined: all.iter().any(|m| m.precision_undefined),
            recall_undefined: all.iter().any(|m| m.recall_undefined),
        }
    }
}
