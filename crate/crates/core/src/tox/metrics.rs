use serde::{Deserialize, Serialize};

pub const THRESHOLD: f64 = 0.5;
/// Slack on the threshold so that sums like `0.5 * 0.8 + 0.5 * 0.2` count
/// as an exact tie despite rounding.
pub const TIE_EPS: f64 = 1e-12;

/// Binary call: toxic iff `p >= 0.5` (ties are toxic).
pub fn call(p: f64) -> bool {
    p >= THRESHOLD - TIE_EPS
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_probabilities(p: &[f64], y: &[bool]) -> Confusion {
        let mut c = Confusion::default();
        for (&pi, &yi) in p.iter().zip(y) {
            c.add(call(pi), yi);
        }
        c
    }

    pub fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn merge(&self, o: &Confusion) -> Confusion {
        Confusion {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }

    pub fn report(&self) -> MetricReport {
        compute_metrics(self.tp, self.fp, self.tn, self.fn_)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub specificity: f64,
    pub f1: f64,
    pub mcc: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Standard binary metrics; undefined ratios (and MCC with a zero
/// denominator factor) are reported as 0.
pub fn compute_metrics(tp: usize, fp: usize, tn: usize, fn_: usize) -> MetricReport {
    let recall = ratio(tp, tp + fn_);
    let precision = ratio(tp, tp + fp);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let (t, f, n, m) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
    let denom = (t + f) * (t + m) * (n + f) * (n + m);
    let mcc = if denom == 0.0 {
        0.0
    } else {
        (t * n - f * m) / denom.sqrt()
    };
    MetricReport {
        tp,
        fp,
        tn,
        fn_,
        accuracy: ratio(tp + tn, tp + fp + tn + fn_),
        recall,
        precision,
        specificity: ratio(tn, tn + fp),
        f1,
        mcc,
    }
}

/// Mean squared error of probabilities against 0/1 labels.
pub fn brier(p: &[f64], y: &[bool]) -> f64 {
    p.iter()
        .zip(y)
        .map(|(&pi, &yi)| (pi - if yi { 1.0 } else { 0.0 }).powi(2))
        .sum::<f64>()
        / p.len().max(1) as f64
}

impl MetricReport {
    pub fn to_tsv(&self) -> String {
        format!(
            "tp\tfp\ttn\tfn\taccuracy\trecall\tprecision\tspecificity\tf1\tmcc\n{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            self.tp,
            self.fp,
            self.tn,
            self.fn_,
            self.accuracy,
            self.recall,
            self.precision,
            self.specificity,
            self.f1,
            self.mcc
        )
    }
}
