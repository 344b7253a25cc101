//! Binary classification metrics: ACC, SEN, SPE and ROC AUC.

/// Confusion counts and the rates derived from them. A rate whose
/// denominator is zero is `None` rather than 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    pub acc: f64,
    pub sen: Option<f64>,
    pub spe: Option<f64>,
    pub auc: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl Metrics {
    /// `scores[i]` ranks row `i` toward `positive`; `predictions` are hard
    /// class decisions. Only rows in `mask` are counted.
    pub fn compute(
        labels: &[usize],
        predictions: &[usize],
        scores: &[f64],
        mask: &[usize],
        positive: usize,
    ) -> Self {
        let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
        for &i in mask {
            match (labels[i] == positive, predictions[i] == positive) {
                (true, true) => tp += 1,
                (false, false) => tn += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
            }
        }
        let masked_scores: Vec<f64> = mask.iter().map(|&i| scores[i]).collect();
        let positives: Vec<bool> = mask.iter().map(|&i| labels[i] == positive).collect();
        Self {
            tp,
            tn,
            fp,
            fn_,
            acc: ratio(tp + tn, mask.len()).unwrap_or(0.0),
            sen: ratio(tp, tp + fn_),
            spe: ratio(tn, tn + fp),
            auc: roc_auc(&masked_scores, &positives),
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Area under the ROC curve by trapezoidal integration over score
/// thresholds. Tied scores form a single ROC step, which gives them half
/// credit. `None` unless both classes are present.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut prev_tpr, mut prev_fpr) = (0.0, 0.0);
    let mut area = 0.0;
    let mut idx = 0;
    while idx < order.len() {
        let threshold = scores[order[idx]];
        while idx < order.len() && scores[order[idx]] == threshold {
            if positive[order[idx]] {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        let tpr = tp as f64 / n_pos as f64;
        let fpr = fp as f64 / n_neg as f64;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    Some(area)
}

/// Mean and population standard deviation of the defined values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Option<Self> {
        let vals: Vec<f64> = values.into_iter().flatten().collect();
        if vals.is_empty() {
            return None;
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
        })
    }
}

/// Per-metric aggregates over folds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub acc: Aggregate,
    pub sen: Option<Aggregate>,
    pub spe: Option<Aggregate>,
    pub auc: Option<Aggregate>,
}

impl Summary {
    pub fn of(metrics: &[Metrics]) -> Option<Self> {
        Some(Self {
            acc: Aggregate::of(metrics.iter().map(|m| Some(m.acc)))?,
            sen: Aggregate::of(metrics.iter().map(|m| m.sen)),
            spe: Aggregate::of(metrics.iter().map(|m| m.spe)),
            auc: Aggregate::of(metrics.iter().map(|m| m.auc)),
        })
    }
}
