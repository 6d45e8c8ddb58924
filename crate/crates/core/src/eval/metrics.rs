use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kpi::SliceType;

/// Classification metrics over the three slice types, indexed by code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub f1: [f64; 3],
    pub macro_f1: f64,
    /// `confusion[truth][predicted]`.
    pub confusion: [[usize; 3]; 3],
    /// Classes with no test samples; their scores are reported as 0.
    pub empty_classes: Vec<SliceType>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_confusion(confusion: [[usize; 3]; 3]) -> Self {
        let total: usize = confusion.iter().flatten().sum();
        let trace: usize = (0..3).map(|k| confusion[k][k]).sum();
        let support: [usize; 3] = std::array::from_fn(|k| confusion[k].iter().sum());
        let predicted: [usize; 3] = std::array::from_fn(|k| (0..3).map(|t| confusion[t][k]).sum());
        let precision = std::array::from_fn(|k| ratio(confusion[k][k], predicted[k]));
        let recall = std::array::from_fn(|k| ratio(confusion[k][k], support[k]));
        let f1: [f64; 3] = std::array::from_fn(|k| {
            let (p, r): (f64, f64) = (precision[k], recall[k]);
            if p + r == 0.0 {
                0.0
            } else {
                2.0 * p * r / (p + r)
            }
        });
        Metrics {
            accuracy: ratio(trace, total),
            precision,
            recall,
            macro_f1: f1.iter().sum::<f64>() / 3.0,
            f1,
            confusion,
            empty_classes: SliceType::ALL.into_iter().filter(|s| support[s.index()] == 0).collect(),
        }
    }

    pub fn f1_of(&self, s: SliceType) -> f64 {
        self.f1[s.index()]
    }

    pub fn support(&self, s: SliceType) -> usize {
        self.confusion[s.index()].iter().sum()
    }
}

pub fn evaluate(predicted: &[SliceType], truth: &[SliceType]) -> Result<Metrics> {
    if predicted.len() != truth.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    let mut confusion = [[0usize; 3]; 3];
    for (p, t) in predicted.iter().zip(truth) {
        confusion[t.index()][p.index()] += 1;
    }
    Ok(Metrics::from_confusion(confusion))
}
