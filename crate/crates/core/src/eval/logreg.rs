use serde::{Deserialize, Serialize};

use super::features::{FeatureMatrix, Standardized};
use crate::error::{Error, Result};
use crate::kpi::SliceType;

const K: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            epochs: 300,
            learning_rate: 0.5,
        }
    }
}

/// Multinomial logistic regression. Parameters are laid out per class as
/// `d` weights followed by a bias.
#[derive(Clone, Debug, PartialEq)]
pub struct LogReg {
    d: usize,
    params: Vec<f64>,
}

fn logits(params: &[f64], row: &[f64]) -> [f64; K] {
    let d = row.len();
    std::array::from_fn(|k| {
        let w = &params[k * (d + 1)..(k + 1) * (d + 1)];
        w[d] + w[..d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>()
    })
}

fn softmax(z: [f64; K]) -> [f64; K] {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = z.map(|v| (v - m).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

/// Mean cross-entropy and its gradient with respect to `params`.
pub fn loss_and_gradient(params: &[f64], x: &FeatureMatrix, y: &[SliceType]) -> (f64, Vec<f64>) {
    let d = x.cols();
    assert_eq!(params.len(), K * (d + 1));
    assert_eq!(y.len(), x.rows());
    let n = x.rows() as f64;
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for (i, &label) in y.iter().enumerate() {
        let row = x.row(i);
        let z = logits(params, row);
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        let t = label.index();
        loss += lse - z[t];
        let p = softmax(z);
        for k in 0..K {
            let r = p[k] - if k == t { 1.0 } else { 0.0 };
            let g = &mut grad[k * (d + 1)..(k + 1) * (d + 1)];
            for (gj, xj) in g[..d].iter_mut().zip(row) {
                *gj += r * xj;
            }
            g[d] += r;
        }
    }
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad)
}

impl LogReg {
    pub fn zeros(d: usize) -> Self {
        LogReg {
            d,
            params: vec![0.0; K * (d + 1)],
        }
    }

    /// Full-batch gradient descent from zero weights.
    pub fn fit(x: &Standardized, y: &[SliceType], hp: &LogRegParams) -> Result<Self> {
        if y.len() != x.rows() || x.rows() == 0 {
            return Err(Error::Data("logistic regression needs matching, non-empty inputs".into()));
        }
        let mut model = Self::zeros(x.cols());
        for epoch in 0..hp.epochs {
            let (loss, grad) = loss_and_gradient(&model.params, x.matrix(), y);
            if !loss.is_finite() {
                return Err(Error::Divergence(format!(
                    "loss became {loss} at epoch {epoch}; try a learning rate below {}",
                    hp.learning_rate
                )));
            }
            for (w, g) in model.params.iter_mut().zip(&grad) {
                *w -= hp.learning_rate * g;
            }
        }
        Ok(model)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn predict(&self, x: &Standardized) -> Vec<SliceType> {
        assert_eq!(x.cols(), self.d);
        (0..x.rows())
            .map(|i| {
                let z = logits(&self.params, x.row(i));
                let best = (0..K).fold(0, |b, k| if z[k] > z[b] { k } else { b });
                SliceType::ALL[best]
            })
            .collect()
    }
}
