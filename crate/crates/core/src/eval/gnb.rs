use super::features::Standardized;
use crate::error::{Error, Result};
use crate::kpi::SliceType;

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianNb {
    log_prior: [f64; 3],
    mean: [Vec<f64>; 3],
    var: [Vec<f64>; 3],
}

impl GaussianNb {
    pub fn fit(x: &Standardized, y: &[SliceType]) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::Data("feature and label counts differ".into()));
        }
        let d = x.cols();
        let mut model = GaussianNb {
            log_prior: [0.0; 3],
            mean: std::array::from_fn(|_| vec![0.0; d]),
            var: std::array::from_fn(|_| vec![0.0; d]),
        };
        for s in SliceType::ALL {
            let rows: Vec<&[f64]> = (0..x.rows()).filter(|&i| y[i] == s).map(|i| x.row(i)).collect();
            if rows.is_empty() {
                return Err(Error::Data(format!("naive Bayes: no training samples for {s}")));
            }
            let n = rows.len() as f64;
            let c = s.index();
            for j in 0..d {
                let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                let v = rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n;
                model.mean[c][j] = m;
                model.var[c][j] = v.max(VARIANCE_FLOOR);
            }
            model.log_prior[c] = (n / y.len() as f64).ln();
        }
        Ok(model)
    }

    /// Joint log density `log p(y) + sum_j log N(x_j; mu, var)` per class.
    pub fn scores(&self, row: &[f64]) -> [f64; 3] {
        std::array::from_fn(|c| {
            self.log_prior[c]
                + row
                    .iter()
                    .zip(&self.mean[c])
                    .zip(&self.var[c])
                    .map(|((x, m), v)| -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / v))
                    .sum::<f64>()
        })
    }

    pub fn predict(&self, x: &Standardized) -> Vec<SliceType> {
        (0..x.rows())
            .map(|i| {
                let s = self.scores(x.row(i));
                // First maximum wins, so ties resolve to the lower code.
                let best = (0..3).fold(0, |b, c| if s[c] > s[b] { c } else { b });
                SliceType::ALL[best]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::features::{FeatureMatrix, Standardizer};
    use SliceType::{Embb, Miot, Urllc};

    fn unscaled(rows: &[Vec<f64>]) -> Standardized {
        let cols = rows[0].len();
        Standardizer { mean: vec![0.0; cols], std: vec![1.0; cols] }
            .transform(&FeatureMatrix::from_rows(rows))
            .unwrap()
    }

    #[test]
    fn likelihood_dominates() {
        let rows: Vec<Vec<f64>> = [-1.0, 1.0, 9.0, 11.0, 20.0, 22.0].iter().map(|&v| vec![v]).collect();
        let y = [Embb, Embb, Urllc, Urllc, Miot, Miot];
        let m = GaussianNb::fit(&unscaled(&rows), &y).unwrap();
        assert_eq!(m.predict(&unscaled(&[vec![1.0]])), vec![Embb]);
    }

    #[test]
    fn zero_variance_is_floored() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.0], vec![2.0, 1.0], vec![3.0, 5.0], vec![3.0, 6.0]];
        let y = [Embb, Embb, Urllc, Urllc, Miot, Miot];
        let m = GaussianNb::fit(&unscaled(&rows), &y).unwrap();
        assert!(m.var.iter().all(|v| v[0] == VARIANCE_FLOOR));
        let s = m.scores(&[1.5, 0.5]);
        assert!(s.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn priors_break_equal_likelihoods_toward_majority() {
        // Identical class-conditionals; priors 0.2/0.1/0.7 alone decide.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        // Each class gets mirrored pairs, so every class has mean 0 and
        // variance 1 while the pair counts set the priors.
        for (s, k) in [(Embb, 2), (Urllc, 1), (Miot, 7)] {
            for _ in 0..k {
                rows.push(vec![-1.0]);
                rows.push(vec![1.0]);
                y.extend([s, s]);
            }
        }
        let m = GaussianNb::fit(&unscaled(&rows), &y).unwrap();
        let s = m.scores(&[0.3]);
        let lik: Vec<f64> = (0..3).map(|c| s[c] - m.log_prior[c]).collect();
        assert!((lik[0] - lik[1]).abs() < 1e-12 && (lik[1] - lik[2]).abs() < 1e-12);
        assert!((m.log_prior[2] - 0.7f64.ln()).abs() < 1e-12);
        assert_eq!(m.predict(&unscaled(&[vec![0.3]])), vec![Miot]);
    }

    #[test]
    fn missing_class_is_error() {
        let rows = vec![vec![0.0], vec![1.0]];
        assert!(GaussianNb::fit(&unscaled(&rows), &[Embb, Miot]).is_err());
    }
}
