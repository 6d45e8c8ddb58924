use rayon::prelude::*;

use super::features::Standardized;
use crate::error::{Error, Result};
use crate::kpi::SliceType;

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Majority vote among the `k` nearest training rows. Ties go to the class
/// with the smaller summed neighbour distance, then to the lower code.
/// Neighbours at equal distance are ranked by training index.
pub fn knn_predict(
    train: &Standardized,
    labels: &[SliceType],
    test: &Standardized,
    k: usize,
) -> Result<Vec<SliceType>> {
    if k == 0 {
        return Err(Error::Usage("k must be >= 1".into()));
    }
    if train.rows() == 0 {
        return Err(Error::Data("k-NN needs a non-empty training set".into()));
    }
    if labels.len() != train.rows() || train.cols() != test.cols() {
        return Err(Error::Data("k-NN inputs have inconsistent shapes".into()));
    }
    let k = k.min(train.rows());
    Ok((0..test.rows())
        .into_par_iter()
        .map(|i| {
            let q = test.row(i);
            let mut d: Vec<(f64, usize)> = (0..train.rows()).map(|j| (euclidean(q, train.row(j)), j)).collect();
            let by_rank = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < d.len() {
                d.select_nth_unstable_by(k - 1, by_rank);
            }
            let mut votes = [0usize; 3];
            let mut dist = [0f64; 3];
            let mut near = d[..k].to_vec();
            // Fixed summation order keeps tie-breaking independent of the
            // selection algorithm's internal ordering.
            near.sort_by(by_rank);
            for &(dj, j) in &near {
                votes[labels[j].index()] += 1;
                dist[labels[j].index()] += dj;
            }
            SliceType::ALL
                .into_iter()
                .filter(|s| votes[s.index()] > 0)
                .min_by(|a, b| {
                    votes[b.index()]
                        .cmp(&votes[a.index()])
                        .then(dist[a.index()].total_cmp(&dist[b.index()]))
                        .then(a.code().cmp(&b.code()))
                })
                .expect("k >= 1 gives at least one vote")
        })
        .collect())
}
