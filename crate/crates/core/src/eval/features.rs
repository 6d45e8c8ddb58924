//! Feature matrices and the impute-then-standardize pipeline.

use crate::dataset::Dataset;
use crate::encoders::Method;
use crate::error::{Error, Result};
use crate::kpi::KPI_COUNT;

/// Dense row-major matrix. Missing raw values are `NaN` until imputed.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(cols: usize, data: Vec<f64>) -> Self {
        assert!(cols > 0 && data.len().is_multiple_of(cols), "data length must be a multiple of cols");
        FeatureMatrix { cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(1, Vec::len);
        Self::new(cols, rows.iter().flatten().copied().collect())
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn select(&self, idx: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix { cols: self.cols, data }
    }

    fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.cols).copied()
    }
}

/// Raw KPIs in physical units; missing entries become `NaN`.
pub fn raw_features(dataset: &Dataset) -> FeatureMatrix {
    let data = dataset
        .samples
        .iter()
        .flat_map(|s| s.kpis.values().map(|v| v.unwrap_or(f64::NAN)))
        .collect();
    FeatureMatrix::new(KPI_COUNT, data)
}

/// Flattened patches, `[y][x][c]` order.
pub fn image_features(dataset: &Dataset, method: Method) -> Result<FeatureMatrix> {
    if !dataset.methods().contains(&method) {
        return Err(Error::Usage(format!("method `{method}` is not in this dataset")));
    }
    let n = dataset.config.image_side;
    let mut data = Vec::with_capacity(dataset.len() * n * n * 3);
    for s in &dataset.samples {
        data.extend(s.images[&method].as_slice().iter().map(|&v| v as f64));
    }
    Ok(FeatureMatrix::new(n * n * 3, data))
}

/// Per-column median of the non-missing training values.
#[derive(Clone, Debug, PartialEq)]
pub struct MedianImputer {
    pub medians: Vec<f64>,
}

impl MedianImputer {
    pub fn fit(train: &FeatureMatrix) -> Self {
        let medians = (0..train.cols())
            .map(|j| {
                let mut v: Vec<f64> = train.column(j).filter(|x| !x.is_nan()).collect();
                if v.is_empty() {
                    return 0.0;
                }
                v.sort_by(f64::total_cmp);
                let m = v.len() / 2;
                if v.len() % 2 == 1 {
                    v[m]
                } else {
                    (v[m - 1] + v[m]) / 2.0
                }
            })
            .collect();
        MedianImputer { medians }
    }

    pub fn transform(&self, x: &FeatureMatrix) -> FeatureMatrix {
        let cols = x.cols();
        let data = x
            .as_slice()
            .iter()
            .enumerate()
            .map(|(k, &v)| if v.is_nan() { self.medians[k % cols] } else { v })
            .collect();
        FeatureMatrix::new(cols, data)
    }
}

/// Output of [`Standardizer::transform`]. Classifiers accept only this type,
/// so features cannot reach them unscaled or scaled twice.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardized(FeatureMatrix);

impl Standardized {
    pub fn matrix(&self) -> &FeatureMatrix {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }
}

/// Train-set mean and population standard deviation. Constant columns keep
/// unit scale so they map to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        if train.rows() == 0 {
            return Err(Error::Data("cannot standardize an empty training set".into()));
        }
        if train.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("features must be finite; impute missing values first".into()));
        }
        let n = train.rows() as f64;
        let mut mean = Vec::with_capacity(train.cols());
        let mut std = Vec::with_capacity(train.cols());
        for j in 0..train.cols() {
            let m = train.column(j).sum::<f64>() / n;
            let var = train.column(j).map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean.push(m);
            std.push(if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 });
        }
        Ok(Standardizer { mean, std })
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<Standardized> {
        if x.cols() != self.mean.len() {
            return Err(Error::Data(format!(
                "expected {} features, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("features must be finite; impute missing values first".into()));
        }
        let cols = x.cols();
        let data = x
            .as_slice()
            .iter()
            .enumerate()
            .map(|(k, &v)| (v - self.mean[k % cols]) / self.std[k % cols])
            .collect();
        Ok(Standardized(FeatureMatrix::new(cols, data)))
    }
}

/// Fits imputation and scaling on `train` rows only and applies both to
/// the train and test rows.
pub fn prepare(x: &FeatureMatrix, train: &[usize], test: &[usize]) -> Result<(Standardized, Standardized)> {
    let (xtr, xte) = (x.select(train), x.select(test));
    let imputer = MedianImputer::fit(&xtr);
    let (xtr, xte) = (imputer.transform(&xtr), imputer.transform(&xte));
    let scaler = Standardizer::fit(&xtr)?;
    Ok((scaler.transform(&xtr)?, scaler.transform(&xte)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_ignores_missing() {
        let x = FeatureMatrix::from_rows(&[vec![1.0, f64::NAN], vec![5.0, 2.0], vec![3.0, 4.0], vec![f64::NAN, f64::NAN]]);
        let imp = MedianImputer::fit(&x);
        assert_eq!(imp.medians, vec![3.0, 3.0]);
        let t = imp.transform(&x);
        assert_eq!(t.row(3), &[3.0, 3.0]);
        assert_eq!(t.row(0), &[1.0, 3.0]);
    }

    #[test]
    fn standardized_train_has_zero_mean_unit_std() {
        let x = FeatureMatrix::from_rows(&[vec![1.0, 7.0], vec![2.0, 7.0], vec![6.0, 7.0]]);
        let s = Standardizer::fit(&x).unwrap();
        let z = s.transform(&x).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = (0..3).map(|i| z.row(i)[j]).collect();
            let m = col.iter().sum::<f64>() / 3.0;
            assert!(m.abs() < 1e-12);
            if j == 0 {
                let v = col.iter().map(|c| c * c).sum::<f64>() / 3.0;
                assert!((v - 1.0).abs() < 1e-12);
            } else {
                assert!(col.iter().all(|&c| c == 0.0));
            }
        }
    }

    #[test]
    fn test_rows_use_train_statistics() {
        let x = FeatureMatrix::from_rows(&[vec![0.0], vec![2.0], vec![100.0]]);
        let (tr, te) = prepare(&x, &[0, 1], &[2]).unwrap();
        assert_eq!(tr.row(0), &[-1.0]);
        assert_eq!(te.row(0), &[99.0]);
    }

    #[test]
    fn scaling_is_applied_exactly_once() {
        let x = FeatureMatrix::from_rows(&[vec![0.0], vec![4.0], vec![10.0]]);
        let (_, te) = prepare(&x, &[0, 1], &[2]).unwrap();
        assert_eq!(te.row(0), &[(10.0 - 2.0) / 2.0]);
        // Scaling is not idempotent, so a second pass would be visible.
        let scaler = Standardizer::fit(&x.select(&[0, 1])).unwrap();
        let twice = scaler.transform(te.matrix()).unwrap();
        assert_ne!(twice.row(0), te.row(0));
    }

    #[test]
    fn nan_is_rejected_by_scaler() {
        let x = FeatureMatrix::from_rows(&[vec![f64::NAN], vec![1.0]]);
        assert!(Standardizer::fit(&x).is_err());
    }
}
