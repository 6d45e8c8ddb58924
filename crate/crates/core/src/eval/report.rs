use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{image_features, prepare, raw_features};
use super::gnb::GaussianNb;
use super::knn::knn_predict;
use super::logreg::{LogReg, LogRegParams};
use super::metrics::{evaluate, Metrics};
use super::split::{stratified_split, SplitSpec};
use crate::dataset::Dataset;
use crate::encoders::Method;
use crate::error::{Error, Result};
use crate::kpi::SliceType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeatureSet {
    Raw,
    Image(Method),
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSet::Raw => f.write_str("raw"),
            FeatureSet::Image(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "raw" {
            return Ok(FeatureSet::Raw);
        }
        s.parse().map(FeatureSet::Image).map_err(|_| {
            Error::Usage(format!(
                "unknown method `{s}`; valid methods: raw, physical, perlin, wallpaper, fractal"
            ))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classifier {
    #[serde(rename = "k-NN")]
    Knn,
    #[serde(rename = "Naive Bayes")]
    NaiveBayes,
    #[serde(rename = "Logistic Reg.")]
    LogisticRegression,
}

impl Classifier {
    pub const ALL: [Classifier; 3] = [Classifier::Knn, Classifier::NaiveBayes, Classifier::LogisticRegression];

    pub fn name(self) -> &'static str {
        match self {
            Classifier::Knn => "k-NN",
            Classifier::NaiveBayes => "Naive Bayes",
            Classifier::LogisticRegression => "Logistic Reg.",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub k: usize,
    pub logreg: LogRegParams,
    pub split: SplitSpec,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            k: 5,
            logreg: LogRegParams::default(),
            split: SplitSpec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerSlice<T> {
    pub embb: T,
    pub urllc: T,
    pub miot: T,
}

impl<T: Copy> PerSlice<T> {
    fn from_array(a: [T; 3]) -> Self {
        PerSlice {
            embb: a[0],
            urllc: a[1],
            miot: a[2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub classifier: Classifier,
    pub accuracy: f64,
    pub precision: PerSlice<f64>,
    pub recall: PerSlice<f64>,
    pub f1: PerSlice<f64>,
    pub macro_f1: f64,
    pub confusion: [[usize; 3]; 3],
    pub empty_classes: Vec<SliceType>,
}

impl ClassifierResult {
    pub fn new(classifier: Classifier, m: &Metrics) -> Self {
        ClassifierResult {
            classifier,
            accuracy: m.accuracy,
            precision: PerSlice::from_array(m.precision),
            recall: PerSlice::from_array(m.recall),
            f1: PerSlice::from_array(m.f1),
            macro_f1: m.macro_f1,
            confusion: m.confusion,
            empty_classes: m.empty_classes.clone(),
        }
    }

    pub fn metrics(&self) -> Metrics {
        Metrics::from_confusion(self.confusion)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureBlock {
    pub features: String,
    pub results: Vec<ClassifierResult>,
}

impl FeatureBlock {
    pub fn best_accuracy(&self) -> f64 {
        self.results.iter().map(|r| r.accuracy).fold(0.0, f64::max)
    }

    pub fn result(&self, c: Classifier) -> Option<&ClassifierResult> {
        self.results.iter().find(|r| r.classifier == c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub baseline: f64,
    pub best: f64,
    /// `None` when the baseline is zero.
    pub percent: Option<f64>,
}

impl Improvement {
    pub fn new(baseline: f64, best: f64) -> Self {
        Improvement {
            baseline,
            best,
            percent: (baseline != 0.0).then(|| (best - baseline) / baseline * 100.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImprovementReport {
    pub accuracy: Improvement,
    pub urllc_f1: Improvement,
    pub macro_f1: Improvement,
}

/// Relative change from the best raw-feature score to the best image score,
/// taken independently for each metric.
pub fn improvement_report(ml: &[Metrics], image: &[Metrics]) -> ImprovementReport {
    let best = |ms: &[Metrics], f: fn(&Metrics) -> f64| ms.iter().map(f).fold(0.0, f64::max);
    let pair = |f: fn(&Metrics) -> f64| Improvement::new(best(ml, f), best(image, f));
    ImprovementReport {
        accuracy: pair(|m| m.accuracy),
        urllc_f1: pair(|m| m.f1_of(SliceType::Urllc)),
        macro_f1: pair(|m| m.macro_f1),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub train_fraction: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub test_counts: PerSlice<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub split: SplitSummary,
    pub blocks: Vec<FeatureBlock>,
    /// Present when both raw and image blocks were evaluated.
    pub improvement: Option<ImprovementReport>,
}

impl Report {
    pub fn block(&self, features: FeatureSet) -> Option<&FeatureBlock> {
        let key = features.to_string();
        self.blocks.iter().find(|b| b.features == key)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.split.test_counts;
        let _ = writeln!(
            s,
            "Split: seed {}, train {}, test {} (eMBB {}, URLLC {}, mIoT {})",
            self.split.seed, self.split.train_size, self.split.test_size, c.embb, c.urllc, c.miot
        );
        for b in &self.blocks {
            let _ = writeln!(s, "\nFeatures: {}", b.features);
            let _ = writeln!(
                s,
                "{:<14} {:>8} {:>8} {:>8} {:>8} {:>8}",
                "Classifier", "Accuracy", "eMBB F1", "URLLC F1", "mIoT F1", "Macro F1"
            );
            for r in &b.results {
                let _ = writeln!(
                    s,
                    "{:<14} {:>8.4} {:>8.2} {:>8.2} {:>8.2} {:>8.4}",
                    r.classifier.name(),
                    r.accuracy,
                    r.f1.embb,
                    r.f1.urllc,
                    r.f1.miot,
                    r.macro_f1
                );
            }
        }
        if let Some(imp) = &self.improvement {
            let _ = writeln!(s, "\nImprovement (best image vs best raw)");
            let _ = writeln!(s, "{:<10} {:>9} {:>10} {:>10}", "Metric", "Raw best", "Image best", "Change");
            for (name, i) in [("Accuracy", imp.accuracy), ("URLLC F1", imp.urllc_f1), ("Macro F1", imp.macro_f1)] {
                let change = i.percent.map_or("undefined".to_string(), |p| format!("{p:+.2}%"));
                let _ = writeln!(s, "{name:<10} {:>9.4} {:>10.4} {change:>10}", i.baseline, i.best);
            }
        }
        s
    }
}

fn run_block(
    dataset: &Dataset,
    features: FeatureSet,
    train: &[usize],
    test: &[usize],
    params: &EvalParams,
) -> Result<FeatureBlock> {
    let x = match features {
        FeatureSet::Raw => raw_features(dataset),
        FeatureSet::Image(m) => image_features(dataset, m)?,
    };
    let labels = dataset.labels();
    let ytr: Vec<_> = train.iter().map(|&i| labels[i]).collect();
    let yte: Vec<_> = test.iter().map(|&i| labels[i]).collect();
    let (xtr, xte) = prepare(&x, train, test)?;
    let results = Classifier::ALL
        .into_iter()
        .map(|c| {
            let pred = match c {
                Classifier::Knn => knn_predict(&xtr, &ytr, &xte, params.k)?,
                Classifier::NaiveBayes => GaussianNb::fit(&xtr, &ytr)?.predict(&xte),
                Classifier::LogisticRegression => LogReg::fit(&xtr, &ytr, &params.logreg)?.predict(&xte),
            };
            Ok(ClassifierResult::new(c, &evaluate(&pred, &yte)?))
        })
        .collect::<Result<_>>()?;
    Ok(FeatureBlock {
        features: features.to_string(),
        results,
    })
}

/// Trains and scores every classifier on each feature set over one shared
/// stratified split.
pub fn run_evaluation(dataset: &Dataset, features: &[FeatureSet], params: &EvalParams) -> Result<Report> {
    if features.is_empty() {
        return Err(Error::Usage("no feature sets requested".into()));
    }
    let labels = dataset.labels();
    let split = stratified_split(&labels, &params.split)?;
    let blocks = features
        .par_iter()
        .map(|&f| run_block(dataset, f, &split.train, &split.test, params))
        .collect::<Result<Vec<_>>>()?;

    let collect = |raw: bool| -> Vec<Metrics> {
        features
            .iter()
            .zip(&blocks)
            .filter(|(f, _)| (**f == FeatureSet::Raw) == raw)
            .flat_map(|(_, b)| b.results.iter().map(ClassifierResult::metrics))
            .collect()
    };
    let (ml, image) = (collect(true), collect(false));
    let improvement = (!ml.is_empty() && !image.is_empty()).then(|| improvement_report(&ml, &image));

    let mut counts = [0; 3];
    for &i in &split.test {
        counts[labels[i].index()] += 1;
    }
    Ok(Report {
        split: SplitSummary {
            seed: params.split.seed,
            train_fraction: params.split.train_fraction,
            train_size: split.train.len(),
            test_size: split.test.len(),
            test_counts: PerSlice::from_array(counts),
        },
        blocks,
        improvement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics_with(urllc_hits: usize) -> Metrics {
        // 10 URLLC and 90 mIoT samples; mIoT always right.
        let mut c = [[0usize; 3]; 3];
        c[1][1] = urllc_hits;
        c[1][2] = 10 - urllc_hits;
        c[2][2] = 90;
        Metrics::from_confusion(c)
    }

    #[test]
    fn published_improvements() {
        let i = Improvement::new(0.8623, 0.9810);
        assert_eq!((i.percent.unwrap() * 100.0).round() / 100.0, 13.77);
        let i = Improvement::new(0.70, 1.00);
        assert_eq!((i.percent.unwrap() * 100.0).round() / 100.0, 42.86);
    }

    #[test]
    fn identical_metrics_give_zero() {
        let m = metrics_with(7);
        let r = improvement_report(std::slice::from_ref(&m), std::slice::from_ref(&m));
        assert_eq!(r.accuracy.percent, Some(0.0));
        assert_eq!(r.urllc_f1.percent, Some(0.0));
        assert_eq!(r.macro_f1.percent, Some(0.0));
    }

    #[test]
    fn zero_baseline_is_undefined() {
        let zero = metrics_with(0);
        let good = metrics_with(10);
        let r = improvement_report(&[zero], &[good]);
        assert_eq!(r.urllc_f1.percent, None);
        assert!(r.accuracy.percent.unwrap() > 0.0);
    }

    #[test]
    fn feature_set_parsing() {
        assert_eq!("raw".parse::<FeatureSet>().unwrap(), FeatureSet::Raw);
        assert_eq!("fractal".parse::<FeatureSet>().unwrap(), FeatureSet::Image(Method::Fractal));
        let err = "bogus".parse::<FeatureSet>().unwrap_err();
        assert!(err.to_string().contains("raw, physical, perlin, wallpaper, fractal"));
    }
}
