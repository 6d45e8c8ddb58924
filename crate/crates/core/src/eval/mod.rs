//! Classical baselines comparing raw-KPI features with flattened images.

mod features;
mod gnb;
mod knn;
mod logreg;
mod metrics;
mod report;
mod split;

pub use features::{image_features, prepare, raw_features, FeatureMatrix, MedianImputer, Standardized, Standardizer};
pub use gnb::{GaussianNb, VARIANCE_FLOOR};
pub use knn::knn_predict;
pub use logreg::{loss_and_gradient, LogReg, LogRegParams};
pub use metrics::{evaluate, Metrics};
pub use report::{
    improvement_report, run_evaluation, Classifier, ClassifierResult, EvalParams, FeatureBlock, FeatureSet,
    Improvement, ImprovementReport, PerSlice, Report, SplitSummary,
};
pub use split::{stratified_split, Split, SplitSpec};
