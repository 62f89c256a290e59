//! Model training and evaluation: collinearity filtering, regularized
//! logistic regression, repeated stratified cross-validation, ranking
//! statistics, and true-positive overlap.

mod cv;
mod gain;
mod linalg;
mod logistic;
mod overlap;
mod sk;
mod stats;
mod vif;

pub use cv::{cross_validate, cross_validate_with, CvParams, EvaluationResult, FoldOutcome};
pub use gain::{gain_ratio_rank, gain_ratios, rank_features, FeatureRank, RankEntry, DEFAULT_BINS};
pub use logistic::{predict, train_logistic, LogisticModel};
pub use overlap::overlap_analysis;
pub use sk::scott_knott_esd;
pub use stats::{auc_roc, cliffs_delta, confusion_metrics, ConfusionCounts};
pub use vif::vif_filter;
