//! Regression and classification with diagram-valued covariates.

pub mod cv;
pub mod regression;
pub mod svm;

pub use cv::{fold_indices, kfold_cv, mean_sd, CvReport, FoldClassifier, KernelClassifier, SvmMethod};
pub use regression::{
    group_means_fit, loo_bandwidth, loo_bandwidth_cached, nw_fitted, nw_from_row, nw_loo, nw_predict, robinson_plm_fit,
    rss, BandwidthSelection, GridPoint, PlmFit, RegressionSample,
};
pub use svm::{
    ksvm_train, solve_dual, svm_predict, svm_train, ClassificationSample, DualSolution, Label, SvmKind, SvmModel,
    SvmParams,
};
