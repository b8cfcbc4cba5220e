//! Maximum-likelihood fitting and interaction-support selection.

pub mod bh;
mod fit;
mod resample;
mod select;

pub use bh::benjamini_hochberg;
pub use fit::{fit, fit_with_support, full_support, pooled_dimension_loglik, FitBounds, FitConfig, FitResult, Support};
pub use resample::resample_concatenate;
pub use select::{
    choose_epsilon, confidence_interval, confidence_select, confidence_support, mean_model, refit_on_support,
    sign_matrix, threshold_select, threshold_support, zero_outside, ConfidenceSupport, EpsilonChoice, IntervalKind,
    SelectionMethod, SupportSelection, ThresholdScore, TrainedFit,
};
