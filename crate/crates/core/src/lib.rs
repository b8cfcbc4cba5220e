//! Multivariate exponential Hawkes processes with exciting and inhibiting
//! interactions.
//!
//! The conditional intensity of dimension `i` is the positive part of
//!
//! ```text
//! λ*_i(t) = μ_i + Σ_j Σ_{T ≤ t, mark j} α_ij exp(-β_i (t - T))
//! ```
//!
//! with one decay rate per receiving dimension. Between events `λ*_i`
//! relaxes monotonically towards `μ_i`, so it crosses zero at most once per
//! inter-event interval; that crossing (the restart time) makes the
//! compensator and the log-likelihood available in closed form.
//!
//! ```
//! use hawkes_core::{fit, gof_report, scenario, simulate, FitConfig, GofOptions, SimConfig, StopRule};
//!
//! let truth = scenario("S2", None).unwrap();
//! let train = simulate(&SimConfig::new(truth.clone(), StopRule::Events(500), 1)).unwrap();
//! let test = simulate(&SimConfig::new(truth, StopRule::Events(500), 2)).unwrap();
//! let fitted = fit(&[train], &FitConfig::default().with_restarts(2)).unwrap();
//! let report = gof_report(&fitted.model, &[test], &GofOptions::default()).unwrap();
//! assert_eq!(report.all_p().len(), 3);
//! ```

pub mod compensator;
pub mod diagnostic;
pub mod error;
pub mod estimate;
pub mod events;
pub mod experiment;
pub mod gof;
pub mod intensity;
pub mod io;
pub mod likelihood;
pub mod model;
pub mod optim;
pub mod sim;
pub mod spectral;

pub use compensator::{compensator, compensator_path, integrated_underlying, CompensatorPath};
pub use diagnostic::{identifiability_diagnostic, identifiability_diagnostic_with_model};
pub use error::{HawkesError, Result};
pub use estimate::{
    benjamini_hochberg, choose_epsilon, confidence_select, fit, fit_with_support, resample_concatenate,
    threshold_select, FitConfig, FitResult, IntervalKind, SelectionMethod, SupportSelection,
};
pub use events::EventSequence;
pub use gof::{gof_report, ks_exp_test, time_rescale, GofOptions, GofReport, Target};
pub use intensity::{conditional_intensity, restart_time, underlying_intensity, IntervalState};
pub use io::ModelDocument;
pub use likelihood::{approx_log_likelihood, log_likelihood, Objective};
pub use model::HawkesModel;
pub use sim::{scenario, simulate, Scenario, SimConfig, StopRule};
pub use spectral::{spectral_radius, SpectralReport};
