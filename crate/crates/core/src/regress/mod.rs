//! Predictor families, their fitting, and partitioned cross-validation.

pub mod cv;
mod design;
mod family;
mod model;
pub mod scaling_law;

pub use cv::{evaluate_scheme, fold_assignment, kfold_rmse, CvConfig, CvReport, EvalOptions, PartitionCv};
pub use design::{design_matrix, fit_ols, Design, OlsFit, LOG_FLOOR};
pub use family::{PredictorFamily, PredictorSpec};
pub use model::{fit, predict, rmse, FitNotes, FittedModel};
pub use scaling_law::{fit_scaling_law, scaling_law, ScalingLawFit};
