//! Performance prediction for machine translation on low-resource languages.
//!
//! The crate featurizes fine-tune/test experiment records (corpus size,
//! corpus-pair Jensen-Shannon divergence, typological language distances),
//! fits a family of regression predictors per data partition, scores them by
//! partitioned k-fold RMSE, checks the residuals for normality and
//! heteroscedasticity, and ranks features by correlation, linear weight and
//! random-forest impurity decrease.
//!
//! Everything here is pure computation on in-memory data and builds without
//! `std`; file formats and the command line live in the `mtperf` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod data;
pub mod diagnostics;
mod error;
pub mod featurize;
pub mod importance;
pub mod linalg;
pub mod regress;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
