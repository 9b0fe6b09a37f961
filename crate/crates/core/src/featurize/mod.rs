//! Regression features: normalized fine-tuning size, corpus-pair
//! Jensen-Shannon divergence and typological language distances.

pub mod divergence;
mod features;
pub mod text;

pub use divergence::{corpus_jsd, frequency_distribution, jsd, kl_divergence, TokenDistribution};
pub use features::{
    assemble_features, scale_size, Feature, FeatureSet, FeatureVector, Featurizer, SizeScaler,
    SizeScaling,
};
pub use text::{tokenize_and_normalize, NUMBER_TOKEN, TIME_TOKEN};
