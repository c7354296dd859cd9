//! Username-squatting toolkit: generate username variants for seed accounts,
//! discover which exist through a data source, extract pairwise similarity
//! features and classify squatted accounts as suspicious or benign.

pub mod error;
pub mod exec;
pub mod datasource;
pub mod features;
pub mod genmodels;
pub mod learn;
pub mod mentions;
pub mod pipeline;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};
