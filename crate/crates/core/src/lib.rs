//! Arabic natural-language inference with hand-engineered contradiction
//! features and classical classifiers.

pub mod contra;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod learn;
pub mod model;
pub mod sparse;
pub mod synth;
pub mod textproc;
pub mod vectorize;

pub use error::{Error, Result};
pub use model::{load_model, save_model, Model};
