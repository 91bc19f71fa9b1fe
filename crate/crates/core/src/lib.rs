//! Optimization-free fuzzy modeling with ink-drop-spread planes.
//!
//! Each training sample is projected onto one plane per input variable
//! (input level against output level) and spread there as a pyramid-shaped
//! ink stain. The planes of one sample form a group; inference takes the
//! minimum over a group's planes and the maximum over groups for every output
//! level, then defuzzifies with a weighted average.
//!
//! [`crossbar`] simulates the analog memristor realization of the same
//! pipeline and [`bench`] holds the dataset generators and experiment drivers.

pub mod bench;
pub mod crossbar;
mod error;
pub mod fixtures;
pub mod inference;
pub mod io;
pub mod model;
pub mod quant;
pub mod stain;

pub use error::{Error, Result};
pub use inference::{defuzzify_wsf, infer, infer_fuzzy, infer_trace, FuzzyOutput, InferenceTrace};
pub use model::{IdsGroup, IdsPlane, Model, ModelSpecs, Sample, TrainingPolicy};
pub use quant::QuantizationSpec;
pub use stain::{pyramid_membership, StainRadii};
