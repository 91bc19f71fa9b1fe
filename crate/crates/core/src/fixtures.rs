//! Small hand-checkable models used by tests, the CLI and the docs.

use crate::model::{Model, ModelSpecs, Sample};
use crate::quant::QuantizationSpec;
use crate::stain::StainRadii;

/// Two inputs on a half-unit grid over `[0, 5]`, output levels 1 and 2.
///
/// Stain radius is 1.5 variable units on every axis: 3 input levels, 1.5
/// output levels.
pub fn worked_example_specs() -> (ModelSpecs, StainRadii) {
    let input = QuantizationSpec::new(0.0, 5.0, 11).expect("valid spec");
    let output = QuantizationSpec::new(1.0, 2.0, 2).expect("valid spec");
    let radii = StainRadii::new(3.0, 1.5).expect("valid radii");
    (ModelSpecs::new(vec![input; 2], output), radii)
}

pub fn worked_example_samples() -> Vec<Sample> {
    vec![Sample::new([1.5, 4.0], 2.0), Sample::new([3.0, 4.0], 1.0)]
}

/// Two-sample model; querying it at `(2.5, 3.5)` yields degrees of about
/// 0.67 and 0.34 on the two output levels.
pub fn worked_example() -> Model {
    let (specs, radii) = worked_example_specs();
    Model::train_full(&worked_example_samples(), specs, radii).expect("fixture trains")
}

/// A single sample `(5, 3, 7)` on two 10-level planes with a radius-2 stain.
pub fn single_stain_group() -> Model {
    let spec = QuantizationSpec::new(1.0, 10.0, 10).expect("valid spec");
    let specs = ModelSpecs::new(vec![spec; 2], spec);
    let radii = StainRadii::uniform(2.0).expect("valid radii");
    Model::train_full(&[Sample::new([5.0, 3.0], 7.0)], specs, radii).expect("fixture trains")
}
