//! IDS planes, IDS groups and the training policies that build a [`Model`].
//!
//! A plane is a dense grid of confidence degrees with one axis per input
//! level and one per output level. A group holds one plane per input variable
//! and is the unit over which the rule antecedent is evaluated.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quant::QuantizationSpec;
use crate::stain::{pyramid_membership, StainRadii};

/// One training observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub inputs: Vec<f64>,
    pub output: f64,
}

impl Sample {
    pub fn new(inputs: impl Into<Vec<f64>>, output: f64) -> Self {
        Self {
            inputs: inputs.into(),
            output,
        }
    }
}

/// Quantization of every input variable plus the output variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpecs {
    pub inputs: Vec<QuantizationSpec>,
    pub output: QuantizationSpec,
}

impl ModelSpecs {
    pub fn new(inputs: Vec<QuantizationSpec>, output: QuantizationSpec) -> Self {
        Self { inputs, output }
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    fn check_sample(&self, sample: &Sample) -> Result<()> {
        if sample.inputs.len() != self.inputs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs.len(),
                got: sample.inputs.len(),
            });
        }
        Ok(())
    }
}

/// Confidence grid for one input variable against the output variable.
///
/// Cells are stored column by column (all output levels of input level 1,
/// then input level 2, ...) so that inference reads one contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct IdsPlane {
    input_spec: QuantizationSpec,
    output_spec: QuantizationSpec,
    cells: Vec<f32>,
}

impl IdsPlane {
    pub fn new(input_spec: QuantizationSpec, output_spec: QuantizationSpec) -> Self {
        let cells = vec![0.0; input_spec.levels() * output_spec.levels()];
        Self {
            input_spec,
            output_spec,
            cells,
        }
    }

    pub(crate) fn from_cells(
        input_spec: QuantizationSpec,
        output_spec: QuantizationSpec,
        cells: Vec<f32>,
    ) -> Self {
        debug_assert_eq!(cells.len(), input_spec.levels() * output_spec.levels());
        Self {
            input_spec,
            output_spec,
            cells,
        }
    }

    pub fn input_spec(&self) -> &QuantizationSpec {
        &self.input_spec
    }

    pub fn output_spec(&self) -> &QuantizationSpec {
        &self.output_spec
    }

    pub fn input_levels(&self) -> usize {
        self.input_spec.levels()
    }

    pub fn output_levels(&self) -> usize {
        self.output_spec.levels()
    }

    /// Degree at 1-based `(input_level, output_level)`.
    pub fn get(&self, input_level: usize, output_level: usize) -> f32 {
        self.cells[self.index(input_level, output_level)]
    }

    /// All output-level degrees at one input level, ordered by output level.
    pub fn column(&self, input_level: usize) -> &[f32] {
        let n_out = self.output_levels();
        let start = (input_level - 1) * n_out;
        &self.cells[start..start + n_out]
    }

    fn index(&self, input_level: usize, output_level: usize) -> usize {
        assert!(
            (1..=self.input_levels()).contains(&input_level),
            "input level out of range"
        );
        assert!(
            (1..=self.output_levels()).contains(&output_level),
            "output level out of range"
        );
        (input_level - 1) * self.output_levels() + (output_level - 1)
    }

    /// Row-major view: one row per output level, one column per input level.
    pub fn rows(&self) -> Vec<Vec<f32>> {
        (1..=self.output_levels())
            .map(|row| {
                (1..=self.input_levels())
                    .map(|col| self.get(col, row))
                    .collect()
            })
            .collect()
    }

    /// Number of cells holding the value 1.
    pub fn apex_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1.0).count()
    }

    /// Stamp a pyramid stain centred on the given levels, keeping the
    /// cellwise maximum with whatever is already on the plane.
    pub fn diffuse(
        &mut self,
        center_in: usize,
        center_out: usize,
        radii: StainRadii,
    ) -> Result<()> {
        let n_in = self.input_levels();
        let n_out = self.output_levels();
        if !(1..=n_in).contains(&center_in) {
            return Err(Error::LevelOutOfRange {
                level: center_in,
                levels: n_in,
            });
        }
        if !(1..=n_out).contains(&center_out) {
            return Err(Error::LevelOutOfRange {
                level: center_out,
                levels: n_out,
            });
        }
        let reach_in = radii.radius_in().ceil() as usize;
        let reach_out = radii.radius_out().ceil() as usize;
        let cols = center_in.saturating_sub(reach_in).max(1)..=(center_in + reach_in).min(n_in);
        for col in cols {
            let dx = col as f64 - center_in as f64;
            let rows =
                center_out.saturating_sub(reach_out).max(1)..=(center_out + reach_out).min(n_out);
            for row in rows {
                let dy = row as f64 - center_out as f64;
                let degree = pyramid_membership(dx, dy, radii) as f32;
                let idx = (col - 1) * n_out + (row - 1);
                if degree > self.cells[idx] {
                    self.cells[idx] = degree;
                }
            }
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn cells(&self) -> &[f32] {
        &self.cells
    }
}

/// One plane per input variable, plus the output levels already stored.
#[derive(Debug, Clone, PartialEq)]
pub struct IdsGroup {
    planes: Vec<IdsPlane>,
    stored_output_levels: BTreeSet<usize>,
}

impl IdsGroup {
    pub fn empty(specs: &ModelSpecs) -> Self {
        let planes = specs
            .inputs
            .iter()
            .map(|&input| IdsPlane::new(input, specs.output))
            .collect();
        Self {
            planes,
            stored_output_levels: BTreeSet::new(),
        }
    }

    pub(crate) fn from_parts(planes: Vec<IdsPlane>, stored_output_levels: BTreeSet<usize>) -> Self {
        Self {
            planes,
            stored_output_levels,
        }
    }

    pub fn planes(&self) -> &[IdsPlane] {
        &self.planes
    }

    pub fn stored_output_levels(&self) -> &BTreeSet<usize> {
        &self.stored_output_levels
    }

    pub fn output_levels(&self) -> usize {
        self.planes.first().map_or(0, IdsPlane::output_levels)
    }

    fn matches(&self, specs: &ModelSpecs) -> bool {
        self.planes.len() == specs.inputs.len()
            && self
                .planes
                .iter()
                .zip(&specs.inputs)
                .all(|(p, s)| p.input_spec == *s && p.output_spec == specs.output)
    }

    /// Diffuse a sample onto this group unless its output level is already
    /// stored here. Two samples sharing an output level in one group would
    /// give full confidence to the cross combinations of their inputs.
    pub fn merge(&mut self, sample: &Sample, radii: StainRadii) -> Result<()> {
        let output_spec = self
            .planes
            .first()
            .ok_or(Error::IncompatibleGroup)?
            .output_spec;
        if sample.inputs.len() != self.planes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.planes.len(),
                got: sample.inputs.len(),
            });
        }
        let level = output_spec.quantize(sample.output);
        if self.stored_output_levels.contains(&level) {
            return Err(Error::EqualOutputConflict { level });
        }
        for (plane, &x) in self.planes.iter_mut().zip(&sample.inputs) {
            let col = plane.input_spec.quantize(x);
            plane.diffuse(col, level, radii)?;
        }
        self.stored_output_levels.insert(level);
        Ok(())
    }

    pub fn memory_bytes(&self) -> usize {
        self.planes
            .iter()
            .map(|p| p.cells.len() * std::mem::size_of::<f32>())
            .sum()
    }
}

/// How samples are allocated to groups during training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum TrainingPolicy {
    /// One group per sample.
    Full,
    /// Allocate a group only when the current model mispredicts the sample by
    /// more than `tolerance` output units, or cannot predict it at all.
    ErrorGated { tolerance: f64 },
    /// Pack samples into the first existing group that does not already hold
    /// their output level.
    Merged,
}

/// A trained collection of IDS groups sharing one set of specs and radii.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    specs: ModelSpecs,
    radii: StainRadii,
    groups: Vec<IdsGroup>,
}

impl Model {
    pub fn new(specs: ModelSpecs, radii: StainRadii) -> Self {
        Self {
            specs,
            radii,
            groups: Vec::new(),
        }
    }

    pub fn specs(&self) -> &ModelSpecs {
        &self.specs
    }

    pub fn input_specs(&self) -> &[QuantizationSpec] {
        &self.specs.inputs
    }

    pub fn output_spec(&self) -> &QuantizationSpec {
        &self.specs.output
    }

    pub fn radii(&self) -> StainRadii {
        self.radii
    }

    pub fn groups(&self) -> &[IdsGroup] {
        &self.groups
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn input_count(&self) -> usize {
        self.specs.inputs.len()
    }

    /// Bytes of plane storage, i.e. what a crossbar realization would need in cells.
    pub fn memory_bytes(&self) -> usize {
        self.groups.iter().map(IdsGroup::memory_bytes).sum()
    }

    pub fn push_group(&mut self, group: IdsGroup) -> Result<()> {
        if !group.matches(&self.specs) {
            return Err(Error::IncompatibleGroup);
        }
        self.groups.push(group);
        Ok(())
    }

    /// Store `sample` in a fresh group of its own.
    pub fn add_sample(&mut self, sample: &Sample) -> Result<()> {
        self.specs.check_sample(sample)?;
        let mut group = IdsGroup::empty(&self.specs);
        group.merge(sample, self.radii)?;
        self.groups.push(group);
        Ok(())
    }

    pub(crate) fn from_parts(specs: ModelSpecs, radii: StainRadii, groups: Vec<IdsGroup>) -> Self {
        Self {
            specs,
            radii,
            groups,
        }
    }

    pub fn train(
        samples: &[Sample],
        specs: ModelSpecs,
        radii: StainRadii,
        policy: TrainingPolicy,
    ) -> Result<Self> {
        match policy {
            TrainingPolicy::Full => Self::train_full(samples, specs, radii),
            TrainingPolicy::ErrorGated { tolerance } => {
                Self::train_error_gated(samples, specs, radii, tolerance)
            }
            TrainingPolicy::Merged => Self::train_merged(samples, specs, radii),
        }
    }

    pub fn train_full(samples: &[Sample], specs: ModelSpecs, radii: StainRadii) -> Result<Self> {
        check_samples(samples, &specs)?;
        let mut model = Self::new(specs, radii);
        for sample in samples {
            model.add_sample(sample)?;
        }
        Ok(model)
    }

    /// Single pass over `samples` in order; see [`TrainingPolicy::ErrorGated`].
    pub fn train_error_gated(
        samples: &[Sample],
        specs: ModelSpecs,
        radii: StainRadii,
        tolerance: f64,
    ) -> Result<Self> {
        check_samples(samples, &specs)?;
        let mut model = Self::new(specs, radii);
        for sample in samples {
            let needs_group = match crate::inference::infer(&model, &sample.inputs) {
                Ok(y) => (y - sample.output).abs() > tolerance,
                Err(Error::NoCoverage) => true,
                Err(e) => return Err(e),
            };
            if needs_group {
                model.add_sample(sample)?;
            }
        }
        Ok(model)
    }

    pub fn train_merged(samples: &[Sample], specs: ModelSpecs, radii: StainRadii) -> Result<Self> {
        check_samples(samples, &specs)?;
        let mut model = Self::new(specs, radii);
        'samples: for sample in samples {
            for group in &mut model.groups {
                match group.merge(sample, radii) {
                    Ok(()) => continue 'samples,
                    Err(Error::EqualOutputConflict { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            model.add_sample(sample)?;
        }
        Ok(model)
    }
}

fn check_samples(samples: &[Sample], specs: &ModelSpecs) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    samples.iter().try_for_each(|s| specs.check_sample(s))
}
