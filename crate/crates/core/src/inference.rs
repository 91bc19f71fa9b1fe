//! Max-min evaluation of the rule base and weighted-sum defuzzification.
//!
//! For every output level `t`, each group's antecedent degree is the minimum
//! of its planes' degrees at the query inputs (T-norm); the system degree is
//! the maximum of those over all groups (S-norm). The crisp output is the
//! confidence-weighted mean of the output level values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IdsGroup, IdsPlane, Model};

/// Per-output-level confidences before defuzzification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyOutput {
    entries: Vec<FuzzyEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyEntry {
    pub level_value: f64,
    pub confidence: f64,
}

impl FuzzyOutput {
    pub fn new(entries: Vec<FuzzyEntry>) -> Self {
        Self { entries }
    }

    /// Build from `(level_value, confidence)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let entries = pairs
            .into_iter()
            .map(|(level_value, confidence)| FuzzyEntry {
                level_value,
                confidence,
            })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[FuzzyEntry] {
        &self.entries
    }

    pub fn confidences(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.confidence).collect()
    }

    pub fn total_confidence(&self) -> f64 {
        self.entries.iter().map(|e| e.confidence).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_pairs(
            self.entries
                .iter()
                .map(|e| (e.level_value, e.confidence * factor)),
        )
    }
}

/// Degree stored on `plane` at the quantized input `x` and output level `y_level`.
pub fn plane_confidence(plane: &IdsPlane, x: f64, y_level: usize) -> f64 {
    plane.get(plane.input_spec().quantize(x), y_level) as f64
}

/// T-norm (minimum) over the group's planes.
pub fn group_confidence(group: &IdsGroup, x: &[f64], y_level: usize) -> Result<f64> {
    check_dims(group.planes().len(), x)?;
    if group.planes().is_empty() {
        return Ok(0.0);
    }
    Ok(group
        .planes()
        .iter()
        .zip(x)
        .map(|(plane, &xi)| plane_confidence(plane, xi, y_level))
        .fold(f64::INFINITY, f64::min))
}

/// S-norm (maximum) over groups of the group confidences, for every output level.
pub fn infer_fuzzy(model: &Model, x: &[f64]) -> Result<FuzzyOutput> {
    check_dims(model.input_count(), x)?;
    let output = model.output_spec();
    let columns: Vec<usize> = model
        .input_specs()
        .iter()
        .zip(x)
        .map(|(spec, &xi)| spec.quantize(xi))
        .collect();
    let n_out = output.levels();
    let mut system = vec![0.0f32; n_out];
    let mut antecedent = vec![0.0f32; n_out];
    for group in model.groups() {
        let mut planes = group.planes().iter().zip(&columns);
        let Some((first, &col)) = planes.next() else {
            continue;
        };
        antecedent.copy_from_slice(first.column(col));
        for (plane, &col) in planes {
            for (a, &c) in antecedent.iter_mut().zip(plane.column(col)) {
                *a = a.min(c);
            }
        }
        for (s, &a) in system.iter_mut().zip(&antecedent) {
            *s = s.max(a);
        }
    }
    Ok(FuzzyOutput::from_pairs(
        system
            .iter()
            .enumerate()
            .map(|(t, &mu)| (output.dequantize(t + 1), mu as f64)),
    ))
}

/// Weighted-sum defuzzifier: `sum(y_i * mu_i) / sum(mu_i)`.
///
/// The quotient is clamped to the span of levels carrying nonzero
/// confidence, which rounding could otherwise leave by an ulp.
/// Returns [`Error::NoCoverage`] when every confidence is zero.
pub fn defuzzify_wsf(fz: &FuzzyOutput) -> Result<f64> {
    let mut weighted = 0.0;
    let mut total = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for e in fz.entries() {
        weighted += e.level_value * e.confidence;
        total += e.confidence;
        if e.confidence > 0.0 {
            lo = lo.min(e.level_value);
            hi = hi.max(e.level_value);
        }
    }
    if total > 0.0 {
        Ok((weighted / total).clamp(lo, hi))
    } else {
        Err(Error::NoCoverage)
    }
}

pub fn infer(model: &Model, x: &[f64]) -> Result<f64> {
    defuzzify_wsf(&infer_fuzzy(model, x)?)
}

/// Every intermediate degree of one inference, for diagnostics and for
/// cross-checking the crossbar twin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceTrace {
    pub inputs: Vec<f64>,
    pub input_levels: Vec<usize>,
    /// `plane_confidences[group][level][plane]`, levels 0-based.
    pub plane_confidences: Vec<Vec<Vec<f64>>>,
    /// `group_confidences[group][level]`.
    pub group_confidences: Vec<Vec<f64>>,
    pub fuzzy: FuzzyOutput,
    /// `None` when no level has any confidence.
    pub crisp: Option<f64>,
}

pub fn infer_trace(model: &Model, x: &[f64]) -> Result<InferenceTrace> {
    check_dims(model.input_count(), x)?;
    let n_out = model.output_spec().levels();
    let mut plane_confidences = Vec::with_capacity(model.group_count());
    let mut group_confidences = Vec::with_capacity(model.group_count());
    for group in model.groups() {
        let per_level: Vec<Vec<f64>> = (1..=n_out)
            .map(|t| {
                group
                    .planes()
                    .iter()
                    .zip(x)
                    .map(|(plane, &xi)| plane_confidence(plane, xi, t))
                    .collect()
            })
            .collect();
        group_confidences.push(
            per_level
                .iter()
                .map(|planes| {
                    planes
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min)
                        .min(1.0)
                })
                .collect(),
        );
        plane_confidences.push(per_level);
    }
    let fuzzy = FuzzyOutput::from_pairs((1..=n_out).map(|t| {
        let mu = group_confidences
            .iter()
            .map(|g: &Vec<f64>| g[t - 1])
            .fold(0.0, f64::max);
        (model.output_spec().dequantize(t), mu)
    }));
    let crisp = defuzzify_wsf(&fuzzy).ok();
    Ok(InferenceTrace {
        inputs: x.to_vec(),
        input_levels: model
            .input_specs()
            .iter()
            .zip(x)
            .map(|(s, &v)| s.quantize(v))
            .collect(),
        plane_confidences,
        group_confidences,
        fuzzy,
        crisp,
    })
}

fn check_dims(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        })
    }
}
