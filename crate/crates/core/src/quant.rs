//! Mapping between real-valued variables and discrete plane levels.
//!
//! Levels are 1-based throughout the public API: a variable quantized to `n`
//! levels takes level indices `1..=n`, with level 1 at `min` and level `n` at
//! `max`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform quantization of the closed interval `[min, max]` onto `levels`
/// evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct QuantizationSpec {
    min: f64,
    max: f64,
    levels: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    min: f64,
    max: f64,
    levels: usize,
}

impl TryFrom<RawSpec> for QuantizationSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        QuantizationSpec::new(raw.min, raw.max, raw.levels)
    }
}

impl From<QuantizationSpec> for RawSpec {
    fn from(spec: QuantizationSpec) -> Self {
        RawSpec {
            min: spec.min,
            max: spec.max,
            levels: spec.levels,
        }
    }
}

impl QuantizationSpec {
    pub fn new(min: f64, max: f64, levels: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min && levels >= 2) {
            return Err(Error::InvalidQuantization { min, max, levels });
        }
        Ok(Self { min, max, levels })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Distance in variable units between two adjacent levels.
    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.levels - 1) as f64
    }

    /// Nearest level for `x`. Values outside the range clamp to the end levels.
    pub fn quantize(&self, x: f64) -> usize {
        let scaled = (x - self.min) / (self.max - self.min) * (self.levels - 1) as f64;
        let rounded = scaled.round();
        if rounded.is_nan() || rounded < 0.0 {
            1
        } else if rounded >= (self.levels - 1) as f64 {
            self.levels
        } else {
            rounded as usize + 1
        }
    }

    /// Variable value at level `k`.
    ///
    /// # Panics
    /// If `k` is not in `1..=levels`.
    pub fn dequantize(&self, k: usize) -> f64 {
        assert!(
            (1..=self.levels).contains(&k),
            "level {k} outside 1..={}",
            self.levels
        );
        self.level_value(k as f64)
    }

    /// Checked variant of [`dequantize`](Self::dequantize).
    pub fn try_dequantize(&self, k: usize) -> Result<f64> {
        if (1..=self.levels).contains(&k) {
            Ok(self.level_value(k as f64))
        } else {
            Err(Error::LevelOutOfRange {
                level: k,
                levels: self.levels,
            })
        }
    }

    /// Affine extension of `dequantize` to fractional level indices, used to
    /// map a defuzzified level index back into variable units.
    pub fn level_value(&self, level: f64) -> f64 {
        self.min + (level - 1.0) * self.step()
    }
}
