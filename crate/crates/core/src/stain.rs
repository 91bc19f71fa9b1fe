//! The pyramid-shaped ink stain placed around every projected sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stain half-widths, measured in level units along each plane axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRadii", into = "RawRadii")]
pub struct StainRadii {
    radius_in: f64,
    radius_out: f64,
}

#[derive(Serialize, Deserialize)]
struct RawRadii {
    radius_in: f64,
    radius_out: f64,
}

impl TryFrom<RawRadii> for StainRadii {
    type Error = Error;

    fn try_from(raw: RawRadii) -> Result<Self> {
        StainRadii::new(raw.radius_in, raw.radius_out)
    }
}

impl From<StainRadii> for RawRadii {
    fn from(r: StainRadii) -> Self {
        RawRadii {
            radius_in: r.radius_in,
            radius_out: r.radius_out,
        }
    }
}

impl StainRadii {
    pub fn new(radius_in: f64, radius_out: f64) -> Result<Self> {
        if radius_in > 0.0 && radius_out > 0.0 && radius_in.is_finite() && radius_out.is_finite() {
            Ok(Self {
                radius_in,
                radius_out,
            })
        } else {
            Err(Error::InvalidRadii {
                radius_in,
                radius_out,
            })
        }
    }

    /// Same radius on both axes.
    pub fn uniform(radius: f64) -> Result<Self> {
        Self::new(radius, radius)
    }

    pub fn radius_in(&self) -> f64 {
        self.radius_in
    }

    pub fn radius_out(&self) -> f64 {
        self.radius_out
    }
}

/// Membership degree of a cell at offset `(dx, dy)` from a stain apex.
///
/// The stain is a square-based pyramid: the degree falls linearly along
/// whichever axis is relatively farther from the apex, reaching zero at the
/// radius.
pub fn pyramid_membership(dx: f64, dy: f64, radii: StainRadii) -> f64 {
    let along_in = 1.0 - dx.abs() / radii.radius_in;
    let along_out = 1.0 - dy.abs() / radii.radius_out;
    along_in.min(along_out).max(0.0)
}
