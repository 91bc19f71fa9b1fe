//! Linear ionic drift model of a TiO2 memristor.
//!
//! The doped region of length `w` in a film of length `D` moves at a rate
//! proportional to the current: `dw/dt = (mu_v * R_on / D) * i(t)`, and the
//! device resistance interpolates linearly between `R_on` (`w = D`) and
//! `R_off` (`w = 0`). Pulses whose amplitude does not exceed the threshold
//! leave the state untouched.

use serde::{Deserialize, Serialize};

use super::CrossbarError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    /// Film length `D` in metres.
    pub length: f64,
    /// Fully doped resistance in ohms.
    pub r_on: f64,
    /// Undoped resistance in ohms.
    pub r_off: f64,
    /// Average ion mobility in m^2/(V s).
    pub mobility: f64,
    /// Programming threshold in volts.
    pub v_threshold: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            length: 10e-9,
            r_on: 100.0,
            r_off: 10e3,
            mobility: 1e-14,
            v_threshold: 1.0,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<(), CrossbarError> {
        let ok = self.r_on > 0.0
            && self.r_off > self.r_on
            && self.length > 0.0
            && self.mobility > 0.0
            && self.v_threshold > 0.0
            && [
                self.length,
                self.r_on,
                self.r_off,
                self.mobility,
                self.v_threshold,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(CrossbarError::InvalidParams(format!("{self:?}")))
        }
    }

    /// Drift coefficient `mu_v * R_on / D`, metres per coulomb.
    fn drift(&self) -> f64 {
        self.mobility * self.r_on / self.length
    }

    fn resistance_at(&self, w: f64) -> f64 {
        let x = w / self.length;
        self.r_on * x + self.r_off * (1.0 - x)
    }

    /// Doped length that yields resistance `r`, clamped to the device range.
    pub fn width_for_resistance(&self, r: f64) -> f64 {
        let x = (self.r_off - r) / (self.r_off - self.r_on);
        (x * self.length).clamp(0.0, self.length)
    }
}

/// State of one device: the doped-region length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorState {
    w: f64,
}

impl MemristorState {
    /// A device at the given doped length, clamped into `[0, D]`.
    pub fn new(w: f64, params: &DeviceParams) -> Self {
        Self {
            w: w.clamp(0.0, params.length),
        }
    }

    /// Fully doped, i.e. at `R_on`.
    pub fn fully_on(params: &DeviceParams) -> Self {
        Self { w: params.length }
    }

    pub fn width(&self) -> f64 {
        self.w
    }

    pub fn memristance(&self, params: &DeviceParams) -> f64 {
        params.resistance_at(self.w)
    }

    /// Drive the device with a constant voltage `v` for `dt` seconds.
    ///
    /// Positive voltage grows the doped region (lower resistance). The state
    /// equation is integrated with classical Runge-Kutta over `substeps`
    /// equal intervals, clamping `w` to `[0, D]` after each.
    pub fn apply_pulse(&mut self, params: &DeviceParams, v: f64, dt: f64, substeps: usize) {
        if v.abs() <= params.v_threshold || dt <= 0.0 {
            return;
        }
        let substeps = substeps.max(1);
        let h = dt / substeps as f64;
        let k = params.drift() * v;
        let d = params.length;
        let rate = |w: f64| k / params.resistance_at(w.clamp(0.0, d));
        let mut w = self.w;
        for _ in 0..substeps {
            let k1 = rate(w);
            let k2 = rate(w + 0.5 * h * k1);
            let k3 = rate(w + 0.5 * h * k2);
            let k4 = rate(w + h * k3);
            w = (w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(0.0, d);
        }
        self.w = w;
    }
}
