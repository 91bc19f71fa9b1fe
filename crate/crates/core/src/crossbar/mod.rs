//! Behavioral twin of the inference pipeline on memristor crossbars.
//!
//! Every IDS plane becomes a crossbar whose rows are output levels and whose
//! columns are input levels. Planes are written by closed-loop
//! program-and-verify and read through an inverting op-amp stage; diode
//! networks realize the min/max cascade and a pair of summers feeding an
//! analog divider performs the weighted-average defuzzification.
//!
//! Software degree `s` is stored as read-out `s * (1 - R_on / R_off)`. The
//! uniform factor passes unchanged through min and max and cancels in the
//! divider, so the crisp output is unaffected.

mod analog;
mod array;
mod device;
mod hardware;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analog::{diode_max, diode_min, BiasedVoltage, DefuzzCircuit, DefuzzReadout};
pub use array::{CrossbarArray, ProgrammingConfig, ProgrammingReport, ReadCircuit};
pub use device::{DeviceParams, MemristorState};
pub use hardware::{CircuitConfig, HardwareModel, HardwareTrace};

/// Whether the inference path is connected to the planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Switches open, planes accept write pulses.
    Learning,
    /// Switches closed, planes are read-only.
    Inference,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossbarError {
    #[error("invalid circuit parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("mode violation: {0}")]
    ModeViolation(&'static str),
    #[error("diode stage needs at least one input")]
    EmptyInput,
    #[error("diode stage inputs come from different stage depths")]
    MismatchedOffsets,
    #[error("divider denominator {denominator} V is below the floor")]
    DividerUnderflow { denominator: f64 },
}
