//! One crossbar plane: programming by program-and-verify, and op-amp readout.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::device::{DeviceParams, MemristorState};
use super::{CrossbarError, Mode};
use crate::model::IdsPlane;

/// Readout stage for one sensed row: an inverting summer with the cell on
/// the input branch and `R_f = R_on` in feedback, offset by `v_ref = -v_read`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadCircuit {
    pub v_read: f64,
    pub v_ref: f64,
    pub r_feedback: f64,
}

impl ReadCircuit {
    pub fn new(v_read: f64, params: &DeviceParams) -> Result<Self, CrossbarError> {
        if !(v_read.is_finite() && v_read != 0.0 && v_read.abs() < params.v_threshold) {
            return Err(CrossbarError::InvalidParams(format!(
                "read voltage {v_read} must be nonzero and below the {} V threshold",
                params.v_threshold
            )));
        }
        Ok(Self {
            v_read,
            v_ref: -v_read,
            r_feedback: params.r_on,
        })
    }

    /// Op-amp output for a cell of memristance `r_m`.
    pub fn output_voltage(&self, r_m: f64) -> f64 {
        -self.v_ref + self.v_read * (-self.r_feedback / r_m)
    }

    /// Output normalized by the read voltage: `1 - R_on / R_m`.
    pub fn confidence(&self, r_m: f64) -> f64 {
        self.output_voltage(r_m) / self.v_read
    }
}

/// Write-pulse settings for program-and-verify.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProgrammingConfig {
    /// Full-select pulse amplitude in volts; unselected lines see half.
    pub amplitude: f64,
    /// Width of the first pulse on each cell, seconds.
    pub pulse_width: f64,
    pub substeps: usize,
    pub pulse_budget: u32,
}

impl Default for ProgrammingConfig {
    fn default() -> Self {
        Self {
            amplitude: 1.5,
            pulse_width: 1e-6,
            substeps: 10,
            pulse_budget: 10_000,
        }
    }
}

impl ProgrammingConfig {
    pub fn validate(&self, params: &DeviceParams) -> Result<(), CrossbarError> {
        if !(self.amplitude > params.v_threshold) {
            return Err(CrossbarError::InvalidParams(format!(
                "pulse amplitude {} does not exceed the threshold",
                self.amplitude
            )));
        }
        if self.amplitude / 2.0 > params.v_threshold {
            return Err(CrossbarError::InvalidParams(format!(
                "half-select voltage {} would disturb unselected cells",
                self.amplitude / 2.0
            )));
        }
        if !(self.pulse_width > 0.0) || self.substeps == 0 {
            return Err(CrossbarError::InvalidParams(
                "pulse width and substeps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of programming one plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgrammingReport {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, rows are output levels.
    pub pulses: Vec<u32>,
    /// Final `read - target` per cell, row-major, in hardware confidence units.
    pub residuals: Vec<f64>,
    /// `(row, col)`, 1-based, of cells that ran out of pulse budget.
    pub exhausted: Vec<(usize, usize)>,
}

impl ProgrammingReport {
    pub fn total_pulses(&self) -> u64 {
        self.pulses.iter().map(|&p| p as u64).sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,pulses,residual,exhausted\n");
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                let exhausted = self.exhausted.contains(&(r + 1, c + 1));
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r + 1,
                    c + 1,
                    self.pulses[i],
                    self.residuals[i],
                    exhausted
                );
            }
        }
        out
    }
}

/// A rows x cols grid of memristors; rows are output levels, columns are
/// input levels.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarArray {
    rows: usize,
    cols: usize,
    cells: Vec<MemristorState>,
    params: DeviceParams,
    read: ReadCircuit,
    mode: Mode,
}

impl CrossbarArray {
    /// Fresh array with every cell at `R_on`, in learning mode.
    pub fn new(
        rows: usize,
        cols: usize,
        params: DeviceParams,
        v_read: f64,
    ) -> Result<Self, CrossbarError> {
        params.validate()?;
        let read = ReadCircuit::new(v_read, &params)?;
        Ok(Self {
            rows,
            cols,
            cells: vec![MemristorState::fully_on(&params); rows * cols],
            params,
            read,
            mode: Mode::Learning,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn params(&self) -> &DeviceParams {
        &self.params
    }

    pub fn read_circuit(&self) -> &ReadCircuit {
        &self.read
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn cell(&self, col: usize, row: usize) -> &MemristorState {
        &self.cells[self.index(col, row)]
    }

    pub fn set_cell(&mut self, col: usize, row: usize, state: MemristorState) {
        let i = self.index(col, row);
        self.cells[i] = state;
    }

    fn index(&self, col: usize, row: usize) -> usize {
        assert!(
            (1..=self.cols).contains(&col) && (1..=self.rows).contains(&row),
            "cell out of range"
        );
        (row - 1) * self.cols + (col - 1)
    }

    /// Op-amp output voltage when column `col` is driven and row `row` sensed.
    pub fn read_voltage(&self, col: usize, row: usize) -> f64 {
        self.read
            .output_voltage(self.cell(col, row).memristance(&self.params))
    }

    /// Read-out normalized by `v_read`, i.e. `1 - R_on / R_m`.
    pub fn read_confidence(&self, col: usize, row: usize) -> f64 {
        self.read
            .confidence(self.cell(col, row).memristance(&self.params))
    }

    /// Largest confidence the device range can express, `1 - R_on / R_off`.
    pub fn full_scale(&self) -> f64 {
        1.0 - self.params.r_on / self.params.r_off
    }

    /// Hardware read-out that encodes software degree `degree`.
    pub fn encode(&self, degree: f64) -> f64 {
        degree * self.full_scale()
    }

    /// One write pulse on `(col, row)` with V/2 biasing: the selected column
    /// is driven at `+v/2` and the selected row at `-v/2`, every other line is
    /// grounded. Cells sharing a line with the selected one see `v/2`.
    fn write_pulse(&mut self, col: usize, row: usize, v: f64, dt: f64, substeps: usize) {
        let params = self.params;
        let half = v / 2.0;
        for c in 1..=self.cols {
            let i = self.index(c, row);
            let seen = if c == col { v } else { half };
            self.cells[i].apply_pulse(&params, seen, dt, substeps);
        }
        for r in (1..=self.rows).filter(|&r| r != row) {
            let i = self.index(col, r);
            self.cells[i].apply_pulse(&params, half, dt, substeps);
        }
    }

    /// Program-and-verify every cell towards the encoded plane degrees.
    ///
    /// Each cell is read first and left alone if already within `epsilon`.
    /// Otherwise pulses of fixed amplitude are applied with polarity chosen
    /// from the sign of the error; the width doubles while the cell keeps
    /// undershooting and halves on every overshoot.
    pub fn program_plane(
        &mut self,
        target: &IdsPlane,
        epsilon: f64,
        config: &ProgrammingConfig,
    ) -> Result<ProgrammingReport, CrossbarError> {
        if self.mode != Mode::Learning {
            return Err(CrossbarError::ModeViolation(
                "cannot program in inference mode",
            ));
        }
        if target.input_levels() != self.cols || target.output_levels() != self.rows {
            return Err(CrossbarError::DimensionMismatch(format!(
                "plane is {}x{}, array is {}x{}",
                target.output_levels(),
                target.input_levels(),
                self.rows,
                self.cols
            )));
        }
        config.validate(&self.params)?;
        let mut report = ProgrammingReport {
            rows: self.rows,
            cols: self.cols,
            pulses: vec![0; self.rows * self.cols],
            residuals: vec![0.0; self.rows * self.cols],
            exhausted: Vec::new(),
        };
        for row in 1..=self.rows {
            for col in 1..=self.cols {
                let goal = self.encode(target.get(col, row) as f64);
                let (pulses, residual) = self.program_cell(col, row, goal, epsilon, config);
                let i = self.index(col, row);
                report.pulses[i] = pulses;
                report.residuals[i] = residual;
                if residual.abs() > epsilon {
                    report.exhausted.push((row, col));
                }
            }
        }
        Ok(report)
    }

    fn program_cell(
        &mut self,
        col: usize,
        row: usize,
        goal: f64,
        epsilon: f64,
        config: &ProgrammingConfig,
    ) -> (u32, f64) {
        let mut pulses = 0;
        let mut width = config.pulse_width;
        let mut last_polarity = 0.0;
        let mut overshot = false;
        loop {
            let error = self.read_confidence(col, row) - goal;
            if error.abs() <= epsilon || pulses >= config.pulse_budget {
                return (pulses, error);
            }
            // too little confidence means too little resistance: shrink w
            let polarity = if error < 0.0 { -1.0 } else { 1.0 };
            if last_polarity != 0.0 {
                if polarity != last_polarity {
                    overshot = true;
                    width /= 2.0;
                } else if !overshot {
                    width *= 2.0;
                }
            }
            self.write_pulse(
                col,
                row,
                polarity * config.amplitude,
                width,
                config.substeps,
            );
            last_polarity = polarity;
            pulses += 1;
        }
    }

    /// Per-cell state dump: `row,col,w_over_d,memristance`.
    pub fn state_csv(&self) -> String {
        let mut out = String::from("row,col,w_over_d,memristance\n");
        for row in 1..=self.rows {
            for col in 1..=self.cols {
                let cell = self.cell(col, row);
                let _ = writeln!(
                    out,
                    "{row},{col},{},{}",
                    cell.width() / self.params.length,
                    cell.memristance(&self.params)
                );
            }
        }
        out
    }
}
