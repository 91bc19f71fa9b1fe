use serde::{Deserialize, Serialize};

use super::analog::{diode_max, diode_min, DefuzzCircuit, DefuzzReadout};
use super::array::{CrossbarArray, ProgrammingConfig, ProgrammingReport};
use super::device::DeviceParams;
use super::{CrossbarError, Mode};
use crate::model::{IdsGroup, Model, ModelSpecs};

/// Analog stage settings shared by every plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    /// Column drive during reads, volts; must stay below the device threshold.
    pub v_read: f64,
    /// Diode forward drop `V_D(on)`, volts.
    pub v_diode: f64,
    /// Ladder unit resistance of the defuzzifier, ohms.
    pub unit_resistance: f64,
    /// Divider floor as a fraction of `v_read`.
    pub divider_floor: f64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            v_read: 0.5,
            v_diode: 0.7,
            unit_resistance: 1e3,
            divider_floor: 1e-4,
        }
    }
}

impl CircuitConfig {
    pub fn defuzz_circuit(&self) -> DefuzzCircuit {
        DefuzzCircuit {
            unit_resistance: self.unit_resistance,
            divider_floor: self.divider_floor * self.v_read.abs(),
        }
    }
}

/// Node voltages of one hardware inference.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareTrace {
    pub input_levels: Vec<usize>,
    /// Op-amp outputs, `plane_voltages[group][level][plane]`.
    pub plane_voltages: Vec<Vec<Vec<f64>>>,
    /// S-norm outputs per output level, volts.
    pub level_voltages: Vec<f64>,
    pub readout: Result<DefuzzReadout, CrossbarError>,
}

/// A programmed set of crossbars mirroring a [`Model`], one array per plane.
#[derive(Debug, Clone)]
pub struct HardwareModel {
    specs: ModelSpecs,
    groups: Vec<Vec<CrossbarArray>>,
    circuit: CircuitConfig,
    params: DeviceParams,
    mode: Mode,
}

impl HardwareModel {
    /// No groups yet, in learning mode.
    pub fn new(
        specs: ModelSpecs,
        params: DeviceParams,
        circuit: CircuitConfig,
    ) -> Result<Self, CrossbarError> {
        params.validate()?;
        // fail early on an out-of-range read voltage
        CrossbarArray::new(1, 1, params, circuit.v_read)?;
        Ok(Self {
            specs,
            groups: Vec::new(),
            circuit,
            params,
            mode: Mode::Learning,
        })
    }

    /// Allocate and program one crossbar group per model group, then close
    /// the inference switches.
    pub fn program(
        model: &Model,
        params: DeviceParams,
        circuit: CircuitConfig,
        programming: &ProgrammingConfig,
        epsilon: f64,
    ) -> Result<(Self, Vec<ProgrammingReport>), CrossbarError> {
        let mut hw = Self::new(model.specs().clone(), params, circuit)?;
        let mut reports = Vec::new();
        for group in model.groups() {
            reports.extend(hw.program_group(group, programming, epsilon)?);
        }
        hw.set_mode(Mode::Inference);
        Ok((hw, reports))
    }

    /// Append a fresh crossbar group and program it from `group`.
    pub fn program_group(
        &mut self,
        group: &IdsGroup,
        programming: &ProgrammingConfig,
        epsilon: f64,
    ) -> Result<Vec<ProgrammingReport>, CrossbarError> {
        if self.mode != Mode::Learning {
            return Err(CrossbarError::ModeViolation(
                "cannot program while the inference path is connected",
            ));
        }
        if group.planes().len() != self.specs.inputs.len() {
            return Err(CrossbarError::DimensionMismatch(format!(
                "group has {} planes, model has {} inputs",
                group.planes().len(),
                self.specs.inputs.len()
            )));
        }
        let mut arrays = Vec::with_capacity(group.planes().len());
        let mut reports = Vec::with_capacity(group.planes().len());
        for plane in group.planes() {
            let mut array = CrossbarArray::new(
                plane.output_levels(),
                plane.input_levels(),
                self.params,
                self.circuit.v_read,
            )?;
            reports.push(array.program_plane(plane, epsilon, programming)?);
            arrays.push(array);
        }
        self.groups.push(arrays);
        Ok(reports)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
        for array in self.groups.iter_mut().flatten() {
            array.set_mode(mode);
        }
    }

    pub fn groups(&self) -> &[Vec<CrossbarArray>] {
        &self.groups
    }

    pub fn circuit(&self) -> &CircuitConfig {
        &self.circuit
    }

    pub fn trace(&self, x: &[f64]) -> Result<HardwareTrace, CrossbarError> {
        if self.mode != Mode::Inference {
            return Err(CrossbarError::ModeViolation(
                "cannot read while planes are being programmed",
            ));
        }
        if x.len() != self.specs.inputs.len() {
            return Err(CrossbarError::DimensionMismatch(format!(
                "expected {} inputs, got {}",
                self.specs.inputs.len(),
                x.len()
            )));
        }
        let columns: Vec<usize> = self
            .specs
            .inputs
            .iter()
            .zip(x)
            .map(|(s, &v)| s.quantize(v))
            .collect();
        let n_out = self.specs.output.levels();
        let v_diode = self.circuit.v_diode;

        let plane_voltages: Vec<Vec<Vec<f64>>> = self
            .groups
            .iter()
            .map(|arrays| {
                (1..=n_out)
                    .map(|row| {
                        arrays
                            .iter()
                            .zip(&columns)
                            .map(|(a, &col)| a.read_voltage(col, row))
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let mut level_voltages = Vec::with_capacity(n_out);
        for t in 0..n_out {
            let mins = plane_voltages
                .iter()
                .map(|group| {
                    let inputs: Vec<_> = group[t].iter().map(|&v| v.into()).collect();
                    diode_min(&inputs, v_diode)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let level = if mins.is_empty() {
                0.0
            } else {
                diode_max(&mins, v_diode)?.volts()
            };
            level_voltages.push(level);
        }
        let readout = self.circuit.defuzz_circuit().evaluate(&level_voltages);
        Ok(HardwareTrace {
            input_levels: columns,
            plane_voltages,
            level_voltages,
            readout,
        })
    }

    /// Crisp output in output-variable units.
    pub fn infer(&self, x: &[f64]) -> Result<f64, CrossbarError> {
        let readout = self.trace(x)?.readout?;
        Ok(self.specs.output.level_value(readout.level))
    }
}
