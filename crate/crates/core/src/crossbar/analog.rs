//! Diode min/max stages and the two-stage defuzzification circuit.
//!
//! Diodes follow the ideal-switch-plus-constant-drop model. Because a min
//! stage adds the drop and a max stage subtracts it, node voltages are kept
//! as an ideal signal plus an accumulated offset, so the cancellation through
//! a min-then-max cascade is exact rather than subject to rounding.

use serde::{Deserialize, Serialize};

use super::CrossbarError;

/// A node voltage: `signal + offset`, where `offset` collects diode drops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedVoltage {
    pub signal: f64,
    pub offset: f64,
}

impl BiasedVoltage {
    pub fn volts(&self) -> f64 {
        self.signal + self.offset
    }
}

impl From<f64> for BiasedVoltage {
    fn from(v: f64) -> Self {
        Self {
            signal: v,
            offset: 0.0,
        }
    }
}

fn common_offset(inputs: &[BiasedVoltage]) -> Result<f64, CrossbarError> {
    let first = inputs.first().ok_or(CrossbarError::EmptyInput)?.offset;
    if inputs.iter().any(|v| v.offset != first) {
        return Err(CrossbarError::MismatchedOffsets);
    }
    Ok(first)
}

/// T-norm circuit: `min(inputs) + V_D(on)`.
pub fn diode_min(inputs: &[BiasedVoltage], v_diode: f64) -> Result<BiasedVoltage, CrossbarError> {
    let offset = common_offset(inputs)?;
    let signal = inputs
        .iter()
        .map(|v| v.signal)
        .fold(f64::INFINITY, f64::min);
    Ok(BiasedVoltage {
        signal,
        offset: offset + v_diode,
    })
}

/// S-norm circuit: `max(inputs) - V_D(on)`.
pub fn diode_max(inputs: &[BiasedVoltage], v_diode: f64) -> Result<BiasedVoltage, CrossbarError> {
    let offset = common_offset(inputs)?;
    let signal = inputs
        .iter()
        .map(|v| v.signal)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BiasedVoltage {
        signal,
        offset: offset - v_diode,
    })
}

/// Weighted-average defuzzifier built from two inverting summers and an
/// analog divider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefuzzCircuit {
    /// Unit resistance `R` of the summer ladders, ohms.
    pub unit_resistance: f64,
    /// Divider refuses denominators smaller than this, volts.
    pub divider_floor: f64,
}

impl Default for DefuzzCircuit {
    fn default() -> Self {
        Self {
            unit_resistance: 1e3,
            divider_floor: 1e-4 * 0.5,
        }
    }
}

/// Node voltages of the defuzzification circuit for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefuzzReadout {
    /// `-sum(mu_i * i)`.
    pub stage1: f64,
    /// `-sum(mu_i)`.
    pub stage2: f64,
    /// `stage1 / stage2`, a fractional output level index in `1..=n_y`.
    pub level: f64,
}

impl DefuzzCircuit {
    /// Evaluate for level voltages `mu[0..n_y]`, where `mu[i - 1]` belongs to level `i`.
    pub fn evaluate(&self, mu: &[f64]) -> Result<DefuzzReadout, CrossbarError> {
        let n = mu.len() as f64;
        let r = self.unit_resistance;
        // stage 1: feedback n*R, input resistor (n/i)*R on level i
        let feedback = n * r;
        let stage1 = -mu
            .iter()
            .enumerate()
            .map(|(k, &v)| v * feedback / (n / (k + 1) as f64 * r))
            .sum::<f64>();
        // stage 2: unity-gain summer
        let stage2 = -mu.iter().map(|&v| v * r / r).sum::<f64>();
        if !(stage2.abs() >= self.divider_floor) {
            return Err(CrossbarError::DividerUnderflow {
                denominator: stage2,
            });
        }
        Ok(DefuzzReadout {
            stage1,
            stage2,
            level: stage1 / stage2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const VD: f64 = 0.7;

    fn volts(v: &[f64]) -> Vec<BiasedVoltage> {
        v.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn min_stage_adds_drop() {
        let out = diode_min(&volts(&[0.3, 0.7]), VD).unwrap();
        assert!((out.volts() - 1.0).abs() < 1e-15);
        let single = diode_min(&volts(&[0.42]), VD).unwrap();
        assert_eq!(single.signal, 0.42);
        assert_eq!(single.offset, VD);
    }

    #[test]
    fn max_stage_subtracts_drop() {
        let out = diode_max(&volts(&[0.87, 1.04]), VD).unwrap();
        assert!((out.volts() - 0.34).abs() < 1e-12);
        let single = diode_max(&volts(&[0.42]), VD).unwrap();
        assert_eq!(single.offset, -VD);
    }

    #[test]
    fn empty_and_mixed_inputs_rejected() {
        assert_eq!(diode_min(&[], VD), Err(CrossbarError::EmptyInput));
        assert_eq!(diode_max(&[], VD), Err(CrossbarError::EmptyInput));
        let mixed = [
            BiasedVoltage::from(0.1),
            BiasedVoltage {
                signal: 0.2,
                offset: VD,
            },
        ];
        assert_eq!(diode_max(&mixed, VD), Err(CrossbarError::MismatchedOffsets));
    }

    #[test]
    fn defuzz_examples() {
        let c = DefuzzCircuit::default();
        let out = c.evaluate(&[0.67, 0.34]).unwrap();
        assert!((out.level - 1.3366).abs() < 1e-4);
        assert!((out.stage1 + 1.35).abs() < 1e-12);
        assert!((out.stage2 + 1.01).abs() < 1e-12);
        let one_hot = c.evaluate(&[0.0, 0.0, 0.3, 0.0]).unwrap();
        assert!((one_hot.level - 3.0).abs() < 1e-12);
        let halved = c.evaluate(&[0.335, 0.17]).unwrap();
        assert!((halved.level - out.level).abs() < 1e-12);
    }

    #[test]
    fn defuzz_underflow() {
        let c = DefuzzCircuit::default();
        assert!(matches!(
            c.evaluate(&[0.0, 0.0]),
            Err(CrossbarError::DividerUnderflow { .. })
        ));
        assert!(matches!(
            c.evaluate(&[1e-6, 0.0]),
            Err(CrossbarError::DividerUnderflow { .. })
        ));
        assert!(matches!(
            c.evaluate(&[]),
            Err(CrossbarError::DividerUnderflow { .. })
        ));
    }

    proptest! {
        #[test]
        fn min_is_permutation_invariant(mut v in prop::collection::vec(-2.0f64..2.0, 1..10), seed in any::<u64>()) {
            let a = diode_min(&volts(&v), VD).unwrap();
            let k = (seed as usize) % v.len();
            v.rotate_left(k);
            v.reverse();
            prop_assert_eq!(a, diode_min(&volts(&v), VD).unwrap());
        }

        #[test]
        fn cascade_has_no_bias(groups in prop::collection::vec(prop::collection::vec(0.0f64..0.5, 1..5), 1..6)) {
            let mins: Vec<_> = groups.iter().map(|g| diode_min(&volts(g), VD).unwrap()).collect();
            let out = diode_max(&mins, VD).unwrap();
            let ideal = groups
                .iter()
                .map(|g| g.iter().copied().fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(out.offset, 0.0);
            prop_assert_eq!(out.volts(), ideal);
        }
    }
}
