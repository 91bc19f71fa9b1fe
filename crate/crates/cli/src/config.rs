use std::path::{Path, PathBuf};

use inkdrop::bench::{
    iris, load_iris, parse_classification_csv, ClassificationTask, Dataset, DatasetKind,
    ModelSettings, SpiralShape, TestFunction,
};
use inkdrop::crossbar::{CircuitConfig, DeviceParams, ProgrammingConfig};
use inkdrop::fixtures::worked_example_samples;
use inkdrop::TrainingPolicy;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Regression,
    TwoSpiral,
    Circles,
    Iris,
    Csv,
    Fixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Full,
    ErrorGated,
    Merged,
}

/// Everything one run needs. Unset fields take task-dependent defaults in
/// [`RunConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub function: Option<TestFunction>,
    pub dataset: Option<PathBuf>,
    pub train_count: Option<usize>,
    pub test_count: Option<usize>,
    pub points_per_class: Option<usize>,
    pub dense_per_class: Option<usize>,
    pub turns: Option<f64>,
    pub input_levels: Option<usize>,
    pub output_levels: Option<usize>,
    pub radius_in: Option<f64>,
    pub radius_out: Option<f64>,
    pub policy: Option<PolicyKind>,
    pub tolerance: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub epsilons: Option<Vec<f64>>,
    pub queries: Option<usize>,
    pub query_seed: Option<u64>,
    pub device: Option<DeviceParams>,
    pub circuit: Option<CircuitConfig>,
    pub programming: Option<ProgrammingConfig>,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Insert `value` at a dotted `key` path, creating tables on the way.
fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts = key.split('.').peekable();
    let mut current = table;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(input(format!("bad key {key:?}")));
        }
        if parts.peek().is_none() {
            current.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| input(format!("{part} in {key:?} is not a table")))?;
    }
    Ok(())
}

/// Parse `key=value`; the value is read as a TOML literal, or as a bare
/// string if it is not one.
fn parse_override(raw: &str) -> Result<(String, toml::Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| input(format!("override {raw:?} is not key=value")))?;
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key.trim().to_string(), parsed))
}

impl RunConfig {
    /// Read an optional config file and apply `key=value` overrides on top.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| input(format!("{}: {e}", p.display())))?
                .parse::<toml::Table>()
                .map_err(|e| input(format!("{}: {e}", p.display())))?,
            None => toml::Table::new(),
        };
        for raw in overrides {
            let (key, value) = parse_override(raw)?;
            set_path(&mut table, &key, value)?;
        }
        table.try_into().map_err(|e| input(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fill every unset field with the defaults for the task and check the
    /// result.
    pub fn resolve(mut self, fallback: Task) -> Result<Self, CliError> {
        let task = *self.task.get_or_insert(fallback);
        let defaults = match task {
            Task::Regression => (128, 128, 10.0, 10.0, 10),
            Task::TwoSpiral => (128, 2, 16.0, 1.0, 1),
            Task::Circles => (256, 32, 50.0, 16.0, 20),
            Task::Iris => (64, 3, 12.0, 1.0, 100),
            Task::Csv => (64, 0, 12.0, 1.0, 10),
            Task::Fixture => (11, 2, 3.0, 1.5, 1),
        };
        match task {
            Task::Regression => {
                self.function.get_or_insert(TestFunction::F2);
                self.train_count.get_or_insert(1000);
                self.test_count.get_or_insert(1000);
            }
            Task::TwoSpiral => {
                self.points_per_class.get_or_insert(200);
                self.dense_per_class.get_or_insert(1000);
                self.turns.get_or_insert(SpiralShape::default().turns);
            }
            Task::Circles => {
                self.train_count.get_or_insert(300);
                self.test_count.get_or_insert(1000);
            }
            Task::Iris => {
                self.train_count.get_or_insert(100);
            }
            Task::Csv => {
                let data = self.csv_dataset()?;
                self.train_count.get_or_insert(data.len() * 2 / 3);
                let classes = data.class_count().unwrap_or(2);
                self.output_levels.get_or_insert(classes.max(2));
            }
            Task::Fixture => {}
        }
        self.input_levels.get_or_insert(defaults.0);
        self.output_levels.get_or_insert(defaults.1);
        self.radius_in.get_or_insert(defaults.2);
        self.radius_out.get_or_insert(defaults.3);
        self.policy.get_or_insert(PolicyKind::Full);
        self.seeds.get_or_insert_with(|| (0..defaults.4).collect());
        self.epsilons
            .get_or_insert_with(|| vec![0.01, 0.005, 0.002]);
        self.queries.get_or_insert(500);
        self.query_seed.get_or_insert(0);
        self.device.get_or_insert_with(DeviceParams::default);
        self.circuit.get_or_insert_with(CircuitConfig::default);
        self.programming
            .get_or_insert_with(ProgrammingConfig::default);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.settings().radii().is_err() {
            return Err(input("radius_in and radius_out must be positive"));
        }
        if self.input_levels() < 2 || self.output_levels() < 2 {
            return Err(input("input_levels and output_levels must be at least 2"));
        }
        match (self.policy, self.tolerance) {
            (Some(PolicyKind::ErrorGated), None) => {
                return Err(input("policy error-gated needs a tolerance"))
            }
            (Some(PolicyKind::ErrorGated), Some(t)) if !(t >= 0.0) => {
                return Err(input("tolerance must be non-negative"))
            }
            (Some(p), Some(_)) if p != PolicyKind::ErrorGated => {
                return Err(input("tolerance only applies to policy error-gated"))
            }
            _ => {}
        }
        if self.seeds().is_empty() {
            return Err(input("seeds must not be empty"));
        }
        if self.epsilons().iter().any(|&e| !(e > 0.0)) {
            return Err(input("epsilons must be positive"));
        }
        if matches!(self.train_count, Some(0)) || matches!(self.test_count, Some(0)) {
            return Err(input("train_count and test_count must be positive"));
        }
        if matches!(self.points_per_class, Some(0)) || matches!(self.dense_per_class, Some(0)) {
            return Err(input("spiral point counts must be positive"));
        }
        if matches!(self.turns, Some(t) if !(t > 0.0)) {
            return Err(input("turns must be positive"));
        }
        let device = self.device();
        device.validate().map_err(|e| input(e.to_string()))?;
        self.programming()
            .validate(&device)
            .map_err(|e| input(e.to_string()))?;
        let circuit = self.circuit();
        if !(circuit.v_read.abs() < device.v_threshold && circuit.v_read != 0.0) {
            return Err(input(
                "circuit.v_read must be nonzero and below the device threshold",
            ));
        }
        Ok(())
    }

    pub fn task(&self) -> Task {
        self.task.expect("resolved")
    }

    pub fn seeds(&self) -> &[u64] {
        self.seeds.as_deref().expect("resolved")
    }

    pub fn epsilons(&self) -> &[f64] {
        self.epsilons.as_deref().expect("resolved")
    }

    pub fn input_levels(&self) -> usize {
        self.input_levels.expect("resolved")
    }

    pub fn output_levels(&self) -> usize {
        self.output_levels.expect("resolved")
    }

    pub fn device(&self) -> DeviceParams {
        self.device.expect("resolved")
    }

    pub fn circuit(&self) -> CircuitConfig {
        self.circuit.expect("resolved")
    }

    pub fn programming(&self) -> ProgrammingConfig {
        self.programming.expect("resolved")
    }

    pub fn policy(&self) -> TrainingPolicy {
        match self.policy.expect("resolved") {
            PolicyKind::Full => TrainingPolicy::Full,
            PolicyKind::Merged => TrainingPolicy::Merged,
            PolicyKind::ErrorGated => TrainingPolicy::ErrorGated {
                tolerance: self.tolerance.unwrap_or(0.0),
            },
        }
    }

    pub fn settings(&self) -> ModelSettings {
        ModelSettings {
            input_levels: self.input_levels.unwrap_or(2),
            output_levels: self.output_levels.unwrap_or(2),
            radius_in: self.radius_in.unwrap_or(0.0),
            radius_out: self.radius_out.unwrap_or(0.0),
            policy: self.policy(),
        }
    }

    fn csv_dataset(&self) -> Result<Dataset, CliError> {
        let path = self
            .dataset
            .as_ref()
            .ok_or_else(|| input("task csv needs a dataset path"))?;
        let text =
            std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        parse_classification_csv(&text).map_err(|e| input(format!("{}: {e}", path.display())))
    }

    /// Classification setup for the task, if it is one.
    pub fn classification_task(&self) -> Result<Option<ClassificationTask>, CliError> {
        let get = |v: Option<usize>| v.expect("resolved");
        Ok(Some(match self.task() {
            Task::TwoSpiral => ClassificationTask::TwoSpiral {
                points_per_class: get(self.points_per_class),
                dense_per_class: get(self.dense_per_class),
                shape: SpiralShape {
                    turns: self.turns.expect("resolved"),
                    ..SpiralShape::default()
                },
            },
            Task::Circles => ClassificationTask::Circles {
                train_count: get(self.train_count),
                test_count: get(self.test_count),
            },
            Task::Iris => {
                let dataset = match &self.dataset {
                    Some(p) => load_iris(p).map_err(|e| input(e.to_string()))?,
                    None => iris(),
                };
                ClassificationTask::Holdout {
                    dataset,
                    train_count: get(self.train_count),
                }
            }
            Task::Csv => ClassificationTask::Holdout {
                dataset: self.csv_dataset()?,
                train_count: get(self.train_count),
            },
            Task::Regression | Task::Fixture => return Ok(None),
        }))
    }

    /// Training set of the first seed.
    pub fn training_data(&self) -> Result<Dataset, CliError> {
        let seed = self.seeds()[0];
        match self.task() {
            Task::Regression => Ok(self
                .function
                .expect("resolved")
                .generate(self.train_count.expect("resolved"), seed)),
            Task::Fixture => Ok(Dataset {
                samples: worked_example_samples(),
                input_ranges: vec![(0.0, 5.0); 2],
                output_range: (1.0, 2.0),
                kind: DatasetKind::Regression,
            }),
            _ => {
                let task = self.classification_task()?.expect("classification task");
                let (train, _) = task.split(seed).map_err(|e| input(e.to_string()))?;
                Ok(train)
            }
        }
    }
}
