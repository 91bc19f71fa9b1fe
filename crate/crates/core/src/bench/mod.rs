//! Dataset generators, metrics and experiment drivers for the modeling and
//! classification benchmarks.

mod datasets;
mod metrics;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use datasets::{
    circle_class, f1, f2, gen_circles, gen_f1, gen_f2, gen_two_spiral, iris, load_iris,
    parse_classification_csv, Dataset, DatasetKind, SpiralShape, TestFunction, CIRCLES_DOMAIN,
    FUNCTION_DOMAIN, IRIS_CSV,
};
pub use metrics::{accuracy, fvu, fvu_covered, nearest_class};

use crate::error::Error;
use crate::inference::infer;
use crate::model::{Model, ModelSpecs, TrainingPolicy};
use crate::quant::QuantizationSpec;
use crate::stain::StainRadii;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("predicted has {predicted} values, actual has {actual}")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("no values to score")]
    Empty,
    #[error("actual values have zero variance")]
    ZeroVariance,
    #[error("{count} predictions had no coverage")]
    NoCoveragePresent { count: usize },
    #[error("malformed CSV at row {row}, column {column}: {reason}")]
    MalformedCsv {
        row: usize,
        column: usize,
        reason: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid experiment setup: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    Model(#[from] Error),
}

/// Independent random streams derived from one seed.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    Train = 0,
    Test = 1,
    Split = 2,
}

pub(crate) fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Quantization and stain settings shared by every experiment kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSettings {
    pub input_levels: usize,
    pub output_levels: usize,
    pub radius_in: f64,
    pub radius_out: f64,
    #[serde(default = "full_policy")]
    pub policy: TrainingPolicy,
}

fn full_policy() -> TrainingPolicy {
    TrainingPolicy::Full
}

impl ModelSettings {
    pub fn new(input_levels: usize, output_levels: usize, radius_in: f64, radius_out: f64) -> Self {
        Self {
            input_levels,
            output_levels,
            radius_in,
            radius_out,
            policy: TrainingPolicy::Full,
        }
    }

    pub fn radii(&self) -> Result<StainRadii, Error> {
        StainRadii::new(self.radius_in, self.radius_out)
    }

    /// Specs spanning the dataset's declared ranges.
    pub fn specs_for(&self, data: &Dataset) -> Result<ModelSpecs, Error> {
        let inputs = data
            .input_ranges
            .iter()
            .map(|&(lo, hi)| QuantizationSpec::new(lo, hi, self.input_levels))
            .collect::<Result<Vec<_>, _>>()?;
        let (lo, hi) = data.output_range;
        Ok(ModelSpecs::new(
            inputs,
            QuantizationSpec::new(lo, hi, self.output_levels)?,
        ))
    }

    pub fn train(&self, data: &Dataset) -> Result<Model, Error> {
        Model::train(
            &data.samples,
            self.specs_for(data)?,
            self.radii()?,
            self.policy,
        )
    }
}

/// Predictions for every sample of `data`; `None` where nothing covers the query.
pub fn predict_all(model: &Model, data: &Dataset) -> Result<Vec<Option<f64>>, Error> {
    data.samples
        .iter()
        .map(|s| match infer(model, &s.inputs) {
            Ok(y) => Ok(Some(y)),
            Err(Error::NoCoverage) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Score of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub seed: u64,
    pub groups: usize,
    /// `None` when any test prediction lacked coverage.
    pub fvu: Option<f64>,
    /// Test accuracy in percent.
    pub accuracy: Option<f64>,
    pub train_accuracy: Option<f64>,
    pub no_coverage_count: usize,
}

/// Aggregate over runs. Mean FVU is `None` (reported as NAN) if any run had
/// an uncovered test query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub experiment: String,
    pub fvu: Option<f64>,
    pub accuracy: Option<f64>,
    pub train_accuracy: Option<f64>,
    pub no_coverage_count: usize,
    pub nan_runs: usize,
    pub mean_groups: f64,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunOutcome>,
    pub config: Vec<(String, String)>,
}

impl EvalReport {
    fn from_runs(experiment: String, runs: Vec<RunOutcome>, config: Vec<(String, String)>) -> Self {
        let n = runs.len().max(1) as f64;
        let nan_runs = runs.iter().filter(|r| r.fvu.is_none()).count();
        let regression = runs.iter().any(|r| r.accuracy.is_none());
        let fvu = if regression && nan_runs == 0 {
            Some(runs.iter().filter_map(|r| r.fvu).sum::<f64>() / n)
        } else {
            None
        };
        let mean_of = |f: fn(&RunOutcome) -> Option<f64>| {
            let values: Vec<f64> = runs.iter().filter_map(f).collect();
            (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
        };
        Self {
            experiment,
            fvu,
            accuracy: mean_of(|r| r.accuracy),
            train_accuracy: mean_of(|r| r.train_accuracy),
            no_coverage_count: runs.iter().map(|r| r.no_coverage_count).sum(),
            nan_runs: if regression { nan_runs } else { 0 },
            mean_groups: runs.iter().map(|r| r.groups as f64).sum::<f64>() / n,
            seeds: runs.iter().map(|r| r.seed).collect(),
            runs,
            config,
        }
    }

    pub fn csv_header() -> &'static str {
        "experiment,fvu,accuracy,train_accuracy,no_coverage_count,nan_runs,mean_groups,runs"
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("NAN".to_string(), |v| format!("{v:.6}"));
        let acc = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.4}"));
        format!(
            "{},{},{},{},{},{},{:.2},{}",
            self.experiment,
            if self.accuracy.is_some() {
                String::new()
            } else {
                opt(self.fvu)
            },
            acc(self.accuracy),
            acc(self.train_accuracy),
            self.no_coverage_count,
            self.nan_runs,
            self.mean_groups,
            self.runs.len()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionConfig {
    pub function: TestFunction,
    pub train_count: usize,
    pub test_count: usize,
    pub settings: ModelSettings,
}

impl RegressionConfig {
    /// Grid used for the modeling table: 128 levels everywhere, equal radii,
    /// 1000 fresh test points.
    pub fn table(function: TestFunction, train_count: usize, radius: f64) -> Self {
        Self {
            function,
            train_count,
            test_count: 1000,
            settings: ModelSettings::new(128, 128, radius, radius),
        }
    }

    fn name(&self) -> String {
        format!(
            "{:?}-L{}-R{}",
            self.function, self.train_count, self.settings.radius_in
        )
        .to_lowercase()
    }

    fn echo(&self) -> Vec<(String, String)> {
        let s = &self.settings;
        vec![
            ("function".into(), format!("{:?}", self.function)),
            ("train_count".into(), self.train_count.to_string()),
            ("test_count".into(), self.test_count.to_string()),
            ("input_levels".into(), s.input_levels.to_string()),
            ("output_levels".into(), s.output_levels.to_string()),
            ("radius_in".into(), s.radius_in.to_string()),
            ("radius_out".into(), s.radius_out.to_string()),
            ("policy".into(), format!("{:?}", s.policy)),
        ]
    }
}

/// Train on fresh samples of the function and score FVU on an independent
/// uniform test set.
pub fn run_regression(config: &RegressionConfig, seed: u64) -> Result<RunOutcome, BenchError> {
    let train = config
        .function
        .generate_stream(config.train_count, seed, Stream::Train);
    let test = config
        .function
        .generate_stream(config.test_count, seed, Stream::Test);
    let model = config.settings.train(&train)?;
    let predicted = predict_all(&model, &test)?;
    let actual: Vec<f64> = test.samples.iter().map(|s| s.output).collect();
    let no_coverage_count = predicted.iter().filter(|p| p.is_none()).count();
    let fvu = match fvu_covered(&predicted, &actual) {
        Ok(v) => Some(v),
        Err(BenchError::NoCoveragePresent { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RunOutcome {
        seed,
        groups: model.group_count(),
        fvu,
        accuracy: None,
        train_accuracy: None,
        no_coverage_count,
    })
}

pub fn run_regression_experiment(
    config: &RegressionConfig,
    seeds: &[u64],
) -> Result<EvalReport, BenchError> {
    let runs = seeds
        .iter()
        .map(|&s| run_regression(config, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalReport::from_runs(config.name(), runs, config.echo()))
}

/// Every cell of the modeling table: both functions, 250/550/1000 training
/// samples, radii 10/20/30.
pub fn table1_configs() -> Vec<RegressionConfig> {
    let mut configs = Vec::new();
    for radius in [10.0, 20.0, 30.0] {
        for function in [TestFunction::F1, TestFunction::F2] {
            for count in [250, 550, 1000] {
                configs.push(RegressionConfig::table(function, count, radius));
            }
        }
    }
    configs
}

/// How training and test data are produced for a classification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum ClassificationTask {
    /// Random points on both spirals for training; scored on evenly spaced
    /// points along the spirals.
    TwoSpiral {
        points_per_class: usize,
        dense_per_class: usize,
        shape: SpiralShape,
    },
    /// Uniform points over the square, scored on a fresh uniform sample.
    Circles {
        train_count: usize,
        test_count: usize,
    },
    /// Random train/test partition of a fixed dataset.
    Holdout {
        dataset: Dataset,
        train_count: usize,
    },
}

impl ClassificationTask {
    fn name(&self) -> &'static str {
        match self {
            ClassificationTask::TwoSpiral { .. } => "two-spiral",
            ClassificationTask::Circles { .. } => "circles",
            ClassificationTask::Holdout { .. } => "holdout",
        }
    }

    /// Training and test sets for one seeded run.
    pub fn split(&self, seed: u64) -> Result<(Dataset, Dataset), BenchError> {
        match self {
            ClassificationTask::TwoSpiral {
                points_per_class,
                dense_per_class,
                shape,
            } => Ok((
                shape.generate(*points_per_class, seed),
                shape.dense(*dense_per_class),
            )),
            ClassificationTask::Circles {
                train_count,
                test_count,
            } => Ok((
                datasets::gen_circles_stream(*train_count, seed, Stream::Train),
                datasets::gen_circles_stream(*test_count, seed, Stream::Test),
            )),
            ClassificationTask::Holdout {
                dataset,
                train_count,
            } => {
                if *train_count == 0 || *train_count >= dataset.len() {
                    return Err(BenchError::InvalidSetup(format!(
                        "train count {train_count} must leave a non-empty test set out of {}",
                        dataset.len()
                    )));
                }
                let mut order: Vec<usize> = (0..dataset.len()).collect();
                order.shuffle(&mut rng_for(seed, Stream::Split));
                let pick = |idx: &[usize]| {
                    dataset.with_samples(idx.iter().map(|&i| dataset.samples[i].clone()).collect())
                };
                Ok((pick(&order[..*train_count]), pick(&order[*train_count..])))
            }
        }
    }
}

/// Train and score one seeded classification run.
pub fn run_classification(
    task: &ClassificationTask,
    settings: &ModelSettings,
    seed: u64,
) -> Result<RunOutcome, BenchError> {
    let (train, test) = task.split(seed)?;
    let classes = train
        .class_count()
        .ok_or_else(|| BenchError::InvalidSetup("dataset is not a classification set".into()))?;
    let model = settings.train(&train)?;
    let labels = |d: &Dataset| d.samples.iter().map(|s| s.output).collect::<Vec<_>>();
    let test_pred = predict_all(&model, &test)?;
    let train_pred = predict_all(&model, &train)?;
    Ok(RunOutcome {
        seed,
        groups: model.group_count(),
        fvu: None,
        accuracy: Some(accuracy(&test_pred, &labels(&test), classes)),
        train_accuracy: Some(accuracy(&train_pred, &labels(&train), classes)),
        no_coverage_count: test_pred.iter().filter(|p| p.is_none()).count(),
    })
}

pub fn run_classification_experiment(
    task: &ClassificationTask,
    settings: &ModelSettings,
    seeds: &[u64],
) -> Result<EvalReport, BenchError> {
    let runs = seeds
        .iter()
        .map(|&s| run_classification(task, settings, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut config = vec![
        (
            "input_levels".to_string(),
            settings.input_levels.to_string(),
        ),
        (
            "output_levels".to_string(),
            settings.output_levels.to_string(),
        ),
        ("radius_in".to_string(), settings.radius_in.to_string()),
        ("radius_out".to_string(), settings.radius_out.to_string()),
        ("policy".to_string(), format!("{:?}", settings.policy)),
    ];
    match task {
        ClassificationTask::TwoSpiral {
            points_per_class,
            dense_per_class,
            shape,
        } => {
            config.push(("points_per_class".into(), points_per_class.to_string()));
            config.push(("dense_per_class".into(), dense_per_class.to_string()));
            config.push(("turns".into(), shape.turns.to_string()));
        }
        ClassificationTask::Circles {
            train_count,
            test_count,
        } => {
            config.push(("train_count".into(), train_count.to_string()));
            config.push(("test_count".into(), test_count.to_string()));
        }
        ClassificationTask::Holdout {
            dataset,
            train_count,
        } => {
            config.push(("train_count".into(), train_count.to_string()));
            config.push((
                "test_count".into(),
                (dataset.len() - train_count).to_string(),
            ));
        }
    }
    Ok(EvalReport::from_runs(task.name().to_string(), runs, config))
}

/// Default two-spiral setup: 200 points per spiral, 128 input levels and 2
/// output levels.
pub fn spiral_defaults() -> (ClassificationTask, ModelSettings) {
    (
        ClassificationTask::TwoSpiral {
            points_per_class: 200,
            dense_per_class: 1000,
            shape: SpiralShape::default(),
        },
        ModelSettings::new(128, 2, 16.0, 1.0),
    )
}

/// Default circles setup: 300 training points, 256 input levels, 32 output
/// levels, radii 50 and 16.
pub fn circles_defaults() -> (ClassificationTask, ModelSettings) {
    (
        ClassificationTask::Circles {
            train_count: 300,
            test_count: 1000,
        },
        ModelSettings::new(256, 32, 50.0, 16.0),
    )
}

/// Default Iris setup: 100 training / 50 test samples per split.
pub fn iris_defaults() -> (ClassificationTask, ModelSettings) {
    (
        ClassificationTask::Holdout {
            dataset: iris(),
            train_count: 100,
        },
        ModelSettings::new(64, 3, 12.0, 1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent() {
        let a = TestFunction::F2.generate_stream(5, 3, Stream::Train);
        let b = TestFunction::F2.generate_stream(5, 3, Stream::Test);
        assert_ne!(a, b);
    }

    #[test]
    fn regression_run_is_reproducible() {
        let config = RegressionConfig {
            function: TestFunction::F2,
            train_count: 200,
            test_count: 100,
            settings: ModelSettings::new(32, 32, 8.0, 4.0),
        };
        let a = run_regression_experiment(&config, &[1, 2]).unwrap();
        let b = run_regression_experiment(&config, &[1, 2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs[0].groups, 200);
    }

    #[test]
    fn nan_runs_poison_the_mean() {
        let config = RegressionConfig {
            function: TestFunction::F1,
            train_count: 5,
            test_count: 200,
            settings: ModelSettings::new(128, 128, 2.0, 2.0),
        };
        let report = run_regression_experiment(&config, &[0]).unwrap();
        assert_eq!(report.fvu, None);
        assert_eq!(report.nan_runs, 1);
        assert!(report.no_coverage_count > 0);
        assert!(report.csv_row().contains("NAN"));
    }

    #[test]
    fn holdout_partitions_dataset() {
        let task = ClassificationTask::Holdout {
            dataset: iris(),
            train_count: 100,
        };
        let (train, test) = task.split(4).unwrap();
        assert_eq!((train.len(), test.len()), (100, 50));
        for s in &test.samples {
            assert!(
                !train.samples.contains(s) || iris().samples.iter().filter(|t| *t == s).count() > 1
            );
        }
        let bad = ClassificationTask::Holdout {
            dataset: iris(),
            train_count: 150,
        };
        assert!(matches!(bad.split(0), Err(BenchError::InvalidSetup(_))));
    }

    #[test]
    fn classification_report_is_deterministic() {
        let (task, settings) = circles_defaults();
        let a = run_classification_experiment(&task, &settings, &[3]).unwrap();
        let b = run_classification_experiment(&task, &settings, &[3]).unwrap();
        assert_eq!(a, b);
        let acc = a.accuracy.unwrap();
        assert!((0.0..=100.0).contains(&acc));
    }

    #[test]
    fn table_grid_has_eighteen_cells() {
        let configs = table1_configs();
        assert_eq!(configs.len(), 18);
        assert!(configs
            .iter()
            .all(|c| c.settings.input_levels == 128 && c.test_count == 1000));
    }
}
