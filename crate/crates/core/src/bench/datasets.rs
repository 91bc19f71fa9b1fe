//! Benchmark dataset generators and the Iris loader.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{rng_for, BenchError, Stream};
use crate::model::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Regression,
    Classification { classes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub input_ranges: Vec<(f64, f64)>,
    pub output_range: (f64, f64),
    pub kind: DatasetKind,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_count(&self) -> Option<usize> {
        match self.kind {
            DatasetKind::Classification { classes } => Some(classes),
            DatasetKind::Regression => None,
        }
    }

    /// Same ranges and kind, different samples.
    pub fn with_samples(&self, samples: Vec<Sample>) -> Self {
        Self {
            samples,
            ..self.clone()
        }
    }
}

/// The two-input benchmark surfaces, defined on `1 < x1, x2 < 10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    F1,
    F2,
}

pub const FUNCTION_DOMAIN: (f64, f64) = (1.0, 10.0);

pub fn f1(x1: f64, x2: f64) -> f64 {
    (1.0 + x1.powi(-2) + x2.powf(-1.5)).powi(2)
}

pub fn f2(x1: f64, x2: f64) -> f64 {
    let s1 = x1.sin() / x1;
    let s2 = x2.sin() / x2;
    (2.0 * s1 * s1 + 3.0 * s2 * s2).sqrt()
}

impl TestFunction {
    pub fn eval(self, x1: f64, x2: f64) -> f64 {
        match self {
            TestFunction::F1 => f1(x1, x2),
            TestFunction::F2 => f2(x1, x2),
        }
    }

    /// Closed range covering the function over its domain.
    pub fn output_range(self) -> (f64, f64) {
        let (lo, hi) = FUNCTION_DOMAIN;
        match self {
            // decreasing in both arguments
            TestFunction::F1 => (f1(hi, hi), f1(lo, lo)),
            // (sin x / x)^2 peaks at the left end of the domain and vanishes at pi
            TestFunction::F2 => (0.0, f2(lo, lo)),
        }
    }

    pub fn generate(self, count: usize, seed: u64) -> Dataset {
        self.generate_stream(count, seed, Stream::Train)
    }

    pub(crate) fn generate_stream(self, count: usize, seed: u64, stream: Stream) -> Dataset {
        let mut rng = rng_for(seed, stream);
        let samples = (0..count)
            .map(|_| {
                let x1 = open_uniform(&mut rng, FUNCTION_DOMAIN);
                let x2 = open_uniform(&mut rng, FUNCTION_DOMAIN);
                Sample::new([x1, x2], self.eval(x1, x2))
            })
            .collect();
        Dataset {
            samples,
            input_ranges: vec![FUNCTION_DOMAIN; 2],
            output_range: self.output_range(),
            kind: DatasetKind::Regression,
        }
    }
}

fn open_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    loop {
        let x = rng.gen_range(lo..hi);
        if x > lo {
            return x;
        }
    }
}

pub fn gen_f1(count: usize, seed: u64) -> Dataset {
    TestFunction::F1.generate(count, seed)
}

pub fn gen_f2(count: usize, seed: u64) -> Dataset {
    TestFunction::F2.generate(count, seed)
}

/// Intertwined spirals with `turns` revolutions out to radius `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralShape {
    pub turns: f64,
    pub r_max: f64,
}

impl Default for SpiralShape {
    fn default() -> Self {
        Self {
            turns: 3.0,
            r_max: 1.0,
        }
    }
}

impl SpiralShape {
    /// Point at parameter `t` in `[0, 1]` on the spiral of class 1 or 2.
    pub fn point(&self, t: f64, class: usize) -> [f64; 2] {
        let r = self.r_max * t;
        let theta = 2.0 * PI * self.turns * t;
        let (x, y) = (r * theta.cos(), r * theta.sin());
        if class == 1 {
            [x, y]
        } else {
            [-x, -y]
        }
    }

    fn dataset(&self, samples: Vec<Sample>) -> Dataset {
        Dataset {
            samples,
            input_ranges: vec![(-self.r_max, self.r_max); 2],
            output_range: (1.0, 2.0),
            kind: DatasetKind::Classification { classes: 2 },
        }
    }

    /// `points_per_class` random points on each spiral, class 1 then class 2.
    pub fn generate(&self, points_per_class: usize, seed: u64) -> Dataset {
        let mut rng = rng_for(seed, Stream::Train);
        let ts: Vec<f64> = (0..points_per_class)
            .map(|_| rng.gen_range(0.0..=1.0))
            .collect();
        self.dataset(self.labelled(&ts))
    }

    /// Evenly spaced points along both spirals.
    pub fn dense(&self, points_per_class: usize) -> Dataset {
        let n = points_per_class.max(2);
        let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        self.dataset(self.labelled(&ts))
    }

    fn labelled(&self, ts: &[f64]) -> Vec<Sample> {
        [1usize, 2]
            .iter()
            .flat_map(|&class| {
                ts.iter()
                    .map(move |&t| Sample::new(self.point(t, class), class as f64))
            })
            .collect()
    }
}

pub fn gen_two_spiral(points_per_class: usize, seed: u64) -> Dataset {
    SpiralShape::default().generate(points_per_class, seed)
}

pub const CIRCLES_DOMAIN: (f64, f64) = (-3.0, 3.0);

/// Class of a point for the concentric-circles task, or `None` on a boundary.
pub fn circle_class(x1: f64, x2: f64) -> Option<usize> {
    let r2 = x1 * x1 + x2 * x2;
    if r2 < 1.0 {
        Some(1)
    } else if r2 > 1.0 && r2 < 4.0 {
        Some(2)
    } else if r2 > 4.0 {
        Some(3)
    } else {
        None
    }
}

pub fn gen_circles(count: usize, seed: u64) -> Dataset {
    gen_circles_stream(count, seed, Stream::Train)
}

pub(crate) fn gen_circles_stream(count: usize, seed: u64, stream: Stream) -> Dataset {
    let mut rng = rng_for(seed, stream);
    let mut samples = Vec::with_capacity(count);
    while samples.len() < count {
        let x1 = rng.gen_range(CIRCLES_DOMAIN.0..=CIRCLES_DOMAIN.1);
        let x2 = rng.gen_range(CIRCLES_DOMAIN.0..=CIRCLES_DOMAIN.1);
        if let Some(class) = circle_class(x1, x2) {
            samples.push(Sample::new([x1, x2], class as f64));
        }
    }
    Dataset {
        samples,
        input_ranges: vec![CIRCLES_DOMAIN; 2],
        output_range: (1.0, 3.0),
        kind: DatasetKind::Classification { classes: 3 },
    }
}

/// The Iris measurements bundled with the crate.
pub const IRIS_CSV: &str = include_str!("../../data/iris.csv");

/// Parse a numeric-features-plus-label CSV. A non-numeric first row is
/// treated as a header. Labels are numbered 1, 2, ... in order of first
/// appearance.
pub fn parse_classification_csv(text: &str) -> Result<Dataset, BenchError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut labels: Vec<String> = Vec::new();
    let mut samples = Vec::new();
    let mut width = None;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| BenchError::MalformedCsv {
            row: e.position().map_or(index + 1, |p| p.line() as usize),
            column: 0,
            reason: e.to_string(),
        })?;
        let row = record.position().map_or(index + 1, |p| p.line() as usize);
        if samples.is_empty() && width.is_none() && record[0].parse::<f64>().is_err() {
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected || record.len() < 2 {
            return Err(BenchError::MalformedCsv {
                row,
                column: record.len().min(expected) + 1,
                reason: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let label = &record[record.len() - 1];
        let inputs = (0..record.len() - 1)
            .map(|c| {
                let f = &record[c];
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| BenchError::MalformedCsv {
                        row,
                        column: c + 1,
                        reason: format!("not a number: {f:?}"),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let class = match labels.iter().position(|l| l == label) {
            Some(i) => i + 1,
            None => {
                labels.push(label.to_string());
                labels.len()
            }
        };
        samples.push(Sample::new(inputs, class as f64));
    }
    if samples.is_empty() {
        return Err(BenchError::MalformedCsv {
            row: 0,
            column: 0,
            reason: "no data rows".into(),
        });
    }
    let n_features = samples[0].inputs.len();
    let input_ranges = (0..n_features)
        .map(|j| {
            samples
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s.inputs[j]), hi.max(s.inputs[j]))
                })
        })
        .collect();
    let classes = labels.len();
    Ok(Dataset {
        samples,
        input_ranges,
        output_range: (1.0, classes.max(2) as f64),
        kind: DatasetKind::Classification { classes },
    })
}

/// Load an Iris-shaped file: four numeric features, three classes.
pub fn load_iris(path: impl AsRef<Path>) -> Result<Dataset, BenchError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
    check_iris(parse_classification_csv(&text)?)
}

pub fn iris() -> Dataset {
    check_iris(parse_classification_csv(IRIS_CSV).expect("bundled data parses"))
        .expect("bundled data is iris")
}

fn check_iris(data: Dataset) -> Result<Dataset, BenchError> {
    if data.input_ranges.len() != 4 || data.class_count() != Some(3) {
        return Err(BenchError::MalformedCsv {
            row: 0,
            column: 0,
            reason: format!(
                "expected 4 features and 3 classes, found {} and {}",
                data.input_ranges.len(),
                data.class_count().unwrap_or(0)
            ),
        });
    }
    Ok(data)
}
