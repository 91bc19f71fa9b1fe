use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use inkdrop::bench::{
    run_classification_experiment, run_regression_experiment, table1_configs, EvalReport,
};
use inkdrop::crossbar::{CrossbarError, HardwareModel};
use inkdrop::io::{read_model, write_model, write_plane_csv};
use inkdrop::{infer_trace, Error, Model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Task};
use crate::CliError;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn internal(err: impl std::fmt::Display) -> CliError {
    CliError::Internal(err.to_string())
}

fn load_model(path: &Path) -> Result<Model, CliError> {
    let file = File::open(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    read_model(BufReader::new(file)).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn train(config: Option<&Path>, overrides: &[String], out: &Path) -> Result<(), CliError> {
    let config = RunConfig::load(config, overrides)?.resolve(Task::Fixture)?;
    let data = config.training_data()?;
    let model = config
        .settings()
        .train(&data)
        .map_err(|e| input(e.to_string()))?;
    let mut file = create(out)?;
    write_model(&model, &mut file).map_err(internal)?;
    file.flush().map_err(internal)?;
    println!("samples: {}", data.len());
    println!("groups: {}", model.group_count());
    println!("memory_bytes: {}", model.memory_bytes());
    Ok(())
}

pub fn infer(model_path: &Path, inputs: &[f64], trace: bool) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    if model.input_count() != inputs.len() {
        return Err(input(format!(
            "model takes {} inputs, got {}",
            model.input_count(),
            inputs.len()
        )));
    }
    if trace {
        let trace = infer_trace(&model, inputs).map_err(internal)?;
        println!(
            "{}",
            serde_json::to_string_pretty(&trace).map_err(internal)?
        );
        return match trace.crisp {
            Some(_) => Ok(()),
            None => Err(CliError::NoCoverage),
        };
    }
    match inkdrop::infer(&model, inputs) {
        Ok(y) => {
            println!("{y:.4}");
            Ok(())
        }
        Err(Error::NoCoverage) => Err(CliError::NoCoverage),
        Err(e) => Err(internal(e)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bench {
    Table1,
    Spiral,
    Circles,
    Iris,
}

impl Bench {
    fn name(self) -> &'static str {
        match self {
            Bench::Table1 => "table1",
            Bench::Spiral => "spiral",
            Bench::Circles => "circles",
            Bench::Iris => "iris",
        }
    }

    fn task(self) -> Task {
        match self {
            Bench::Table1 => Task::Regression,
            Bench::Spiral => Task::TwoSpiral,
            Bench::Circles => Task::Circles,
            Bench::Iris => Task::Iris,
        }
    }
}

/// One expected-band comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub name: String,
    pub value: Option<f64>,
    pub expected: String,
    pub pass: bool,
}

fn band(name: &str, value: Option<f64>, lo: f64, hi: f64) -> BandCheck {
    BandCheck {
        name: name.to_string(),
        value,
        expected: format!("[{lo}, {hi}]"),
        pass: value.is_some_and(|v| (lo..=hi).contains(&v)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub bench: String,
    /// Resolved configuration; feeding it back reproduces the run.
    pub config: RunConfig,
    pub reports: Vec<EvalReport>,
    pub checks: Vec<BandCheck>,
}

fn table1_checks(reports: &[EvalReport]) -> Vec<BandCheck> {
    let find = |name: &str| reports.iter().find(|r| r.experiment == name);
    let fvu = |name: &str| find(name).and_then(|r| r.fvu);
    let mut checks = vec![
        band("f2-l1000-r10 fvu", fvu("f2-l1000-r10"), 0.0, 0.05),
        band("f1-l1000-r10 fvu", fvu("f1-l1000-r10"), 0.0, 0.15),
        band("f2-l1000-r30 fvu", fvu("f2-l1000-r30"), 0.05, 0.25),
    ];
    for name in ["f1-l250-r10", "f2-l250-r10"] {
        let nan_runs = find(name).map(|r| r.nan_runs as f64);
        checks.push(BandCheck {
            name: format!("{name} uncovered runs"),
            value: nan_runs,
            expected: ">= 1".into(),
            pass: nan_runs.is_some_and(|n| n >= 1.0),
        });
    }
    checks
}

pub fn run_bench(kind: Bench, config: &RunConfig) -> Result<BenchOutput, CliError> {
    if config.task() != kind.task() {
        return Err(input(format!(
            "bench {} cannot run task {:?}",
            kind.name(),
            config.task()
        )));
    }
    let (reports, checks) = match kind {
        Bench::Table1 => {
            let reports = table1_configs()
                .into_iter()
                .map(|mut cell| {
                    cell.test_count = config.test_count.expect("resolved");
                    cell.settings.policy = config.policy();
                    run_regression_experiment(&cell, config.seeds())
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(internal)?;
            let checks = table1_checks(&reports);
            (reports, checks)
        }
        _ => {
            let task = config.classification_task()?.expect("classification bench");
            let report = run_classification_experiment(&task, &config.settings(), config.seeds())
                .map_err(|e| input(e.to_string()))?;
            let floor = match kind {
                Bench::Spiral => 99.0,
                Bench::Circles => 97.0,
                _ => 93.0,
            };
            let mut checks = vec![band("test accuracy", report.accuracy, floor, 100.0)];
            if kind == Bench::Spiral {
                checks.push(band("train accuracy", report.train_accuracy, floor, 100.0));
            }
            (vec![report], checks)
        }
    };
    Ok(BenchOutput {
        bench: kind.name().to_string(),
        config: config.clone(),
        reports,
        checks,
    })
}

pub fn bench(
    kind: Bench,
    config: Option<&Path>,
    overrides: &[String],
    out_dir: &Path,
    check: bool,
) -> Result<(), CliError> {
    let config = RunConfig::load(config, overrides)?.resolve(kind.task())?;
    let output = run_bench(kind, &config)?;
    let mut csv = String::from(EvalReport::csv_header());
    csv.push('\n');
    for report in &output.reports {
        csv.push_str(&report.csv_row());
        csv.push('\n');
    }
    let json = serde_json::to_string_pretty(&output).map_err(internal)?;
    let mut f = create(&out_dir.join(format!("{}.json", kind.name())))?;
    writeln!(f, "{json}").map_err(internal)?;
    f.flush().map_err(internal)?;
    let mut f = create(&out_dir.join(format!("{}.toml", kind.name())))?;
    f.write_all(config.to_toml().as_bytes()).map_err(internal)?;
    f.flush().map_err(internal)?;
    let mut f = create(&out_dir.join(format!("{}.csv", kind.name())))?;
    f.write_all(csv.as_bytes()).map_err(internal)?;
    f.flush().map_err(internal)?;
    print!("{csv}");
    for c in &output.checks {
        let value = c.value.map_or("NAN".to_string(), |v| format!("{v:.4}"));
        let verdict = if c.pass { "ok" } else { "OUT" };
        println!(
            "check {verdict} {}: {value} expected {}",
            c.name, c.expected
        );
    }
    let failures: Vec<String> = output
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.clone())
        .collect();
    if check && !failures.is_empty() {
        return Err(CliError::BandFailure(failures));
    }
    Ok(())
}

/// Hardware-versus-software agreement at one programming tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    /// Queries where both paths produced an output.
    pub compared: usize,
    /// Deviations as fractions of the output range.
    pub max_deviation: Option<f64>,
    pub mean_deviation: Option<f64>,
    pub divider_underflows: usize,
    /// Underflows on queries the software model does cover.
    pub underflows_on_covered: usize,
    pub total_pulses: u64,
    pub exhausted_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub groups: usize,
    pub queries: usize,
    pub software_uncovered: usize,
    pub sweep: Vec<SweepPoint>,
    /// Mean deviation never grows as epsilon is tightened.
    pub monotone: bool,
}

pub fn compare(model: &Model, config: &RunConfig) -> Result<CompareReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.query_seed.expect("resolved"));
    let queries: Vec<Vec<f64>> = (0..config.queries.expect("resolved"))
        .map(|_| {
            model
                .input_specs()
                .iter()
                .map(|s| rng.gen_range(s.min()..=s.max()))
                .collect()
        })
        .collect();
    let software: Vec<Option<f64>> = queries
        .iter()
        .map(|x| match inkdrop::infer(model, x) {
            Ok(y) => Ok(Some(y)),
            Err(Error::NoCoverage) => Ok(None),
            Err(e) => Err(internal(e)),
        })
        .collect::<Result<_, _>>()?;
    let range = model.output_spec().max() - model.output_spec().min();
    let mut epsilons = config.epsilons().to_vec();
    epsilons.sort_by(|a, b| b.total_cmp(a));
    let mut sweep = Vec::with_capacity(epsilons.len());
    for epsilon in epsilons {
        let (hw, reports) = HardwareModel::program(
            model,
            config.device(),
            config.circuit(),
            &config.programming(),
            epsilon,
        )
        .map_err(|e| input(e.to_string()))?;
        let mut deviations = Vec::new();
        let mut underflows = 0;
        let mut underflows_on_covered = 0;
        for (x, sw) in queries.iter().zip(&software) {
            match hw.infer(x) {
                Ok(y) => {
                    if let Some(sw) = sw {
                        deviations.push((y - sw).abs() / range);
                    }
                }
                Err(CrossbarError::DividerUnderflow { .. }) => {
                    underflows += 1;
                    underflows_on_covered += usize::from(sw.is_some());
                }
                Err(e) => return Err(internal(e)),
            }
        }
        let n = deviations.len();
        sweep.push(SweepPoint {
            epsilon,
            compared: n,
            max_deviation: (n > 0).then(|| deviations.iter().fold(0.0f64, |m, &d| m.max(d))),
            mean_deviation: (n > 0).then(|| deviations.iter().sum::<f64>() / n as f64),
            divider_underflows: underflows,
            underflows_on_covered,
            total_pulses: reports.iter().map(|r| r.total_pulses()).sum(),
            exhausted_cells: reports.iter().map(|r| r.exhausted.len()).sum(),
        });
    }
    let monotone = sweep
        .windows(2)
        .all(|w| match (w[0].mean_deviation, w[1].mean_deviation) {
            (Some(a), Some(b)) => b <= a,
            _ => true,
        });
    Ok(CompareReport {
        groups: model.group_count(),
        queries: queries.len(),
        software_uncovered: software.iter().filter(|s| s.is_none()).count(),
        sweep,
        monotone,
    })
}

pub fn compare_hw(
    model_path: &Path,
    config: Option<&Path>,
    overrides: &[String],
    out: Option<&Path>,
) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let config = RunConfig::load(config, overrides)?.resolve(Task::Fixture)?;
    let report = compare(&model, &config)?;
    let json = serde_json::to_string_pretty(&report).map_err(internal)?;
    if let Some(path) = out {
        let mut f = create(path)?;
        writeln!(f, "{json}").map_err(internal)?;
        f.flush().map_err(internal)?;
    }
    println!("{json}");
    Ok(())
}

pub fn dump_plane(
    model_path: &Path,
    group: usize,
    plane: usize,
    out: &Path,
) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let g = group
        .checked_sub(1)
        .and_then(|i| model.groups().get(i))
        .ok_or_else(|| input(format!("group {group} not in 1..={}", model.group_count())))?;
    let p = plane
        .checked_sub(1)
        .and_then(|i| g.planes().get(i))
        .ok_or_else(|| input(format!("plane {plane} not in 1..={}", g.planes().len())))?;
    let mut f = create(out)?;
    write_plane_csv(p, &mut f).map_err(internal)?;
    f.flush().map_err(internal)?;
    Ok(())
}
