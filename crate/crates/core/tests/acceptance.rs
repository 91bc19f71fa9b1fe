//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! `PASS`/`FAIL` line per criterion; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use inkdrop::bench::{
    circles_defaults, iris_defaults, run_classification_experiment, run_regression_experiment,
    spiral_defaults, ModelSettings, RegressionConfig, TestFunction,
};
use inkdrop::crossbar::{
    diode_max, diode_min, BiasedVoltage, CircuitConfig, CrossbarError, DefuzzCircuit, DeviceParams,
    HardwareModel, MemristorState, ProgrammingConfig, ReadCircuit,
};
use inkdrop::fixtures::worked_example;
use inkdrop::{
    defuzzify_wsf, infer, infer_fuzzy, Error, FuzzyOutput, Model, ModelSpecs, QuantizationSpec,
    Sample, StainRadii,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn worked_example_regression() -> Outcome {
    let model = worked_example();
    let fuzzy = infer_fuzzy(&model, &[2.5, 3.5]).unwrap().confidences();
    let crisp = infer(&model, &[2.5, 3.5]).unwrap();
    let pass = (fuzzy[0] - 0.67).abs() <= 0.01
        && (fuzzy[1] - 0.34).abs() <= 0.01
        && (crisp - 1.3366).abs() <= 0.02;
    outcome(
        pass,
        format!("fuzzy=({:.4}, {:.4}) crisp={crisp:.4}", fuzzy[0], fuzzy[1]),
    )
}

fn regression_bands() -> Outcome {
    let seeds: Vec<u64> = (0..10).collect();
    let mean_fvu = |f: TestFunction, n: usize, r: f64| {
        run_regression_experiment(&RegressionConfig::table(f, n, r), &seeds).unwrap()
    };
    let f2_r10 = mean_fvu(TestFunction::F2, 1000, 10.0).fvu;
    let f1_r10 = mean_fvu(TestFunction::F1, 1000, 10.0).fvu;
    let f2_r30 = mean_fvu(TestFunction::F2, 1000, 30.0).fvu;
    let nan_f1 = mean_fvu(TestFunction::F1, 250, 10.0).nan_runs;
    let nan_f2 = mean_fvu(TestFunction::F2, 250, 10.0).nan_runs;
    let within = |v: Option<f64>, lo: f64, hi: f64| v.is_some_and(|v| (lo..=hi).contains(&v));
    let checks = [
        within(f2_r10, 0.0, 0.05),
        within(f1_r10, 0.0, 0.15),
        within(f2_r30, 0.05, 0.25),
        nan_f1 >= 1,
        nan_f2 >= 1,
    ];
    let show = |v: Option<f64>| v.map_or("NAN".to_string(), |v| format!("{v:.4}"));
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "F2 R10={} F1 R10={} F2 R30={} (band 0.05..0.25); NAN seeds at 250 samples: F1 {nan_f1}/10, F2 {nan_f2}/10",
            show(f2_r10),
            show(f1_r10),
            show(f2_r30)
        ),
    )
}

fn two_spiral() -> Outcome {
    let (task, settings) = spiral_defaults();
    let report = run_classification_experiment(&task, &settings, &[0]).unwrap();
    let (train, dense) = (report.train_accuracy.unwrap(), report.accuracy.unwrap());
    outcome(
        train >= 99.0 && dense >= 99.0,
        format!("train={train:.2}% dense={dense:.2}%"),
    )
}

fn circles() -> Outcome {
    let (task, settings) = circles_defaults();
    let seeds: Vec<u64> = (0..20).collect();
    let acc = run_classification_experiment(&task, &settings, &seeds)
        .unwrap()
        .accuracy
        .unwrap();
    outcome(
        acc >= 97.0,
        format!("mean accuracy over 20 seeds={acc:.2}% (target >= 97%)"),
    )
}

fn iris() -> Outcome {
    let (task, settings) = iris_defaults();
    let seeds: Vec<u64> = (0..100).collect();
    let report = run_classification_experiment(&task, &settings, &seeds).unwrap();
    let acc = report.accuracy.unwrap();
    outcome(
        acc >= 93.0,
        format!("mean accuracy over 100 splits={acc:.2}%"),
    )
}

fn random_spec(rng: &mut ChaCha8Rng) -> QuantizationSpec {
    let min = rng.gen_range(-5.0..5.0);
    QuantizationSpec::new(min, min + rng.gen_range(0.5..10.0), rng.gen_range(2..=16)).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, specs: &[QuantizationSpec]) -> Vec<f64> {
    specs
        .iter()
        .map(|s| rng.gen_range(s.min()..=s.max()))
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    let mut queries = 0;
    for _ in 0..1000 {
        let inputs: Vec<_> = (0..rng.gen_range(1..=3))
            .map(|_| random_spec(&mut rng))
            .collect();
        let specs = ModelSpecs::new(inputs.clone(), random_spec(&mut rng));
        let radii = StainRadii::new(rng.gen_range(0.5..6.0), rng.gen_range(0.5..6.0)).unwrap();
        let samples: Vec<Sample> = (0..rng.gen_range(1..=5))
            .map(|_| {
                let x = random_point(&mut rng, &inputs);
                Sample::new(x, rng.gen_range(specs.output.min()..=specs.output.max()))
            })
            .collect();
        let model = Model::train_full(&samples, specs.clone(), radii).unwrap();
        for _ in 0..10 {
            let x = random_point(&mut rng, &inputs);
            let grid = infer_fuzzy(&model, &x).unwrap().confidences();
            let crisp = infer(&model, &x).ok();
            queries += 1;
            if grid != common::brute_force_fuzzy(&specs, radii, &samples, &x)
                || crisp != common::brute_force_infer(&specs, radii, &samples, &x)
            {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches in {queries} queries over 1000 models"),
    )
}

/// Mean and max |hardware - ideal| over `queries`, as fractions of the
/// output range. An underflowing query counts as infinite deviation.
fn hardware_deviation(model: &Model, epsilon: f64, queries: &[Vec<f64>]) -> (f64, f64) {
    let (hw, _) = HardwareModel::program(
        model,
        DeviceParams::default(),
        CircuitConfig::default(),
        &ProgrammingConfig::default(),
        epsilon,
    )
    .unwrap();
    let range = model.output_spec().max() - model.output_spec().min();
    let deviations: Vec<f64> = queries
        .iter()
        .map(|x| match hw.infer(x) {
            Ok(y) => (y - infer(model, x).unwrap()).abs() / range,
            Err(CrossbarError::DividerUnderflow { .. }) => f64::INFINITY,
            Err(e) => panic!("{e}"),
        })
        .collect();
    let max = deviations.iter().fold(0.0f64, |m, &d| m.max(d));
    (
        deviations.iter().sum::<f64>() / deviations.len() as f64,
        max,
    )
}

/// A query is covered when its ideal total confidence is clear of the
/// divider floor.
fn covered_queries(model: &Model, rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = random_point(rng, model.input_specs());
        if infer_fuzzy(model, &x).unwrap().total_confidence() >= 1e-2 {
            out.push(x);
        }
    }
    out
}

fn hardware_twin() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fixture = worked_example();
    let data = TestFunction::F2.generate(50, 7);
    let f2 = ModelSettings::new(32, 16, 6.0, 3.0).train(&data).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, model) in [("fixture", &fixture), ("F2x50", &f2)] {
        let queries = covered_queries(model, &mut rng, 500);
        let sweep: Vec<(f64, (f64, f64))> = [0.01, 0.005, 0.002]
            .iter()
            .map(|&eps| (eps, hardware_deviation(model, eps, &queries)))
            .collect();
        let (_, (_, max_at_01)) = sweep[0];
        let shrinking =
            sweep.windows(2).all(|w| w[1].1 .0 <= w[0].1 .0) && sweep[2].1 .0 < sweep[0].1 .0;
        pass &= max_at_01 <= 0.02 && shrinking;
        let cells: Vec<String> = sweep
            .iter()
            .map(|(eps, (mean, max))| format!("eps={eps}: mean={mean:.5} max={max:.5}"))
            .collect();
        detail.push(format!("{name} [{}]", cells.join(", ")));
    }
    outcome(pass, detail.join("; "))
}

fn device_properties() -> Outcome {
    let p = DeviceParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut immune = true;
    let mut bounded = true;
    let mut worst_return = 0.0f64;
    let mut largest_excursion = 0.0f64;
    for _ in 0..2000 {
        let w0 = rng.gen_range(0.0..=p.length);
        let mut state = MemristorState::new(w0, &p);
        let v = rng.gen_range(-p.v_threshold..=p.v_threshold);
        state.apply_pulse(&p, v, rng.gen_range(1e-9..1e-3), 10);
        immune &= state.width().to_bits() == w0.to_bits();

        let mut walk = MemristorState::new(w0, &p);
        for _ in 0..20 {
            let v = rng.gen_range(-3.0..3.0);
            walk.apply_pulse(&p, v, rng.gen_range(1e-7..1e-4), 10);
            let m = walk.memristance(&p);
            bounded &= (p.r_on..=p.r_off).contains(&m);
        }

        // stay clear of the rails so clamping does not break the symmetry
        let w0 = rng.gen_range(0.1..0.4) * p.length;
        let mut there_and_back = MemristorState::new(w0, &p);
        let v = rng.gen_range(1.1..2.0);
        let dt = rng.gen_range(1e-2..8e-2);
        there_and_back.apply_pulse(&p, v, dt, 1000);
        let excursion = there_and_back.width() - w0;
        assert!(there_and_back.width() < p.length, "pulse reached the rail");
        largest_excursion = largest_excursion.max(excursion);
        there_and_back.apply_pulse(&p, -v, dt, 1000);
        worst_return = worst_return.max((there_and_back.width() - w0).abs());
    }
    let read = ReadCircuit::new(0.5, &p).unwrap();
    let zero = read.output_voltage(p.r_on);
    let reversible = worst_return <= 1e-9 * p.length;
    outcome(
        immune && bounded && reversible && zero == 0.0,
        format!(
            "sub-threshold immune={immune} bounded={bounded} worst return={:.3e}*D after excursions up to {:.3}*D; zero read at R_on={zero:e}",
            worst_return / p.length,
            largest_excursion / p.length
        ),
    )
}

fn defuzzifier_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut scale_exact = true;
    let mut scale_close = true;
    let mut convex = true;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=32);
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                (
                    i as f64 * 0.25 - 1.0,
                    if rng.gen_bool(0.3) {
                        0.0
                    } else {
                        rng.gen_range(0.0..=1.0)
                    },
                )
            })
            .collect();
        let fz = FuzzyOutput::from_pairs(pairs.clone());
        let Ok(y) = defuzzify_wsf(&fz) else { continue };
        let k = rng.gen_range(-20..20);
        scale_exact &= defuzzify_wsf(&fz.scaled(2f64.powi(k))).unwrap() == y;
        let c = rng.gen_range(1e-3..1e3);
        scale_close &=
            (defuzzify_wsf(&fz.scaled(c)).unwrap() - y).abs() <= 1e-12 * y.abs().max(1.0);
        let support = pairs.iter().filter(|(_, m)| *m > 0.0).map(|(v, _)| *v);
        let (lo, hi) = support.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
            (l.min(v), h.max(v))
        });
        convex &= (lo..=hi).contains(&y);
    }
    let zeros = FuzzyOutput::from_pairs((1..=8).map(|i| (i as f64, 0.0)));
    let no_coverage = defuzzify_wsf(&zeros) == Err(Error::NoCoverage)
        && matches!(
            DefuzzCircuit::default().evaluate(&[0.0; 8]),
            Err(CrossbarError::DividerUnderflow { .. })
        );

    let vd = 0.7;
    let mut cancels = true;
    for _ in 0..10_000 {
        let groups: Vec<Vec<f64>> = (0..rng.gen_range(1..=6))
            .map(|_| {
                (0..rng.gen_range(1..=4))
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        let mins: Vec<BiasedVoltage> = groups
            .iter()
            .map(|g| diode_min(&g.iter().map(|&v| v.into()).collect::<Vec<_>>(), vd).unwrap())
            .collect();
        let out = diode_max(&mins, vd).unwrap();
        let ideal = groups
            .iter()
            .map(|g| g.iter().copied().fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
        cancels &= out.volts() == ideal;
    }
    outcome(
        scale_exact && scale_close && convex && no_coverage && cancels,
        format!(
            "scale exact (2^k)={scale_exact} scale within 1e-12 (any c)={scale_close} convex={convex} \
             no-coverage={no_coverage} diode cancellation over 1e4 vectors={cancels}"
        ),
    )
}

fn order_invariance() -> Outcome {
    let data = TestFunction::F2.generate(300, 10);
    let settings = ModelSettings::new(64, 64, 6.0, 4.0);
    let mut shuffled = data.clone();
    shuffled.samples.shuffle(&mut ChaCha8Rng::seed_from_u64(10));
    let a = settings.train(&data).unwrap();
    let b = settings.train(&shuffled).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut differing = 0;
    for _ in 0..100 {
        let x = random_point(&mut rng, a.input_specs());
        if infer(&a, &x) != infer(&b, &x) {
            differing += 1;
        }
    }
    outcome(differing == 0, format!("{differing} of 100 queries differ"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("worked example", worked_example_regression),
        ("regression table bands", regression_bands),
        ("two-spiral", two_spiral),
        ("circles", circles),
        ("iris", iris),
        ("oracle equivalence", oracle_equivalence),
        ("hardware twin equivalence", hardware_twin),
        ("device model properties", device_properties),
        ("defuzzifier properties", defuzzifier_properties),
        ("order invariance", order_invariance),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict} {name}: {} ({:.1}s)",
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!result.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
