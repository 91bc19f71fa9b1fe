//! Reference implementations used to check the library against.

#![allow(dead_code)]

use inkdrop::{ModelSpecs, Sample, StainRadii};

/// Pyramid degree written out directly from its geometric definition.
pub fn pyramid(dx: f64, dy: f64, radii: StainRadii) -> f64 {
    let a = 1.0 - dx.abs() / radii.radius_in();
    let b = 1.0 - dy.abs() / radii.radius_out();
    let m = if a < b { a } else { b };
    if m > 0.0 {
        m
    } else {
        0.0
    }
}

/// System fuzzy output computed by visiting every sample, with no grids.
/// Degrees are rounded to `f32` like stored cells.
pub fn brute_force_fuzzy(
    specs: &ModelSpecs,
    radii: StainRadii,
    samples: &[Sample],
    x: &[f64],
) -> Vec<f64> {
    let n_out = specs.output.levels();
    let query: Vec<usize> = specs
        .inputs
        .iter()
        .zip(x)
        .map(|(s, &v)| s.quantize(v))
        .collect();
    let mut mu = vec![0.0f64; n_out];
    for sample in samples {
        let centre_out = specs.output.quantize(sample.output) as f64;
        for (t, m) in mu.iter_mut().enumerate() {
            let dy = (t + 1) as f64 - centre_out;
            let mut g = f64::INFINITY;
            for ((spec, &xi), &q) in specs.inputs.iter().zip(&sample.inputs).zip(&query) {
                let dx = q as f64 - spec.quantize(xi) as f64;
                g = g.min(pyramid(dx, dy, radii) as f32 as f64);
            }
            *m = m.max(g);
        }
    }
    mu
}

pub fn brute_force_infer(
    specs: &ModelSpecs,
    radii: StainRadii,
    samples: &[Sample],
    x: &[f64],
) -> Option<f64> {
    let mu = brute_force_fuzzy(specs, radii, samples, x);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut support = Vec::new();
    for (t, m) in mu.iter().enumerate() {
        let y = specs.output.min() + t as f64 * specs.output.step();
        num += y * m;
        den += m;
        if *m > 0.0 {
            support.push(y);
        }
    }
    // a convex combination cannot leave the support
    let (first, last) = (*support.first()?, *support.last()?);
    Some((num / den).max(first).min(last))
}
