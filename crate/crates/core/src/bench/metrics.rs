use super::BenchError;

/// Fraction of variance unexplained: residual sum of squares over the total
/// sum of squares about the mean of `actual`.
pub fn fvu(predicted: &[f64], actual: &[f64]) -> Result<f64, BenchError> {
    if predicted.len() != actual.len() {
        return Err(BenchError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if actual.is_empty() {
        return Err(BenchError::Empty);
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let total: f64 = actual.iter().map(|y| (y - mean).powi(2)).sum();
    if total <= 0.0 {
        return Err(BenchError::ZeroVariance);
    }
    let residual: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, y)| (p - y).powi(2))
        .sum();
    Ok(residual / total)
}

/// [`fvu`] over predictions that may be missing; any gap yields
/// [`BenchError::NoCoveragePresent`].
pub fn fvu_covered(predicted: &[Option<f64>], actual: &[f64]) -> Result<f64, BenchError> {
    let missing = predicted.iter().filter(|p| p.is_none()).count();
    if missing > 0 {
        return Err(BenchError::NoCoveragePresent { count: missing });
    }
    let values: Vec<f64> = predicted.iter().flatten().copied().collect();
    fvu(&values, actual)
}

/// Nearest class label in `1..=classes`.
pub fn nearest_class(crisp: f64, classes: usize) -> usize {
    (crisp.round().max(1.0) as usize).min(classes)
}

/// Percentage of predictions whose nearest class equals the label; missing
/// predictions count as wrong.
pub fn accuracy(predicted: &[Option<f64>], labels: &[f64], classes: usize) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let correct = predicted
        .iter()
        .zip(labels)
        .filter(|(p, &y)| p.is_some_and(|p| nearest_class(p, classes) as f64 == y))
        .count();
    100.0 * correct as f64 / labels.len() as f64
}
