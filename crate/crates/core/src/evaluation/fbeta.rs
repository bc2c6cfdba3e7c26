use std::collections::HashMap;

use crate::clustering::Decomposition;
use crate::{Error, Result};

pub const DEFAULT_BETA: f64 = 0.25;

fn pairs(k: usize) -> f64 {
    (k * k.saturating_sub(1) / 2) as f64
}

/// Pairwise co-membership counts `(true positives, predicted positives,
/// actual positives)`; unassigned classes share no pair.
pub fn pair_counts(predicted: &Decomposition, truth: &Decomposition) -> Result<(f64, f64, f64)> {
    if predicted.n != truth.n {
        return Err(Error::invalid(format!(
            "class universes differ: {} vs {} classes",
            predicted.n, truth.n
        )));
    }
    let pa = predicted.assignment();
    let ta = truth.assignment();
    let mut cells: HashMap<(usize, usize), usize> = HashMap::new();
    for (p, t) in pa.iter().zip(&ta) {
        if let (Some(p), Some(t)) = (p, t) {
            *cells.entry((*p, *t)).or_insert(0) += 1;
        }
    }
    let tp = cells.values().map(|&c| pairs(c)).sum();
    let pp = predicted.services.iter().map(|s| pairs(s.len())).sum();
    let ap = truth.services.iter().map(|s| pairs(s.len())).sum();
    Ok((tp, pp, ap))
}

/// Pairwise F-beta of `predicted` against `truth`.
///
/// With no predicted pairs the result is 0 if truth has pairs and 1 if it
/// has none (both all-singleton).
pub fn pairwise_fbeta(predicted: &Decomposition, truth: &Decomposition, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let (tp, pp, ap) = pair_counts(predicted, truth)?;
    if pp == 0.0 {
        return Ok(if ap == 0.0 { 1.0 } else { 0.0 });
    }
    let p = tp / pp;
    let r = if ap == 0.0 { 0.0 } else { tp / ap };
    if p + r == 0.0 {
        return Ok(0.0);
    }
    let b2 = beta * beta;
    Ok((1.0 + b2) * p * r / (b2 * p + r))
}
