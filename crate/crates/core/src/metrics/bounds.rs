use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("need {need} or more {what}, got {got}")]
    InsufficientSamples { what: &'static str, need: usize, got: usize },
    #[error("the formula needs at least one PMP node")]
    NoPmp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearVerdict {
    /// `(n, messages / n)` per size.
    pub ratios: Vec<(usize, f64)>,
    pub mean: f64,
    /// Largest relative deviation from the mean.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const LINEAR_TOLERANCE: f64 = 0.25;

/// Passes iff `messages / n` stays within ±25% of its mean across sizes.
pub fn validate_linear_bound(series: &[(usize, f64)]) -> Result<LinearVerdict, BoundError> {
    let mut sizes: Vec<usize> = series.iter().map(|s| s.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(BoundError::InsufficientSamples { what: "sizes", need: 3, got: sizes.len() });
    }
    let ratios: Vec<(usize, f64)> = series.iter().map(|&(n, m)| (n, m / n as f64)).collect();
    let mean = ratios.iter().map(|r| r.1).sum::<f64>() / ratios.len() as f64;
    let max_deviation = ratios.iter().map(|r| ((r.1 - mean) / mean).abs()).fold(0.0, f64::max);
    Ok(LinearVerdict { ratios, mean, max_deviation, tolerance: LINEAR_TOLERANCE, pass: max_deviation <= LINEAR_TOLERANCE })
}

/// Averages per-run samples by size, insisting on `min_runs` runs each.
pub fn mean_by_size(rows: &[(usize, u64)], min_runs: usize) -> Result<Vec<(usize, f64)>, BoundError> {
    let mut by: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for &(n, m) in rows {
        by.entry(n).or_default().push(m);
    }
    by.into_iter()
        .map(|(n, v)| {
            if v.len() < min_runs {
                Err(BoundError::InsufficientSamples { what: "runs per size", need: min_runs, got: v.len() })
            } else {
                Ok((n, v.iter().sum::<u64>() as f64 / v.len() as f64))
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AliVerdict {
    pub pmp: usize,
    pub degree_sum: usize,
    pub predicted: u64,
    pub measured: u64,
    pub ratio: f64,
    pub pass: bool,
}

/// `2·(Σ d(i) − P) + 1` over the PMP degrees, against a measured count.
pub fn validate_ali_formula(pmp_degrees: &[usize], measured: u64) -> Result<AliVerdict, BoundError> {
    if pmp_degrees.is_empty() {
        return Err(BoundError::NoPmp);
    }
    let p = pmp_degrees.len();
    let sum: usize = pmp_degrees.iter().sum();
    let predicted = (2 * (sum - p) + 1) as u64;
    Ok(AliVerdict {
        pmp: p,
        degree_sum: sum,
        predicted,
        measured,
        ratio: measured as f64 / predicted as f64,
        pass: measured == predicted,
    })
}
