//! Classification of a quantity's behaviour under successive grid doublings.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

/// Per-doubling growth at or above this factor counts as divergence.
pub const DIVERGING_RATIO: f64 = 1.8;
/// Per-doubling growth at or below this factor counts as boundedness.
pub const BOUNDED_RATIO: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Bounded,
    Diverging,
    Indeterminate,
}

/// Ratios v_{i+1}/v_i of consecutive refinement levels; 1 when both vanish.
pub fn growth_ratios(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| if w[0] == 0.0 && w[1] == 0.0 { 1.0 } else { w[1] / w[0] }).collect()
}

/// Diverging if every ratio is ≥ 1.8, bounded if every ratio is ≤ 1.25,
/// otherwise indeterminate. Needs at least three levels.
pub fn classify_growth(values: &[f64]) -> Result<Trend> {
    if values.len() < 3 {
        return Err(FracError::PreconditionViolated(format!("a trend needs at least 3 refinement levels, got {}", values.len())));
    }
    let ratios = growth_ratios(values);
    Ok(if ratios.iter().all(|&r| r >= DIVERGING_RATIO) {
        Trend::Diverging
    } else if ratios.iter().all(|&r| r.abs() <= BOUNDED_RATIO) {
        Trend::Bounded
    } else {
        Trend::Indeterminate
    })
}
