//! Quartile group labels for condition features.

use crate::error::{Error, Result};

/// Assigns labels {1, 2, 3, 4} from the empirical 25/50/75 percentiles
/// (linear interpolation). Values exactly on a boundary take the lower label;
/// label 1 includes the minimum.
pub fn quartile_grouping(values: &[f64]) -> Result<Vec<u8>> {
    let bounds = quartile_boundaries(values)?;
    Ok(values.iter().map(|&v| label_for(v, &bounds)).collect())
}

/// The (q25, q50, q75) boundaries used by [`quartile_grouping`].
pub fn quartile_boundaries(values: &[f64]) -> Result<[f64; 3]> {
    if values.len() < 4 {
        return Err(Error::Validation(format!(
            "quartile grouping needs >= 4 values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in quartile grouping".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok([
        percentile_linear(&sorted, 0.25),
        percentile_linear(&sorted, 0.50),
        percentile_linear(&sorted, 0.75),
    ])
}

pub fn label_for(v: f64, bounds: &[f64; 3]) -> u8 {
    if v <= bounds[0] {
        1
    } else if v <= bounds[1] {
        2
    } else if v <= bounds[2] {
        3
    } else {
        4
    }
}

/// Percentile with linear interpolation between order statistics at rank
/// `p * (n - 1)`.
fn percentile_linear(sorted: &[f64], p: f64) -> f64 {
    let rank = p * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
