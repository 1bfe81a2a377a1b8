//! Discrete fringe analysis: peaks, local prominence, central-fringe
//! windows and peak spacing.
//!
//! A peak is a grid point strictly greater than both neighbours; no
//! smoothing is applied.

use crate::correlation::CorrelationCurve;
use crate::error::{Error, Result};

/// Curves whose total variation is below this fraction of their magnitude
/// are treated as flat.
pub const FLAT_TOLERANCE: f64 = 1e-9;

pub fn find_peaks(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}

pub fn find_troughs(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] < values[i + 1])
        .collect()
}

pub fn is_flat(values: &[f64]) -> bool {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min <= FLAT_TOLERANCE * max.abs().max(min.abs())
}

/// Topographic prominence of peak `i`: its height above the higher of the
/// two lowest points separating it from taller terrain (or the grid edge)
/// on either side.
pub fn local_prominence(values: &[f64], i: usize) -> f64 {
    let peak = values[i];
    let mut left_min = peak;
    for &v in values[..i].iter().rev() {
        if v > peak {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = peak;
    for &v in &values[i + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    peak - left_min.max(right_min)
}

/// Number of peaks inside `[start, end]` whose local prominence is at least
/// `min_fraction` of the curve's range within that window.
pub fn count_fringes(curve: &CorrelationCurve, start: f64, end: f64, min_fraction: f64) -> usize {
    let xs = curve.positions();
    let v = curve.values();
    let inside: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] >= start && xs[i] <= end).collect();
    if inside.is_empty() {
        return 0;
    }
    let lo = inside.iter().map(|&i| v[i]).fold(f64::INFINITY, f64::min);
    let hi = inside.iter().map(|&i| v[i]).fold(f64::NEG_INFINITY, f64::max);
    let threshold = min_fraction * (hi - lo);
    find_peaks(v)
        .into_iter()
        .filter(|&i| xs[i] >= start && xs[i] <= end)
        .filter(|&i| local_prominence(v, i) >= threshold && local_prominence(v, i) > 0.0)
        .count()
}

/// Sub-grid peak position from a parabola through the peak and its
/// neighbours (uniform spacing assumed locally).
pub fn refine_peak(xs: &[f64], values: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= xs.len() {
        return xs[i];
    }
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return xs[i];
    }
    let offset = 0.5 * (a - c) / denom;
    let h = 0.5 * (xs[i + 1] - xs[i - 1]);
    xs[i] + offset * h
}

/// Walks uphill from the grid point closest to `x = 0` to the central
/// maximum.
pub fn central_peak(curve: &CorrelationCurve) -> usize {
    let v = curve.values();
    let mut i = curve.grid().nearest_index(0.0);
    loop {
        let left = i > 0 && v[i - 1] > v[i];
        let right = i + 1 < v.len() && v[i + 1] > v[i];
        match (left, right) {
            (false, false) => return i,
            (true, true) => {
                i = if v[i - 1] >= v[i + 1] { i - 1 } else { i + 1 };
            }
            (true, false) => i -= 1,
            (false, true) => i += 1,
        }
    }
}

/// Index reached by alternately descending and ascending `turns` times from
/// `start` in direction `step` (+1 or -1); stops at strict extrema.
fn walk(values: &[f64], start: usize, forward: bool, turns: usize) -> Option<usize> {
    let mut i = start;
    let mut descending = true;
    for _ in 0..turns {
        loop {
            let next = if forward {
                (i + 1 < values.len()).then_some(i + 1)
            } else {
                i.checked_sub(1)
            }?;
            let continues = if descending {
                values[next] <= values[i]
            } else {
                values[next] >= values[i]
            };
            if !continues {
                break;
            }
            i = next;
        }
        // reaching the edge of the grid is not an extremum
        if i == 0 || i + 1 == values.len() {
            return None;
        }
        descending = !descending;
    }
    Some(i)
}

/// Index bounds of the central fringe plus `side_fringes` neighbouring
/// fringes on each side, delimited by minima.
pub fn central_window(curve: &CorrelationCurve, side_fringes: usize) -> Result<(usize, usize)> {
    let v = curve.values();
    if is_flat(v) {
        return Err(Error::NoFringe);
    }
    let center = central_peak(curve);
    let turns = 2 * side_fringes + 1;
    let left = walk(v, center, false, turns).ok_or(Error::NoFringe)?;
    let right = walk(v, center, true, turns).ok_or(Error::NoFringe)?;
    Ok((left, right))
}

/// Spacing between the central peak and its nearest neighbouring peaks
/// (mean of the two sides), using parabolic peak refinement.
pub fn central_peak_spacing(curve: &CorrelationCurve) -> Result<f64> {
    let v = curve.values();
    if is_flat(v) {
        return Err(Error::NoFringe);
    }
    let xs = curve.positions();
    let center = central_peak(curve);
    let left = walk(v, center, false, 2).ok_or(Error::NoFringe)?;
    let right = walk(v, center, true, 2).ok_or(Error::NoFringe)?;
    let x0 = refine_peak(xs, v, center);
    let xl = refine_peak(xs, v, left);
    let xr = refine_peak(xs, v, right);
    Ok(0.5 * ((x0 - xl) + (xr - x0)))
}

/// Contiguous interval around the central maximum where the curve stays at
/// or above `fraction` of its central value.
pub fn region_above(curve: &CorrelationCurve, fraction: f64) -> (f64, f64) {
    let v = curve.values();
    let xs = curve.positions();
    let center = central_peak(curve);
    let level = fraction * v[center];
    let mut left = center;
    while left > 0 && v[left - 1] >= level {
        left -= 1;
    }
    let mut right = center;
    while right + 1 < v.len() && v[right + 1] >= level {
        right += 1;
    }
    (xs[left], xs[right])
}
