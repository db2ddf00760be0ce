use crate::observables::MsdCurveSet;

use super::collapse::LogGrid;

/// Largest `|d ln Δ / d ln t|` that still counts as flat.
pub const PLATEAU_MAX_SLOPE: f64 = 0.1;
/// Minimum extent of a shared flat region, in decades of `t`.
pub const PLATEAU_MIN_DECADES: f64 = 0.5;

/// Height of a plateau shared by the curves, if any.
///
/// Curves are interpolated onto the common log grid and their local
/// log-log slopes taken by finite differences. A grid point is flat when at
/// least two curves have `|slope| < PLATEAU_MAX_SLOPE` there. The first run
/// of consecutive flat points spanning at least `PLATEAU_MIN_DECADES` is the
/// plateau; its height is the mean `Δ` of the flat curves over the run.
pub fn estimate_plateau(curves: &MsdCurveSet) -> Option<f64> {
    if curves.len() < 2 {
        return None;
    }
    let grids: Vec<LogGrid> = curves.curves.iter().map(LogGrid::new).collect();
    let supports: Vec<(f64, f64)> = grids.iter().filter_map(LogGrid::support).collect();
    if supports.len() < 2 {
        return None;
    }
    let lo = supports.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = supports.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let xs = LogGrid::grid(lo, hi);
    if xs.len() < 2 {
        return None;
    }
    let h = xs[1] - xs[0];

    // For every grid point: the ln Δ values of the curves that are flat there.
    let flat: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            grids
                .iter()
                .filter_map(|g| {
                    let here = g.at(x)?;
                    let slope = match (g.at(x - h), g.at(x + h)) {
                        (Some(a), Some(b)) => (b - a) / (2.0 * h),
                        (None, Some(b)) => (b - here) / h,
                        (Some(a), None) => (here - a) / h,
                        (None, None) => return None,
                    };
                    (slope.abs() < PLATEAU_MAX_SLOPE).then_some(here)
                })
                .collect()
        })
        .collect();

    let min_span = PLATEAU_MIN_DECADES * std::f64::consts::LN_10;
    let mut start = None;
    for i in 0..=xs.len() {
        let is_flat = i < xs.len() && flat[i].len() >= 2;
        match (is_flat, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if xs[i - 1] - xs[s] >= min_span - 1e-9 {
                    let values: Vec<f64> = flat[s..i].iter().flatten().map(|v| v.exp()).collect();
                    return Some(values.iter().sum::<f64>() / values.len() as f64);
                }
                start = None;
            }
            _ => {}
        }
    }
    None
}
