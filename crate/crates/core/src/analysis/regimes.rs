use crate::error::{Error, Result};

use super::fit::linear_fit;

/// Thresholds for [`detect_regimes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeParams {
    /// Fraction of the steepest descent slope that counts as "descending".
    pub theta: f64,
    /// Loss below which training is considered converged.
    pub eps_loss: f64,
    /// Half-width, in decades of `t`, of the centered slope window.
    pub half_window_decades: f64,
}

impl Default for RegimeParams {
    fn default() -> Self {
        Self {
            theta: 0.2,
            eps_loss: 0.05,
            half_window_decades: 0.25,
        }
    }
}

/// Least-squares slope `d loss / d ln t` in a centered window around each
/// point with `t > 0`. Windows hold every point within the half-width, and
/// at least the immediate neighbours.
pub fn local_log_slopes(curve: &[(f64, f64)], half_window_decades: f64) -> Vec<(f64, f64)> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|p| p.0 > 0.0)
        .map(|&(t, l)| (t.ln(), l))
        .collect();
    let half = half_window_decades * std::f64::consts::LN_10;
    (0..pts.len())
        .map(|i| {
            let x = pts[i].0;
            let mut lo = i;
            while lo > 0 && x - pts[lo - 1].0 <= half {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < pts.len() && pts[hi + 1].0 - x <= half {
                hi += 1;
            }
            lo = lo.min(i.saturating_sub(1));
            hi = hi.max((i + 1).min(pts.len() - 1));
            let slope = linear_fit(&pts[lo..=hi]).map_or(0.0, |f| f.slope);
            (x.exp(), slope)
        })
        .collect()
}

/// Crossover times `(t₁, t₂)` of a loss curve sampled on a log-spaced
/// schedule.
///
/// `t₁` is the first time the local slope `d loss / d ln t` falls below
/// `−θ·s₀`, where `s₀` is the steepest descent rate seen. `t₂` is the first
/// later time at which the loss is below `ε_loss` or the descent rate has
/// dropped back under `θ·s₀`. Either is `None` when its criterion is never
/// met.
pub fn detect_regimes(
    loss_curve: &[(f64, f64)],
    params: &RegimeParams,
) -> Result<(Option<f64>, Option<f64>)> {
    let usable: Vec<(f64, f64)> = loss_curve.iter().copied().filter(|p| p.0 > 0.0).collect();
    if usable.len() < 10 {
        return Err(Error::TooFewPoints {
            needed: 10,
            got: usable.len(),
        });
    }
    let slopes = local_log_slopes(&usable, params.half_window_decades);
    let s0 = slopes.iter().map(|s| -s.1).fold(0.0, f64::max);
    let scale = usable.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    if !(s0 > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Ok((None, None));
    }
    let threshold = params.theta * s0;
    let Some(i1) = slopes.iter().position(|s| s.1 < -threshold) else {
        return Ok((None, None));
    };
    let t2 = (i1 + 1..usable.len())
        .find(|&i| usable[i].1 < params.eps_loss || slopes[i].1 > -threshold)
        .map(|i| usable[i].0);
    Ok((Some(usable[i1].0), t2))
}
