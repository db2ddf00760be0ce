use crate::error::{Error, Result};
use crate::observables::{MsdCurve, MsdCurveSet, NoiseSeries};

/// Density of the common grid curves are interpolated onto.
pub const GRID_POINTS_PER_DECADE: f64 = 20.0;

/// Divides every curve by its `D(t_w)`.
pub fn rescale_by_noise(curves: &MsdCurveSet, noise: &NoiseSeries) -> Result<MsdCurveSet> {
    let mut out = curves.clone();
    for c in &mut out.curves {
        let d = noise.get(c.tw).ok_or(Error::MissingNoise { tw: c.tw })?;
        if d == 0.0 {
            return Err(Error::ZeroNoise { tw: c.tw });
        }
        for p in &mut c.points {
            p.1 /= d;
        }
        c.noise = Some(d);
    }
    Ok(out)
}

/// A curve in `(ln t, ln Δ)` coordinates, interpolated linearly there, i.e.
/// geometrically in the original coordinates.
#[derive(Debug, Clone)]
pub struct LogGrid {
    log_points: Vec<(f64, f64)>,
}

impl LogGrid {
    /// Drops points with non-positive `t` or `Δ`.
    pub fn new(curve: &MsdCurve) -> Self {
        Self {
            log_points: curve
                .points
                .iter()
                .filter(|&&(t, d)| t > 0.0 && d > 0.0)
                .map(|&(t, d)| (t.ln(), d.ln()))
                .collect(),
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        Some((self.log_points.first()?.0, self.log_points.last()?.0))
    }

    /// `ln Δ` at `ln t`, or `None` outside the sampled range.
    pub fn at(&self, log_t: f64) -> Option<f64> {
        let pts = &self.log_points;
        let (lo, hi) = self.support()?;
        if log_t < lo - 1e-12 || log_t > hi + 1e-12 {
            return None;
        }
        let idx = pts.partition_point(|p| p.0 < log_t);
        if idx == 0 {
            return Some(pts[0].1);
        }
        if idx == pts.len() {
            return Some(pts[idx - 1].1);
        }
        let (a, b) = (pts[idx - 1], pts[idx]);
        let w = (log_t - a.0) / (b.0 - a.0);
        Some(a.1 + w * (b.1 - a.1))
    }

    /// Grid abscissae `ln t` at `GRID_POINTS_PER_DECADE` per decade covering
    /// `[lo, hi]` (natural-log bounds).
    pub fn grid(lo: f64, hi: f64) -> Vec<f64> {
        let step = std::f64::consts::LN_10 / GRID_POINTS_PER_DECADE;
        let first = (lo / step - 1e-9).ceil() as i64;
        let last = (hi / step + 1e-9).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

/// Mean, over the points of a common log-t grid, of the population variance
/// of `ln Δ` across the curves defined there. Grid points covered by fewer
/// than two curves are skipped. Zero means perfect collapse.
pub fn collapse_score(curves: &MsdCurveSet) -> Result<f64> {
    if curves.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: curves.len(),
        });
    }
    let grids: Vec<LogGrid> = curves.curves.iter().map(LogGrid::new).collect();
    let supports: Vec<(f64, f64)> = grids.iter().filter_map(LogGrid::support).collect();
    let lo = supports.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = supports.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if supports.len() < 2 {
        return Err(Error::NoOverlap);
    }
    let mut total = 0.0;
    let mut used = 0usize;
    for x in LogGrid::grid(lo, hi) {
        let values: Vec<f64> = grids.iter().filter_map(|g| g.at(x)).collect();
        if values.len() < 2 {
            continue;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        total += values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        used += 1;
    }
    if used == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(total / used as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::SystemTag;

    fn family(tws: &[f64], f: impl Fn(f64, f64) -> f64) -> MsdCurveSet {
        MsdCurveSet {
            system: SystemTag::Weights,
            curves: tws
                .iter()
                .map(|&tw| MsdCurve {
                    tw,
                    points: (0..=40)
                        .map(|k| {
                            let t = 10f64.powf(k as f64 / 10.0);
                            (t, f(tw, t))
                        })
                        .collect(),
                    noise: None,
                })
                .collect(),
        }
    }

    fn noise_for(tws: &[f64], d: impl Fn(f64) -> f64) -> NoiseSeries {
        tws.iter().map(|&tw| (tw, d(tw))).collect()
    }

    #[test]
    fn unit_noise_is_identity() {
        let tws = [1.0, 10.0];
        let set = family(&tws, |tw, t| tw + t);
        let out = rescale_by_noise(&set, &noise_for(&tws, |_| 1.0)).unwrap();
        for (a, b) in out.curves.iter().zip(&set.curves) {
            assert_eq!(a.points, b.points);
            assert_eq!(a.noise, Some(1.0));
        }
    }

    #[test]
    fn noise_two_halves_values() {
        let set = family(&[5.0], |_, t| t);
        let out = rescale_by_noise(&set, &noise_for(&[5.0], |_| 2.0)).unwrap();
        for (a, b) in out.curves[0].points.iter().zip(&set.curves[0].points) {
            assert_eq!(a.1, b.1 / 2.0);
        }
    }

    #[test]
    fn missing_or_zero_noise() {
        let set = family(&[1.0, 2.0], |_, t| t);
        assert!(matches!(
            rescale_by_noise(&set, &noise_for(&[1.0], |_| 1.0)),
            Err(Error::MissingNoise { tw }) if tw == 2.0
        ));
        assert!(matches!(
            rescale_by_noise(&set, &noise_for(&[1.0, 2.0], |tw| tw - 1.0)),
            Err(Error::ZeroNoise { tw }) if tw == 1.0
        ));
    }

    #[test]
    fn diffusive_family_collapses_after_rescaling() {
        let tws = [1.0, 10.0, 100.0, 1000.0];
        let d = |tw: f64| 0.3 / (1.0 + tw).sqrt();
        let set = family(&tws, |tw, t| d(tw) * t);
        assert!(collapse_score(&set).unwrap() > 0.1);
        let rescaled = rescale_by_noise(&set, &noise_for(&tws, d)).unwrap();
        for c in &rescaled.curves {
            for &(t, v) in &c.points {
                assert!((v - t).abs() <= 1e-12 * t);
            }
        }
        assert!(collapse_score(&rescaled).unwrap() < 1e-12);
    }

    #[test]
    fn identical_curves_score_zero() {
        let set = family(&[1.0, 2.0, 3.0], |_, t| t.powf(0.7) + 0.2);
        assert!(collapse_score(&set).unwrap() < 1e-28);
    }

    #[test]
    fn factor_two_scores_ln2_squared_over_four() {
        let set = family(&[1.0, 2.0], |tw, t| tw * t);
        let want = std::f64::consts::LN_2.powi(2) / 4.0;
        assert!((collapse_score(&set).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn disjoint_supports() {
        let mut set = family(&[1.0, 2.0], |_, t| t);
        set.curves[0].points.retain(|p| p.0 < 10.0);
        set.curves[1].points.retain(|p| p.0 > 100.0);
        assert!(matches!(collapse_score(&set), Err(Error::NoOverlap)));
        assert!(collapse_score(&family(&[1.0], |_, t| t)).is_err());
    }
}
