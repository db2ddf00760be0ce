use crate::error::{Error, Result};
use crate::observables::MsdCurve;

/// Ordinary least squares `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 for a perfect (or constant) fit.
    pub r_squared: f64,
}

pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Log-log slope of `Δ` against `t` over `t_lo ≤ t ≤ t_hi`.
pub fn fit_slope_between(curve: &MsdCurve, t_lo: f64, t_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|&&(t, d)| t >= t_lo * (1.0 - 1e-12) && t <= t_hi * (1.0 + 1e-12) && t > 0.0 && d > 0.0)
        .map(|&(t, d)| (t.ln(), d.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: pts.len(),
        });
    }
    Ok(linear_fit(&pts)?.slope)
}

/// Log-log slope over the last decade of `t`. With `t_end`, the decade ends
/// at `min(t_end, last t)` instead.
pub fn fit_late_slope(curve: &MsdCurve, t_end: Option<f64>) -> Result<f64> {
    let last = curve
        .points
        .last()
        .map(|p| p.0)
        .ok_or(Error::TooFewPoints { needed: 5, got: 0 })?;
    let hi = t_end.map_or(last, |e| e.min(last));
    fit_slope_between(curve, hi / 10.0, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn curve(mut f: impl FnMut(f64) -> f64) -> MsdCurve {
        let points = (0..=60)
            .map(|k| {
                let t = 10f64.powf(k as f64 / 10.0);
                (t, f(t))
            })
            .collect();
        MsdCurve {
            tw: 0.0,
            points,
            noise: None,
        }
    }

    #[test]
    fn linear_growth_has_unit_slope() {
        let s = fit_late_slope(&curve(|t| 3.0 * t), None).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_slope() {
        let s = fit_late_slope(&curve(|_| 0.7), None).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn noisy_square_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let s = fit_late_slope(&curve(|t| t.sqrt() * (1.0 + noise.sample(&mut rng))), None).unwrap();
        assert!((s - 0.5).abs() < 0.05, "{s}");
    }

    #[test]
    fn offset_linear_approaches_one_at_late_times() {
        let c = curve(|t| 50.0 + t);
        let early = fit_late_slope(&c, Some(100.0)).unwrap();
        let mid = fit_late_slope(&c, Some(1e4)).unwrap();
        let late = fit_late_slope(&c, None).unwrap();
        assert!(early < mid && mid < late && late < 1.0);
        assert!(1.0 - late < 1e-3);
    }

    #[test]
    fn too_few_points() {
        let c = MsdCurve {
            tw: 0.0,
            points: vec![(1.0, 1.0), (2.0, 2.0), (5.0, 3.0)],
            noise: None,
        };
        assert!(matches!(fit_late_slope(&c, None), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn r_squared_of_exact_line() {
        let f = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert_eq!(f.slope, 2.0);
        assert_eq!(f.r_squared, 1.0);
    }
}
