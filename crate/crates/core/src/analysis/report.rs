use crate::observables::{MsdCurveSet, NoiseSeries};

use super::collapse::{collapse_score, rescale_by_noise};
use super::fit::fit_slope_between;
use super::plateau::estimate_plateau;
use super::regimes::{detect_regimes, RegimeParams};

/// Summary of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RegimeReport {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    /// Collapse score of the raw curves with `t_w < t₂` (all curves when
    /// `t₂` is unknown).
    pub collapse_pre: Option<f64>,
    /// Collapse score of the `D`-rescaled curves with `t_w > t₂`.
    pub collapse_post: Option<f64>,
    /// Mean log-log slope of the rescaled post-`t₂` curves over the first
    /// decade of each curve's support.
    pub late_slope: Option<f64>,
    /// Plateau of the post-`t₂` curves (all curves when `t₂` is unknown).
    pub plateau_q: Option<f64>,
}

/// Runs the full analysis. Missing or degenerate inputs leave the affected
/// fields `None` instead of failing.
pub fn analyze_run(
    loss_curve: &[(f64, f64)],
    curves: &MsdCurveSet,
    noise: Option<&NoiseSeries>,
    params: &RegimeParams,
) -> RegimeReport {
    let (t1, t2) = detect_regimes(loss_curve, params).unwrap_or((None, None));
    let pre = match t2 {
        Some(t2) => curves.filter_tw(|tw| tw < t2),
        None => curves.clone(),
    };
    let post = t2.map(|t2| {
        let raw = curves.filter_tw(|tw| tw > t2);
        match noise {
            Some(noise) => rescale_by_noise(&raw, noise).ok(),
            None => Some(raw),
        }
    });
    let post = post.flatten();

    let late_slope = post.as_ref().and_then(|set| {
        let slopes: Vec<f64> = set
            .curves
            .iter()
            .filter_map(|c| {
                let t0 = c.points.iter().map(|p| p.0).find(|&t| t > 0.0)?;
                fit_slope_between(c, t0, 10.0 * t0).ok()
            })
            .collect();
        (!slopes.is_empty()).then(|| slopes.iter().sum::<f64>() / slopes.len() as f64)
    });
    let plateau_q = match (&post, t2) {
        (Some(set), Some(_)) => estimate_plateau(set),
        (None, Some(_)) => None,
        (_, None) => estimate_plateau(curves),
    };
    RegimeReport {
        t1,
        t2,
        collapse_pre: collapse_score(&pre).ok(),
        collapse_post: post.as_ref().and_then(|s| collapse_score(s).ok()),
        late_slope,
        plateau_q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{MsdCurve, SystemTag};

    #[test]
    fn empty_inputs_give_empty_report() {
        let report = analyze_run(&[], &MsdCurveSet::new(SystemTag::Weights), None, &RegimeParams::default());
        assert_eq!(report, RegimeReport::default());
    }

    #[test]
    fn synthetic_training_run() {
        // Loss: flat, log-linear descent between 10² and 10⁴, then ~0.
        let loss: Vec<(f64, f64)> = (0..=60)
            .map(|k| {
                let t = 10f64.powf(k as f64 / 10.0);
                let x = t.log10().clamp(2.0, 4.0);
                (t, 1.0 - 0.495 * (x - 2.0))
            })
            .collect();
        let d = |tw: f64| 1.0 / (1.0 + tw).sqrt();
        let tws = [1.0, 10.0, 1e5, 3e5];
        let curves = MsdCurveSet {
            system: SystemTag::Weights,
            curves: tws
                .iter()
                .map(|&tw| MsdCurve {
                    tw,
                    points: (0..=60)
                        .map(|k| {
                            let t = 10f64.powf(k as f64 / 10.0);
                            // Aging before t₂, plain diffusion with D(t_w) after.
                            let v = if tw < 1e4 { t / (t + 10.0 * tw) } else { d(tw) * t };
                            (t, v)
                        })
                        .collect(),
                    noise: None,
                })
                .collect(),
        };
        let noise: NoiseSeries = tws.iter().map(|&tw| (tw, d(tw))).collect();
        let r = analyze_run(&loss, &curves, Some(&noise), &RegimeParams::default());
        let (t1, t2) = (r.t1.unwrap(), r.t2.unwrap());
        assert!(t1 < t2);
        assert!(r.collapse_post.unwrap() < 1e-12);
        assert!(r.collapse_pre.unwrap() > 0.01);
        assert!((r.late_slope.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(r.plateau_q, None);
    }
}
