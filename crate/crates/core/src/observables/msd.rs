use std::fmt;

use crate::error::{Error, Result};
use crate::par;

use super::same_time;

/// A configuration vector with a time stamp: spins or network weights.
pub trait Configuration {
    fn time(&self) -> f64;
    fn values(&self) -> &[f64];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemTag {
    Spins,
    Weights,
}

impl SystemTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemTag::Spins => "spins",
            SystemTag::Weights => "weights",
        }
    }
}

impl fmt::Display for SystemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SystemTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spins" => Ok(SystemTag::Spins),
            "weights" => Ok(SystemTag::Weights),
            other => Err(format!("unknown system tag {other:?}")),
        }
    }
}

/// `Δ(t_w, t_w + t)` for one waiting time: `(t, Δ)` pairs with `t > 0`
/// strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MsdCurve {
    pub tw: f64,
    pub points: Vec<(f64, f64)>,
    /// `D(t_w)` when the curve has been divided by the noise strength.
    pub noise: Option<f64>,
}

impl MsdCurve {
    pub fn ts(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn deltas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsdCurveSet {
    pub system: SystemTag,
    pub curves: Vec<MsdCurve>,
}

impl MsdCurveSet {
    pub fn new(system: SystemTag) -> Self {
        Self {
            system,
            curves: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Keeps only the curves whose waiting time satisfies `keep`.
    pub fn filter_tw(&self, keep: impl Fn(f64) -> bool) -> Self {
        Self {
            system: self.system,
            curves: self.curves.iter().filter(|c| keep(c.tw)).cloned().collect(),
        }
    }
}

/// Mean squared componentwise difference `(1/N) Σ (a_i − b_i)²`.
pub fn msd(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// Every `stride`-th snapshot time, starting with the first.
pub fn tw_grid(times: &[f64], stride: usize) -> Vec<f64> {
    times.iter().step_by(stride.max(1)).copied().collect()
}

/// Builds one curve per waiting time from all later snapshots. Curves that
/// would have no points (the last snapshot) are omitted.
pub fn msd_curves<C: Configuration + Sync>(
    snapshots: &[C],
    tw_list: &[f64],
    system: SystemTag,
) -> Result<MsdCurveSet> {
    let mut anchors = Vec::with_capacity(tw_list.len());
    for &tw in tw_list {
        let idx = snapshots
            .iter()
            .position(|s| same_time(s.time(), tw))
            .ok_or_else(|| Error::MissingSnapshot {
                tw,
                available: snapshots.iter().map(|s| s.time()).collect(),
            })?;
        anchors.push(idx);
    }
    let curves = par::map_indexed(anchors.len(), |a| -> Result<MsdCurve> {
        let base = &snapshots[anchors[a]];
        let points = snapshots
            .iter()
            .filter(|s| s.time() > base.time())
            .map(|s| Ok((s.time() - base.time(), msd(base.values(), s.values())?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MsdCurve {
            tw: base.time(),
            points,
            noise: None,
        })
    });
    let mut set = MsdCurveSet::new(system);
    for curve in curves {
        let curve = curve?;
        if !curve.points.is_empty() {
            set.curves.push(curve);
        }
    }
    Ok(set)
}

/// Pointwise mean over curve sets that share waiting times and `t` grids,
/// e.g. independent disorder realizations on a common schedule.
pub fn average_curve_sets(sets: &[MsdCurveSet]) -> Result<MsdCurveSet> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InvalidParameter("no curve sets to average".into()))?;
    let mut out = first.clone();
    for set in &sets[1..] {
        if set.curves.len() != out.curves.len() {
            return Err(Error::DimensionMismatch {
                expected: out.curves.len(),
                got: set.curves.len(),
            });
        }
        for (acc, c) in out.curves.iter_mut().zip(&set.curves) {
            if !same_time(acc.tw, c.tw) || acc.points.len() != c.points.len() {
                return Err(Error::InvalidParameter(format!(
                    "curve for t_w = {} does not match across realizations",
                    c.tw
                )));
            }
            for (p, q) in acc.points.iter_mut().zip(&c.points) {
                p.1 += q.1;
            }
        }
    }
    let k = sets.len() as f64;
    for c in &mut out.curves {
        for p in &mut c.points {
            p.1 /= k;
        }
    }
    Ok(out)
}
