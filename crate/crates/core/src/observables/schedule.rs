use crate::error::{Error, Result};

/// Strictly increasing measurement times.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    times: Vec<f64>,
    base: f64,
}

impl Schedule {
    pub fn empty() -> Self {
        Self {
            times: Vec::new(),
            base: 2.0,
        }
    }

    pub fn from_times(times: Vec<f64>, base: f64) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "schedule times must be strictly increasing".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("schedule times must be finite".into()));
        }
        Ok(Self { times, base })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Multiplies every time by `factor`, e.g. to turn step counts into
    /// Langevin time.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            times: self.times.iter().map(|t| t * factor).collect(),
            base: self.base,
        }
    }
}

/// Geometric schedule: the distinct values of `round(first_step · base^k)`
/// not exceeding `t_max`, with `t_max` itself always appended.
pub fn log_schedule(t_max: f64, base: f64, first_step: f64) -> Result<Schedule> {
    if !(base > 1.0) || !base.is_finite() {
        return Err(Error::InvalidParameter(format!("base must be > 1, got {base}")));
    }
    if !(first_step > 0.0) || !(t_max >= first_step) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need t_max >= first_step > 0, got t_max = {t_max}, first_step = {first_step}"
        )));
    }
    let mut times: Vec<f64> = Vec::new();
    let mut raw = first_step;
    loop {
        let t = raw.round().max(1.0);
        if t > t_max {
            break;
        }
        if times.last() != Some(&t) {
            times.push(t);
        }
        raw *= base;
    }
    if times.last() != Some(&t_max) {
        times.push(t_max);
    }
    Schedule::from_times(times, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_two() {
        let s = log_schedule(8.0, 2.0, 1.0).unwrap();
        assert_eq!(s.times(), &[1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn slow_growth_is_dense_without_duplicates() {
        let s = log_schedule(10.0, 1.1, 1.0).unwrap();
        let want: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(s.times(), want.as_slice());
    }

    #[test]
    fn point_count_is_logarithmic() {
        let s = log_schedule(1e6, 1.2, 1.0).unwrap();
        assert!(s.len() <= 80, "{} points", s.len());
        assert_eq!(*s.times().last().unwrap(), 1e6);
    }

    #[test]
    fn t_max_is_appended() {
        let s = log_schedule(10.0, 2.0, 1.0).unwrap();
        assert_eq!(s.times(), &[1.0, 2.0, 4.0, 8.0, 10.0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(log_schedule(10.0, 1.0, 1.0).is_err());
        assert!(log_schedule(10.0, 2.0, 0.0).is_err());
        assert!(log_schedule(0.5, 2.0, 1.0).is_err());
        assert!(Schedule::from_times(vec![1.0, 1.0], 2.0).is_err());
    }
}
