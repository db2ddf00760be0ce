use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::observables::{ObservableLog, Schedule};

use super::couplings::{sample_couplings, CouplingTensor};
use super::state::{random_sphere_config, SpinState};

/// Parameters of one quench realization.
#[derive(Debug, Clone, PartialEq)]
pub struct PspinParams {
    pub n: usize,
    /// Interaction order; only 3 is supported.
    pub p: usize,
    pub t_final: f64,
    pub dt: f64,
    pub t_max: f64,
    pub disorder_seed: u64,
    pub init_seed: u64,
    pub noise_seed: u64,
}

impl Default for PspinParams {
    fn default() -> Self {
        Self {
            n: 256,
            p: 3,
            t_final: 0.5,
            dt: 0.01,
            t_max: 1000.0,
            disorder_seed: 1,
            init_seed: 2,
            noise_seed: 3,
        }
    }
}

impl PspinParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n < 3 {
            return bad(format!("N must be >= 3, got {}", self.n));
        }
        if self.p != 3 {
            return bad(format!("only p = 3 is supported, got {}", self.p));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return bad(format!("T_final must be >= 0, got {}", self.t_final));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        // t_max = 0 is accepted and yields a log with only the t = 0 entry.
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return bad(format!("t_max must be >= 0, got {}", self.t_max));
        }
        if self.t_max > 0.0 && self.t_max < self.dt {
            return bad(format!("t_max ({}) must be >= dt ({})", self.t_max, self.dt));
        }
        Ok(())
    }

    /// Seeds for realization `r` of a disorder average; realization 0 uses
    /// the configured seeds unchanged.
    pub fn realization(&self, r: u64) -> Self {
        Self {
            disorder_seed: self.disorder_seed.wrapping_add(r),
            init_seed: self.init_seed.wrapping_add(r),
            noise_seed: self.noise_seed.wrapping_add(r),
            ..self.clone()
        }
    }

    pub fn total_steps(&self) -> u64 {
        (self.t_max / self.dt).round() as u64
    }
}

/// Gaussian white-noise stream driving the Langevin update.
#[derive(Debug, Clone)]
pub struct LangevinNoise {
    rng: ChaCha8Rng,
}

impl LangevinNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn sample(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchRecord {
    pub t: f64,
    pub energy_per_spin: f64,
}

/// One Euler–Maruyama step `σ' = σ − dt ∇E + √(2 T dt) η`, followed by exact
/// projection back onto the sphere.
pub fn langevin_step(
    s: &SpinState,
    j: &CouplingTensor,
    temperature: f64,
    dt: f64,
    noise: &mut LangevinNoise,
) -> Result<SpinState> {
    let mut next = s.clone();
    let mut grad = vec![0.0; s.n()];
    j.energy_and_grad(&next.sigma, &mut grad)?;
    let step = (s.t / dt).round() as u64;
    apply_update(&mut next, &grad, temperature, dt, noise, step)?;
    Ok(next)
}

fn apply_update(
    s: &mut SpinState,
    grad: &[f64],
    temperature: f64,
    dt: f64,
    noise: &mut LangevinNoise,
    step: u64,
) -> Result<()> {
    let amplitude = (2.0 * temperature * dt).sqrt();
    if amplitude > 0.0 {
        for (x, g) in s.sigma.iter_mut().zip(grad) {
            *x += -dt * g + amplitude * noise.sample();
        }
    } else {
        for (x, g) in s.sigma.iter_mut().zip(grad) {
            *x -= dt * g;
        }
    }
    let norm_sq = s.norm_sq();
    if !norm_sq.is_finite() || norm_sq == 0.0 {
        return Err(Error::Divergence {
            step: step + 1,
            time: (step + 1) as f64 * dt,
        });
    }
    s.project_to_sphere();
    s.t = (step + 1) as f64 * dt;
    Ok(())
}

/// Converts schedule times into step indices, checking that each one is a
/// multiple of `dt` within `t_max`.
fn schedule_steps(params: &PspinParams, schedule: &Schedule) -> Result<Vec<u64>> {
    let mut steps = Vec::with_capacity(schedule.times().len());
    for &t in schedule.times() {
        let k = (t / params.dt).round();
        if (k * params.dt - t).abs() > 1e-9 * t.abs().max(params.dt) {
            return Err(Error::InvalidParameter(format!(
                "schedule time {t} is not a multiple of dt = {}",
                params.dt
            )));
        }
        if t > params.t_max * (1.0 + 1e-12) || t <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "schedule time {t} outside (0, t_max = {}]",
                params.t_max
            )));
        }
        steps.push(k as u64);
    }
    Ok(steps)
}

/// Runs a quench from a random sphere point at infinite temperature to
/// `params.t_final`. Records `E/N` and a snapshot at `t = 0` and at every
/// scheduled time.
pub fn run_quench(
    params: &PspinParams,
    schedule: &Schedule,
) -> Result<(ObservableLog<QuenchRecord>, Vec<SpinState>)> {
    params.validate()?;
    let steps = schedule_steps(params, schedule)?;
    let couplings = sample_couplings(params.n, params.disorder_seed)?;
    let mut state = random_sphere_config(params.n, params.init_seed)?;
    let mut noise = LangevinNoise::new(params.noise_seed);
    let n = params.n as f64;
    let last = steps.last().copied().unwrap_or(0);

    let mut log = ObservableLog::default();
    let mut snapshots = Vec::with_capacity(steps.len() + 1);
    let mut grad = vec![0.0; params.n];
    let mut next_idx = 0;
    for step in 0..=last {
        let energy = couplings.energy_and_grad(&state.sigma, &mut grad)?;
        let scheduled = step == 0 || steps.get(next_idx) == Some(&step);
        if scheduled {
            if step != 0 {
                next_idx += 1;
            }
            log.push(QuenchRecord {
                t: state.t,
                energy_per_spin: energy / n,
            });
            snapshots.push(state.clone());
        }
        if step == last {
            break;
        }
        apply_update(&mut state, &grad, params.t_final, params.dt, &mut noise, step)?;
    }
    Ok((log, snapshots))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, t: f64, t_max: f64, seed: u64) -> PspinParams {
        PspinParams {
            n,
            t_final: t,
            dt: 1e-3,
            t_max,
            disorder_seed: seed,
            init_seed: seed + 100,
            noise_seed: seed + 200,
            ..Default::default()
        }
    }

    #[test]
    fn frozen_without_noise_or_couplings() {
        let j = CouplingTensor::zeros(6).unwrap();
        let s = random_sphere_config(6, 1).unwrap();
        let mut noise = LangevinNoise::new(0);
        let next = langevin_step(&s, &j, 0.0, 0.01, &mut noise).unwrap();
        for (a, b) in s.sigma.iter().zip(&next.sigma) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((next.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn every_step_stays_on_sphere() {
        let j = sample_couplings(20, 1).unwrap();
        let mut s = random_sphere_config(20, 2).unwrap();
        let mut noise = LangevinNoise::new(3);
        for _ in 0..500 {
            s = langevin_step(&s, &j, 2.0, 0.01, &mut noise).unwrap();
            assert!((s.norm_sq() - 20.0).abs() <= 1e-10 * 20.0);
        }
    }

    #[test]
    fn zero_temperature_descends() {
        for seed in 0..10 {
            let j = sample_couplings(24, seed).unwrap();
            let mut s = random_sphere_config(24, seed + 50).unwrap();
            let mut noise = LangevinNoise::new(seed);
            let mut e = j.energy(&s).unwrap();
            for _ in 0..100 {
                s = langevin_step(&s, &j, 0.0, 1e-3, &mut noise).unwrap();
                let e_next = j.energy(&s).unwrap();
                assert!(e_next <= e + 1e-12, "seed {seed}: {e_next} > {e}");
                e = e_next;
            }
        }
    }

    #[test]
    fn zero_temperature_smoothed_energy_is_non_increasing() {
        let mut p = small(32, 0.0, 20.0, 9);
        p.dt = 0.01;
        let times: Vec<f64> = (1..=200).map(|k| k as f64 * 0.1).collect();
        let schedule = Schedule::from_times(times, 2.0).unwrap();
        let (log, _) = run_quench(&p, &schedule).unwrap();
        let e: Vec<f64> = log.records().iter().map(|r| r.energy_per_spin).collect();
        let smooth: Vec<f64> = e.windows(10).map(|w| w.iter().sum::<f64>() / 10.0).collect();
        for (k, w) in smooth.windows(2).enumerate() {
            assert!(w[1] <= w[0] + 1e-12, "window {k}: {} > {}", w[1], w[0]);
        }
        assert!(e.last().unwrap() < &(e[0] - 0.5));
    }

    #[test]
    fn divergence_is_reported_with_step() {
        let mut j = CouplingTensor::zeros(3).unwrap();
        j.set(0, 1, 2, f64::NAN);
        let s = SpinState::new(vec![1.0; 3], 0.0);
        let mut noise = LangevinNoise::new(0);
        let err = langevin_step(&s, &j, 0.5, 0.01, &mut noise).unwrap_err();
        assert!(matches!(err, Error::Divergence { step: 1, .. }));
    }

    #[test]
    fn zero_duration_logs_only_initial_point() {
        let mut p = small(8, 0.5, 0.0, 1);
        p.dt = 0.01;
        let (log, snaps) = run_quench(&p, &Schedule::empty()).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log.records()[0].t, 0.0);
        assert_eq!(snaps.len(), 1);
    }

    #[test]
    fn records_scheduled_times_and_is_deterministic() {
        let p = small(12, 0.5, 0.01, 4);
        let schedule = Schedule::from_times(vec![0.001, 0.002, 0.005, 0.01], 2.0).unwrap();
        let (log, snaps) = run_quench(&p, &schedule).unwrap();
        let times: Vec<f64> = log.records().iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 5);
        for (t, want) in times.iter().zip([0.0, 0.001, 0.002, 0.005, 0.01]) {
            assert!((t - want).abs() < 1e-12);
        }
        assert_eq!(snaps.len(), 5);
        let (log2, snaps2) = run_quench(&p, &schedule).unwrap();
        assert_eq!(log, log2);
        assert_eq!(snaps, snaps2);
    }

    #[test]
    fn off_grid_schedule_is_rejected() {
        let p = small(8, 0.5, 0.01, 1);
        let schedule = Schedule::from_times(vec![0.0015], 2.0).unwrap();
        assert!(run_quench(&p, &schedule).is_err());
        let schedule = Schedule::from_times(vec![0.02], 2.0).unwrap();
        assert!(run_quench(&p, &schedule).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(PspinParams::default().validate().is_ok());
        let bad = [
            PspinParams { n: 2, ..Default::default() },
            PspinParams { p: 4, ..Default::default() },
            PspinParams { t_final: -1.0, ..Default::default() },
            PspinParams { dt: 0.0, ..Default::default() },
            PspinParams { t_max: 0.001, ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
