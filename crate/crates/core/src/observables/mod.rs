//! Shared instrumentation for spins and weights: log-spaced schedules,
//! time-indexed logs, two-time mean-square displacement and the SGD noise
//! strength `D`.

mod log;
mod msd;
mod noise;
mod schedule;

pub use log::ObservableLog;
pub use msd::{
    average_curve_sets, msd, msd_curves, tw_grid, Configuration, MsdCurve, MsdCurveSet,
    SystemTag,
};
pub use noise::{noise_d, NoiseSeries};
pub use schedule::{log_schedule, Schedule};

/// Relative tolerance used when matching time stamps that went through
/// floating-point arithmetic (e.g. `k * dt`).
pub(crate) fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12)
}
