//! Turning logs and curve sets into findings: training regimes, noise
//! rescaling, collapse of curves across waiting times, late-time slopes and
//! plateau heights.

mod collapse;
mod fit;
mod plateau;
mod regimes;
mod report;

pub use collapse::{collapse_score, rescale_by_noise, LogGrid, GRID_POINTS_PER_DECADE};
pub use fit::{fit_late_slope, fit_slope_between, linear_fit, LinearFit};
pub use plateau::{estimate_plateau, PLATEAU_MAX_SLOPE, PLATEAU_MIN_DECADES};
pub use regimes::{detect_regimes, local_log_slopes, RegimeParams};
pub use report::{analyze_run, RegimeReport};
