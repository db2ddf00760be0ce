//! Numerical laboratory comparing glassy Langevin relaxation with SGD training.
//!
//! The crate has two simulated systems and one shared measurement pipeline:
//!
//! * [`pspin`]: the spherical 3-spin model quenched from infinite temperature
//!   and evolved with Euler–Maruyama Langevin dynamics on the sphere.
//! * [`nn`]: small fully connected networks trained from scratch with
//!   constant-rate SGD, with per-sample gradient access.
//! * [`observables`] and [`analysis`]: log-spaced schedules, two-time
//!   mean-square displacement, the SGD noise strength `D`, regime detection,
//!   noise rescaling, curve collapse, late-time slopes and plateau estimates.
//!
//! Inner loops that are data parallel (the coupling contraction, per-sample
//! gradients, independent realizations) go through [`par`], which uses rayon
//! when the `parallel` feature is enabled and a sequential loop otherwise.
//! Both paths use the same fixed work partition so results are bit-identical.

pub mod analysis;
pub mod data;
pub mod error;
pub mod nn;
pub mod observables;
pub mod par;
pub mod pspin;

pub use error::{Error, Result};
