//! Haptic gait coupling between a teacher joint-angle stream and a student
//! wearing a six-joint sagittal exoskeleton.
//!
//! The crate is organised bottom-up:
//!
//! * [`impedance`] designs and runs the one-pole/one-zero interaction impedance.
//! * [`safety`] clamps commanded angles to the range of motion and rate-limits torque.
//! * [`exo`] holds the seven-link gravity model, friction identification, the
//!   torque loop and the simulated plant.
//! * [`agents`] generates teacher streams and models the student.
//! * [`stream`] is the 200 Hz telemetry path (frame codec, link impairments, resampling).
//! * [`sim`] is the fixed-step executive that wires everything into experiment logs.
//! * [`analysis`] reproduces gait-cycle statistics, correlations, stiffness fits and clearance.
//! * [`summary`] turns a log into per-run metrics and artifacts.
//! * [`config`] and [`reproduce`] back the command-line front end.

pub mod agents;
pub mod analysis;
pub mod config;
pub mod error;
pub mod exo;
pub mod impedance;
pub mod joint;
pub mod numeric;
pub mod reproduce;
pub mod safety;
pub mod sim;
pub mod stream;
pub mod summary;

pub use error::{Error, Result};
pub use joint::{Joint, JointKind, JointVector, Leg};
