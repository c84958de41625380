//! Fixed-step executive: 200 Hz teacher frames, 100 Hz control and logging,
//! 1 kHz torque loop and plant.

pub mod engine;
pub mod log;
pub mod spec;

pub use engine::{record_baseline, run_scenario, trajectory_selector, FRAMES_PER_TICK, SUBSTEPS};
pub use log::{header, Fault, LogRow, SimLog, NUM_COLUMNS, TICK};
pub use spec::{ImpedanceChoice, ScenarioKind, ScenarioSpec, SelectorMode, SelectorSwitch, TransportKind, SCHEMA_VERSION};
