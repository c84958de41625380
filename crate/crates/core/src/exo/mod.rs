//! Seven-link sagittal exoskeleton: gravity model, friction, torque loop and
//! the simulated coupled plant.

pub mod control;
pub mod friction;
pub mod gravity;
pub mod kinematics;
pub mod params;
pub mod plant;

pub use control::{torque_pd, TorqueGains, Wecc};
pub use friction::{
    fit_joint_friction, fit_joint_friction_with_inertia, friction_compensation, identify_friction, run_chirp_identification, ChirpProtocol,
    FrictionModel, JointFriction,
};
pub use gravity::{gravity_compensation, potential_energy, GravityBase, StanceState};
pub use params::{ExoParams, LegGeometry, PlantParams, SensorModel};
pub use plant::{measure_interaction_torque, measure_joint_torque, step_plant, PlantState};
