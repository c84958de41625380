//! Teacher and student models.

pub mod noise;
pub mod pattern;
pub mod student;
pub mod teacher;
pub mod trajectory;

pub use pattern::{contact_schedule, leg_phase, GaitPattern, STANCE_FRACTION};
pub use student::{Student, StudentSpec};
pub use teacher::{Obstacle, Teacher, TeacherSource, TeacherSpec};
pub use trajectory::GaitTrajectory;
