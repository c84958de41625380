use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::agents::{StudentSpec, TeacherSpec};
use crate::error::{Error, Result};
use crate::exo::{ExoParams, FrictionModel, PlantParams, TorqueGains};
use crate::impedance::{preset, ImpedanceProfile};
use crate::safety::{RomLimits, DEFAULT_MAX_TORQUE_RATE};
use crate::stream::LinkModel;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    Transparency,
    VirtualTeacherPlayback,
    CoupledWalk,
    AsymmetricWalk,
    ObstacleWalk,
}

/// Source of the desired trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorMode {
    Transparent,
    Live,
    Playback,
}

impl SelectorMode {
    pub fn code(self) -> u8 {
        match self {
            SelectorMode::Transparent => 0,
            SelectorMode::Live => 1,
            SelectorMode::Playback => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorSwitch {
    /// Takes effect at the first control tick at or after this time, s.
    pub time: f64,
    pub mode: SelectorMode,
}

/// A preset name or explicit parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ImpedanceChoice {
    Preset(String),
    Custom(ImpedanceProfile),
}

impl ImpedanceChoice {
    pub fn resolve(&self) -> Result<ImpedanceProfile> {
        match self {
            ImpedanceChoice::Preset(name) => preset(name),
            ImpedanceChoice::Custom(p) => {
                p.validate()?;
                Ok(*p)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            ImpedanceChoice::Preset(name) => name.clone(),
            ImpedanceChoice::Custom(p) => format!("k{}_{}_f{}", p.k_low_f, p.k_high_f, p.f_cut),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    #[default]
    Loopback,
    Udp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub schema_version: u32,
    pub id: String,
    pub kind: ScenarioKind,
    /// Treadmill speed, km/h.
    pub speed: f64,
    /// s.
    pub duration: f64,
    pub impedance: ImpedanceChoice,
    #[serde(default)]
    pub teacher: TeacherSpec,
    #[serde(default)]
    pub student: StudentSpec,
    #[serde(default)]
    pub link: LinkModel,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub rom: RomLimits,
    #[serde(default = "default_max_torque_rate")]
    pub max_torque_rate: f64,
    #[serde(default)]
    pub exo: ExoParams,
    #[serde(default)]
    pub plant: PlantParams,
    #[serde(default)]
    pub gains: TorqueGains,
    /// Friction the controller compensates; the plant's true friction when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller_friction: Option<FrictionModel>,
    /// Leading interval flagged as warm-up, s.
    #[serde(default = "default_warmup")]
    pub warmup: f64,
    /// Mode changes; the kind's default source when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selector: Vec<SelectorSwitch>,
    /// Frames newer than `t - latency_budget` are not used yet, s.
    #[serde(default)]
    pub latency_budget: f64,
    #[serde(default)]
    pub transport: TransportKind,
    /// Playback cycle CSV; recorded from a transparent run when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<PathBuf>,
    /// Length of the transparent run used to record a baseline, s.
    #[serde(default = "default_baseline_duration")]
    pub baseline_duration: f64,
}

fn default_max_torque_rate() -> f64 {
    DEFAULT_MAX_TORQUE_RATE
}

fn default_warmup() -> f64 {
    5.0
}

fn default_baseline_duration() -> f64 {
    60.0
}

impl ScenarioSpec {
    /// A scenario of `kind` with every other field at its default.
    pub fn new(id: impl Into<String>, kind: ScenarioKind, speed: f64, duration: f64, impedance: &str, seed: u64) -> Self {
        ScenarioSpec {
            schema_version: SCHEMA_VERSION,
            id: id.into(),
            kind,
            speed,
            duration,
            impedance: ImpedanceChoice::Preset(impedance.to_string()),
            teacher: TeacherSpec::default(),
            student: StudentSpec::default(),
            link: LinkModel::default(),
            seed,
            output: None,
            rom: RomLimits::default(),
            max_torque_rate: DEFAULT_MAX_TORQUE_RATE,
            exo: ExoParams::default(),
            plant: PlantParams::default(),
            gains: TorqueGains::default(),
            controller_friction: None,
            warmup: default_warmup(),
            selector: Vec::new(),
            latency_budget: 0.0,
            transport: TransportKind::Loopback,
            baseline: None,
            baseline_duration: default_baseline_duration(),
        }
    }

    pub fn default_mode(&self) -> SelectorMode {
        match self.kind {
            ScenarioKind::Transparency => SelectorMode::Transparent,
            ScenarioKind::VirtualTeacherPlayback => SelectorMode::Playback,
            _ => SelectorMode::Live,
        }
    }

    /// Selector schedule with the default mode at time zero.
    pub fn schedule(&self) -> Vec<SelectorSwitch> {
        let mut s = vec![SelectorSwitch {
            time: 0.0,
            mode: self.default_mode(),
        }];
        s.extend(self.selector.iter().copied());
        s
    }

    pub fn uses(&self, mode: SelectorMode) -> bool {
        self.schedule().iter().any(|s| s.mode == mode)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::param(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.id.is_empty() {
            return Err(Error::param("id", "must not be empty"));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::param("duration", format!("must be > 0 s, got {}", self.duration)));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::param("speed", format!("must be > 0 km/h, got {}", self.speed)));
        }
        self.impedance.resolve()?;
        self.teacher.validate()?;
        self.student.validate()?;
        self.link.validate()?;
        self.rom.validate()?;
        self.exo.validate()?;
        self.plant.validate()?;
        self.gains.validate()?;
        if let Some(f) = &self.controller_friction {
            f.validate()?;
        }
        if !(self.max_torque_rate.is_finite() && self.max_torque_rate > 0.0) {
            return Err(Error::param("max_torque_rate", "must be > 0"));
        }
        if !(self.warmup.is_finite() && self.warmup >= 0.0) {
            return Err(Error::param("warmup", "must be >= 0"));
        }
        if !(self.latency_budget.is_finite() && self.latency_budget >= 0.0) {
            return Err(Error::param("latency_budget", "must be >= 0"));
        }
        if !(self.baseline_duration.is_finite() && self.baseline_duration > 0.0) {
            return Err(Error::param("baseline_duration", "must be > 0"));
        }
        if !self.selector.windows(2).all(|w| w[0].time <= w[1].time) || self.selector.iter().any(|s| !s.time.is_finite() || s.time < 0.0) {
            return Err(Error::param("selector", "switch times must be >= 0 and non-decreasing"));
        }
        match self.kind {
            ScenarioKind::AsymmetricWalk if self.teacher.asymmetry_deg.iter().all(|d| *d == 0.0) => {
                Err(Error::param("teacher.asymmetry_deg", "an asymmetric walk needs a nonzero asymmetry"))
            }
            ScenarioKind::ObstacleWalk if self.teacher.obstacles.is_empty() => {
                Err(Error::param("teacher.obstacles", "an obstacle walk needs at least one obstacle"))
            }
            _ => Ok(()),
        }
    }
}
