use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::{GaitPattern, GaitTrajectory, Student, Teacher, TeacherSource, TeacherSpec};
use crate::analysis::average_cycle;
use crate::error::{Error, Result};
use crate::exo::kinematics::foot_clearance_on;
use crate::exo::{measure_interaction_torque, measure_joint_torque, step_plant, PlantState, Wecc};
use crate::impedance::{discretize, TrackingError};
use crate::joint::{JointVector, Leg};
use crate::safety::{clamp_rom, RateLimiter};
use crate::sim::log::{Fault, LogRow, SimLog, TICK};
use crate::sim::spec::{ScenarioKind, ScenarioSpec, SelectorMode, TransportKind};
use crate::stream::{AngleFrame, FrameBuffer, FrameTransport, Link, Loopback, UdpTransport};

/// Plant integration steps per control tick.
pub const SUBSTEPS: u32 = 10;
/// Teacher frames per control tick.
pub const FRAMES_PER_TICK: u32 = 2;

const STREAM_TEACHER: u64 = 1;
const STREAM_STUDENT: u64 = 2;
const STREAM_SENSOR: u64 = 3;
const STREAM_LINK: u64 = 4;
const STREAM_PLAYER: u64 = 5;
const STREAM_INIT: u64 = 6;

fn component_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Picks the desired trajectory for the current tick; `None` means transparent.
pub fn trajectory_selector(
    mode: SelectorMode,
    stream_angles: Option<JointVector>,
    playback_angles: Option<JointVector>,
) -> Option<JointVector> {
    match mode {
        SelectorMode::Transparent => None,
        SelectorMode::Live => stream_angles,
        SelectorMode::Playback => playback_angles,
    }
}

fn apply_contacts(state: &mut PlantState, student: &Student, weight: f64) {
    let (contact, load) = student.contact();
    state.contact = contact;
    state.contact_force = [load[0] * weight, load[1] * weight];
}

/// Averaged left-heel-strike cycle of the student walking in transparent mode.
pub fn record_baseline(spec: &ScenarioSpec) -> Result<GaitTrajectory> {
    let mut base = spec.clone();
    base.id = format!("{}-baseline", spec.id);
    base.kind = ScenarioKind::Transparency;
    base.duration = spec.baseline_duration + spec.warmup;
    base.selector.clear();
    base.seed = spec.seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let log = run_scenario(&base)?;
    if let Some(f) = log.fault {
        return Err(Error::NonFinite(format!("baseline run faulted: {}", f.message)));
    }
    let (mut samples, period) = average_cycle(log.analysis_rows(), Leg::Left)?;
    let n = samples.len() - 1;
    let seam = (samples[0] + samples[n]) * 0.5;
    samples[0] = seam;
    samples[n] = seam;
    GaitTrajectory::periodic(samples, period)
}

/// Runs a scenario to completion or to its first fault.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<SimLog> {
    spec.validate()?;
    let profile = spec.impedance.resolve()?;
    let mut impedance = discretize(&profile, 1.0 / TICK)?;
    let mut limiter = RateLimiter::new(spec.max_torque_rate, 1.0 / TICK)?;
    // The idle exoskeleton applies no interaction torque before the first tick.
    limiter.rate_limit(&JointVector::ZERO);
    let friction = spec.controller_friction.unwrap_or(spec.plant.friction);
    let mut wecc = Wecc::new(spec.gains, friction, spec.plant.motor_constant)?;
    let exo = spec.exo;
    let plant = spec.plant;
    let sensor = plant.sensor;
    let weight = exo.total_mass() * exo.gravity;

    let mut init_rng = component_rng(spec.seed, STREAM_INIT);
    let mut teacher_rng = component_rng(spec.seed, STREAM_TEACHER);
    let mut student_rng = component_rng(spec.seed, STREAM_STUDENT);
    let mut sensor_rng = component_rng(spec.seed, STREAM_SENSOR);
    let mut player_rng = component_rng(spec.seed, STREAM_PLAYER);
    let link_seed = component_rng(spec.seed, STREAM_LINK).random::<u64>();

    let habit = GaitPattern::for_speed(spec.speed)?;
    let mut student = Student::new(spec.student, habit, init_rng.random::<f64>(), &mut student_rng)?;
    let mut teacher = if spec.uses(SelectorMode::Live) {
        Some(Teacher::new(spec.teacher.clone(), TeacherSource::Live(habit), exo, &mut teacher_rng)?)
    } else {
        None
    };
    let mut player = if spec.uses(SelectorMode::Playback) {
        let baseline = match &spec.baseline {
            Some(path) => GaitTrajectory::read_csv(std::fs::File::open(path)?)?,
            None => record_baseline(spec)?,
        };
        let player_spec = TeacherSpec {
            cadence_noise: 0.0,
            initial_phase: spec.teacher.initial_phase.or(Some(student.phase().rem_euclid(1.0))),
            ..spec.teacher.clone()
        };
        Some(Teacher::new(player_spec, TeacherSource::Playback(baseline), exo, &mut player_rng)?)
    } else {
        None
    };
    let mut link = Link::new(spec.link.clone(), link_seed)?;
    let mut transport: Box<dyn FrameTransport> = match spec.transport {
        TransportKind::Loopback => Box::new(Loopback::new()),
        TransportKind::Udp => Box::new(UdpTransport::bind_local()?),
    };
    let mut buffer = FrameBuffer::new();
    let schedule = spec.schedule();

    let mut state = {
        let (q, w) = student.intent();
        let mut s = PlantState::at_rest(q);
        s.omega = w;
        s.base = [0.0, crate::exo::kinematics::hip_height(&q, &exo)];
        s
    };
    apply_contacts(&mut state, &student, weight);

    let ticks = (spec.duration / TICK).round() as u64;
    let mut log = SimLog {
        id: spec.id.clone(),
        kind: spec.kind,
        speed: spec.speed,
        body_mass: exo.body_mass,
        warmup: spec.warmup,
        rows: Vec::with_capacity(ticks as usize),
        fault: None,
        frames_sent: 0,
        plant_substeps: 0,
    };
    let mut sequence: u32 = 0;
    let dt = TICK / SUBSTEPS as f64;

    for n in 0..ticks {
        let t = n as f64 * TICK;
        let fault = |message: String| Fault { tick: n, time: t, message };

        let mut teacher_contact = student.contact().0;
        if let Some(teacher) = teacher.as_mut() {
            for k in (0..FRAMES_PER_TICK).rev() {
                let ts = t - k as f64 * TICK / FRAMES_PER_TICK as f64;
                teacher.advance_to(ts.max(0.0), &mut teacher_rng);
                link.send(AngleFrame::new(sequence, ts, &teacher.angles()));
                sequence = sequence.wrapping_add(1);
                log.frames_sent += 1;
            }
            for f in link.poll(t) {
                transport.send(&f)?;
            }
            for f in transport.receive()? {
                buffer.push(f);
            }
            teacher_contact = teacher.contact();
        }
        let stream_angles = buffer
            .resample_latest(t, spec.latency_budget)
            .ok()
            .filter(|r| !r.stale)
            .map(|r| r.angles);
        let playback_angles = player.as_mut().map(|p| {
            p.advance_to(t, &mut player_rng);
            p.angles()
        });
        let mode = schedule
            .iter()
            .rev()
            .find(|s| s.time <= t + 1e-9)
            .map_or(spec.default_mode(), |s| s.mode);
        if mode == SelectorMode::Playback {
            if let Some(p) = &player {
                teacher_contact = p.contact();
            }
        }
        let source = trajectory_selector(mode, stream_angles, playback_angles);

        let theta_act = state.q;
        let (theta_des, tau_pre) = match source {
            Some(src) => {
                let theta_des = clamp_rom(&src, &spec.rom);
                match impedance.compute_torque(&TrackingError::new(theta_des, theta_act, t)) {
                    Ok(tau) => (theta_des, tau),
                    Err(e) => {
                        log.fault = Some(fault(e.to_string()));
                        break;
                    }
                }
            }
            None => {
                impedance.reset();
                (theta_act, JointVector::ZERO)
            }
        };
        let tau_des = limiter.rate_limit(&tau_pre);
        let felt = tau_des;
        student.adapt(&felt, TICK);

        apply_contacts(&mut state, &student, weight);
        let stance = state.stance();
        wecc.set_command(&tau_des, &state.q, &stance, &exo);

        let mut row = LogRow {
            time: t,
            warmup: t < spec.warmup,
            mode: mode.code(),
            fallback: mode != SelectorMode::Transparent && source.is_none(),
            stance: stance.code(),
            alpha: stance.left_share().unwrap_or(0.5),
            contact: state.contact,
            teacher_contact,
            theta_des,
            theta_act,
            theta_e: theta_des - theta_act,
            omega: state.omega,
            tau_pre,
            tau_des,
            clearance: foot_clearance_on(&state.q, &exo, state.contact),
            teacher_clearance: foot_clearance_on(&theta_des, &exo, teacher_contact),
            ..LogRow::default()
        };

        let mut failed = None;
        for k in 0..SUBSTEPS {
            if k > 0 {
                apply_contacts(&mut state, &student, weight);
            }
            let human = student.voluntary_torque(&state, &felt);
            let tau_meas = measure_joint_torque(&state, &human, &exo, &sensor, &mut sensor_rng);
            let duty = wecc.duty(&tau_meas, &state.omega, dt);
            if k == 0 {
                row.tau_int = measure_interaction_torque(&human, &sensor, &mut sensor_rng);
                row.duty = duty;
            }
            match step_plant(&state, &duty, &human, dt, &plant, &exo) {
                Ok(next) => state = next,
                Err(e) => {
                    failed = Some(e.to_string());
                    break;
                }
            }
            log.plant_substeps += 1;
            student.advance(dt, &mut student_rng);
        }
        if !row.is_finite() {
            failed.get_or_insert_with(|| format!("non-finite log row at t = {t:.2} s"));
        }
        if let Some(message) = failed {
            log.fault = Some(fault(message));
            break;
        }
        log.rows.push(row);
    }
    Ok(log)
}
