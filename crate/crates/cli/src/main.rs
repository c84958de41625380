use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

use gaitlink::config::{load_scenario, output_root, scenario_dir, BatchManifest, FrictionConfig, Overrides};
use gaitlink::exo::{run_chirp_identification, FrictionModel};
use gaitlink::reproduce::{self, Figure, DEFAULT_SEED};
use gaitlink::sim::{Fault, ScenarioSpec, SimLog};
use gaitlink::summary::{summarize, write_artifacts, Summary};

const EXIT_CONFIG: u8 = 2;
const EXIT_FAULT: u8 = 3;
const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Parser)]
#[command(name = "gaitlink", version, about = "Simulate and analyse haptic teacher-student gait coupling")]
struct Cli {
    /// Output root; one directory per scenario id is created below it.
    /// Falls back to the scenario's `output` field, then $GAITLINK_OUT, then `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario document.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Impedance preset name, e.g. Z_soft.
        #[arg(long)]
        impedance: Option<String>,
        /// Treadmill speed, km/h.
        #[arg(long)]
        speed: Option<f64>,
        /// Run length, s.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Run every scenario of a batch manifest.
    Batch { manifest: PathBuf },
    /// Identify joint friction with the chirp protocol on the simulated plant.
    IdentifyFriction {
        /// Plant and chirp settings; defaults when omitted.
        config: Option<PathBuf>,
        #[arg(long)]
        min_freq: Option<f64>,
        #[arg(long)]
        max_freq: Option<f64>,
        /// Chirp length, s.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Run the canonical battery of a figure or table and compare it with its reference values.
    Reproduce {
        #[arg(value_parser = parse_figure)]
        figure: Figure,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Recompute the summary of a finished run directory.
    Analyze { run_dir: PathBuf },
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse().map_err(|e: gaitlink::Error| e.to_string())
}

enum Failure {
    Config(anyhow::Error),
    Fault(anyhow::Error),
    Acceptance(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Fault(_) => EXIT_FAULT,
            Failure::Acceptance(_) => EXIT_ACCEPTANCE,
        }
    }
}

type Outcome = Result<(), Failure>;

fn config_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn fault_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Fault(e.into())
}

#[derive(Serialize)]
struct FaultReport<'a> {
    id: &'a str,
    fault: &'a Fault,
}

fn finish_run(root: &Path, spec: &ScenarioSpec, log: &SimLog) -> Result<Summary, Failure> {
    let dir = scenario_dir(root, &spec.id).map_err(fault_err)?;
    let summary = summarize(spec, log);
    write_artifacts(&dir, spec, log, &summary).map_err(fault_err)?;
    if let Some(fault) = &log.fault {
        let report = serde_json::to_string_pretty(&FaultReport { id: &spec.id, fault }).map_err(fault_err)?;
        fs::write(dir.join("fault.json"), &report).map_err(fault_err)?;
        eprintln!("{report}");
    }
    println!("{} -> {}", spec.id, dir.display());
    Ok(summary)
}

fn run(out: Option<&Path>, config: &Path, overrides: Overrides) -> Outcome {
    let mut spec = load_scenario(config)
        .with_context(|| format!("loading {}", config.display()))
        .map_err(config_err)?;
    overrides.apply(&mut spec).map_err(config_err)?;
    let root = output_root(out.or(spec.output.as_deref()));
    let log = gaitlink::sim::run_scenario(&spec).map_err(fault_err)?;
    let summary = finish_run(&root, &spec, &log)?;
    println!("{}", serde_json::to_string_pretty(&summary).map_err(fault_err)?);
    match &log.fault {
        Some(f) => Err(Failure::Fault(anyhow::anyhow!("{} faulted at t = {:.2} s: {}", spec.id, f.time, f.message))),
        None => Ok(()),
    }
}

fn batch(root: &Path, manifest: &Path) -> Outcome {
    let (m, specs) = BatchManifest::load(manifest)
        .with_context(|| format!("loading {}", manifest.display()))
        .map_err(config_err)?;
    let root = m.output_dir.map(|d| manifest.parent().unwrap_or(Path::new(".")).join(d)).unwrap_or_else(|| root.to_path_buf());
    let runs = reproduce::run_all(&specs).map_err(fault_err)?;
    let mut faulted = Vec::new();
    for r in &runs {
        finish_run(&root, &r.spec, &r.log)?;
        if r.log.fault.is_some() {
            faulted.push(r.spec.id.clone());
        }
    }
    if faulted.is_empty() {
        Ok(())
    } else {
        Err(Failure::Fault(anyhow::anyhow!("faulted scenarios: {}", faulted.join(", "))))
    }
}

#[derive(Serialize)]
struct FrictionReport {
    identified: FrictionModel,
    truth: FrictionModel,
    /// Largest relative coefficient error over all joints.
    max_relative_error: f64,
}

fn identify_friction(root: &Path, config: Option<&Path>, min_freq: Option<f64>, max_freq: Option<f64>, duration: Option<f64>) -> Outcome {
    let mut cfg = match config {
        Some(p) => FrictionConfig::load(p).with_context(|| format!("loading {}", p.display())).map_err(config_err)?,
        None => FrictionConfig::default(),
    };
    if let Some(f) = min_freq {
        cfg.chirp.min_freq = f;
    }
    if let Some(f) = max_freq {
        cfg.chirp.max_freq = f;
    }
    if let Some(d) = duration {
        cfg.chirp.duration = d;
    }
    cfg.chirp.validate().map_err(config_err)?;
    let identified = run_chirp_identification(&cfg.plant, &cfg.chirp).map_err(fault_err)?;
    let truth = cfg.plant.friction;
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { (a - b).abs() / b.abs() };
    let max_relative_error = (0..identified.viscous.0.len())
        .flat_map(|i| {
            [
                rel(identified.viscous[i], truth.viscous[i]),
                rel(identified.coulomb[i], truth.coulomb[i]),
            ]
        })
        .fold(0.0, f64::max);
    let report = FrictionReport {
        identified,
        truth,
        max_relative_error,
    };
    let text = serde_json::to_string_pretty(&report).map_err(fault_err)?;
    fs::create_dir_all(root).map_err(fault_err)?;
    let path = root.join("friction.json");
    fs::write(&path, &text).map_err(fault_err)?;
    println!("{text}");
    println!("written to {}", path.display());
    Ok(())
}

fn reproduce_figure(root: &Path, figure: Figure, seed: u64) -> Outcome {
    let (report, runs) = reproduce::reproduce(figure, seed).map_err(fault_err)?;
    let dir = root.join(figure.name());
    for r in &runs {
        finish_run(&dir, &r.spec, &r.log)?;
    }
    let text = report.text();
    fs::write(dir.join("report.txt"), &text).map_err(fault_err)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report).map_err(fault_err)?).map_err(fault_err)?;
    print!("{text}");
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<String> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.number.to_string()).collect();
        Err(Failure::Acceptance(format!("criteria failed: {}", failed.join(", "))))
    }
}

fn analyze(run_dir: &Path) -> Outcome {
    let spec_path = run_dir.join("scenario.json");
    let spec = load_scenario(&spec_path)
        .with_context(|| format!("loading {}", spec_path.display()))
        .map_err(config_err)?;
    let csv = run_dir.join("log.csv");
    let rows = SimLog::read_csv(BufReader::new(
        File::open(&csv).with_context(|| format!("opening {}", csv.display())).map_err(config_err)?,
    ))
    .with_context(|| format!("reading {}", csv.display()))
    .map_err(config_err)?;
    let log = SimLog {
        id: spec.id.clone(),
        kind: spec.kind,
        speed: spec.speed,
        body_mass: spec.exo.body_mass,
        warmup: spec.warmup,
        rows,
        fault: None,
        frames_sent: 0,
        plant_substeps: 0,
    };
    let summary = summarize(&spec, &log);
    let text = serde_json::to_string_pretty(&summary).map_err(fault_err)?;
    fs::write(run_dir.join("analysis.json"), &text).map_err(fault_err)?;
    println!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = output_root(cli.out.as_deref());
    let outcome = match cli.command {
        Command::Run {
            config,
            seed,
            impedance,
            speed,
            duration,
        } => run(
            cli.out.as_deref(),
            &config,
            Overrides {
                seed,
                impedance,
                speed,
                duration,
            },
        ),
        Command::Batch { manifest } => batch(&root, &manifest),
        Command::IdentifyFriction {
            config,
            min_freq,
            max_freq,
            duration,
        } => identify_friction(&root, config.as_deref(), min_freq, max_freq, duration),
        Command::Reproduce { figure, seed } => reproduce_figure(&root, figure, seed),
        Command::Analyze { run_dir } => analyze(&run_dir),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) | Failure::Fault(e) => eprintln!("error: {e:#}"),
                Failure::Acceptance(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}
