use std::fs;
use std::io::Write;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use capguard::bridge::{self, BridgeConfig, LiveSession};
use capguard::sim::{write_trace, Metrics, TraceFormat};
use capguard::{Error, ParamsFile, RobotModel, Scenario, Simulation};

#[derive(Debug, Parser)]
#[command(name = "capguard", version, about = "Human-robot collision avoidance simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Simulate a scenario and write the trace and metrics.json.
    Run {
        scenario: PathBuf,
        /// Controller parameter overrides (JSON).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: TraceFormat,
    },
    /// Validate a robot model, parameter file or scenario.
    Check { file: PathBuf },
    /// Run a scenario live and serve it on ws://127.0.0.1:PORT/ws.
    Serve {
        scenario: PathBuf,
        #[arg(long, default_value_t = 8765)]
        port: u16,
    },
}

/// Outcome of a command that did not hit an input error.
enum Outcome {
    Ok,
    SafetyViolation,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CAPGUARD_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run {
            scenario,
            params,
            out,
            format,
        } => cmd_run(&scenario, params.as_deref(), &out, format),
        Cmd::Check { file } => cmd_check(&file),
        Cmd::Serve { scenario, port } => cmd_serve(&scenario, port),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::SafetyViolation) => ExitCode::from(2),
        Err(e) => {
            let obj = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{obj}");
            ExitCode::from(1)
        }
    }
}

fn print_json(value: serde_json::Value) {
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{value}");
}

fn cmd_run(scenario_path: &Path, params: Option<&Path>, out: &Path, format: TraceFormat) -> Result<Outcome, Error> {
    let scenario = Scenario::load(scenario_path)?;
    let overrides = params.map(ParamsFile::load).transpose()?;
    let run = Simulation::new(&scenario, overrides.as_ref())?.run()?;

    let mut trace = Vec::new();
    write_trace(&run.trace, format, &mut trace)?;
    let metrics = serde_json::to_vec_pretty(&run.metrics).map_err(|e| Error::Output(e.to_string()))?;

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let trace_path = out.join(format.file_name());
    let metrics_path = out.join("metrics.json");
    write_atomically(&trace_path, &trace)?;
    write_atomically(&metrics_path, &metrics)?;
    info!("wrote {} and {}", trace_path.display(), metrics_path.display());

    let m = &run.metrics;
    if m.safety_violated() {
        print_json(violation_report(m, &trace_path, &metrics_path));
        return Ok(Outcome::SafetyViolation);
    }
    print_json(json!({
        "status": "ok",
        "scenario": m.scenario,
        "ticks": m.ticks,
        "min_d_min": m.min_d_min,
        "completion_time": m.completion_time,
        "max_eef_accel": m.max_eef_accel,
        "trace": trace_path,
        "metrics": metrics_path,
    }));
    Ok(Outcome::Ok)
}

fn violation_report(m: &Metrics, trace: &Path, metrics: &Path) -> serde_json::Value {
    json!({
        "status": "safety_violation",
        "scenario": m.scenario,
        "violation_count": m.violations.len(),
        "first": m.violations.first(),
        "min_d_min": m.min_d_min,
        "min_d_min_t": m.min_d_min_t,
        "min_d_min_pair": m.min_d_min_pair,
        "trace": trace,
        "metrics": metrics,
    })
}

/// Writes to a sibling temporary file and renames it into place, so a failed
/// run never leaves a truncated output behind.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

#[derive(Debug, Clone, Copy)]
enum FileKind {
    Model,
    Params,
    Scenario,
}

impl FileKind {
    fn name(self) -> &'static str {
        match self {
            FileKind::Model => "model",
            FileKind::Params => "params",
            FileKind::Scenario => "scenario",
        }
    }

    fn detect(value: &serde_json::Value) -> FileKind {
        let has = |key| value.get(key).is_some();
        if has("joints") || has("capsules") {
            FileKind::Model
        } else if has("initial_q") || has("task") || has("human") {
            FileKind::Scenario
        } else {
            FileKind::Params
        }
    }
}

fn cmd_check(path: &Path) -> Result<Outcome, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    let kind = FileKind::detect(&value);
    let detail = match kind {
        FileKind::Model => {
            let model = RobotModel::from_json_str(&text)?;
            json!({ "name": model.name, "capsules": model.capsules.len(), "reach": model.reach() })
        }
        FileKind::Params => {
            let params = ParamsFile::from_json_str(&text)?.resolve(&RobotModel::iiwa14())?;
            json!({ "resolved": params })
        }
        FileKind::Scenario => {
            let scenario = Scenario::load(path)?;
            let sim = Simulation::new(&scenario, None)?;
            json!({
                "name": scenario.name,
                "segments": scenario.task.segments.len(),
                "duration": scenario.duration,
                "ticks": sim.tick_count(),
                "live": scenario.human.live,
            })
        }
    };
    print_json(json!({ "status": "ok", "kind": kind.name(), "file": path, "detail": detail }));
    Ok(Outcome::Ok)
}

fn cmd_serve(scenario_path: &Path, port: u16) -> Result<Outcome, Error> {
    let mut scenario = Scenario::load(scenario_path)?;
    if !scenario.human.live {
        warn!("{}: scripted human motion replaced by live control", scenario.name);
        scenario.human.live = true;
    }
    let sim = Simulation::new(&scenario, None)?;

    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io("tokio runtime", e))?;
    runtime.block_on(async move {
        let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::io(addr.to_string(), e))?;
        let local = listener.local_addr().map_err(|e| Error::io(addr.to_string(), e))?;
        print_json(json!({ "status": "listening", "url": format!("ws://{local}/ws"), "scenario": scenario.name }));
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            info!("interrupt received, shutting down");
        };
        bridge::serve(listener, LiveSession::new(sim), BridgeConfig::default(), shutdown)
            .await
            .map_err(|e| Error::io(local.to_string(), e))
    })?;
    Ok(Outcome::Ok)
}
