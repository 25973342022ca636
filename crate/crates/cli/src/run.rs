//! Running one scenario end to end.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use multibgk::{
    simulate, suggest_step, verify, IntegratorConfig, Method, Trajectory, VerificationReport,
};
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::output::{verification_json, write_envelopes, write_trajectory, OutputError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_MONITOR: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const ENVELOPE_FILE: &str = "envelopes.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("integration failed: {0}")]
    Integrator(#[from] multibgk::Error),
    #[error("writing results: {0}")]
    Output(#[from] OutputError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_PARSE,
            RunError::Integrator(_) | RunError::Output(_) => EXIT_FAILURE,
        }
    }
}

/// Command-line settings that replace those in a scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub method: Option<Method>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub eps: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &ScenarioConfig) -> Result<ScenarioConfig, ConfigError> {
        let mut c = cfg.clone();
        if let Some(m) = self.method {
            c.method = m;
        }
        if let Some(eps) = self.eps {
            c.eps = eps;
        }
        c.dt = self.dt.or(c.dt);
        c.t_final = self.t_final.or(c.t_final);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub report: VerificationReport,
    pub integrator: IntegratorConfig,
    pub elapsed: Duration,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passes() {
            EXIT_OK
        } else {
            EXIT_MONITOR
        }
    }
}

/// Integrates and verifies without touching the filesystem.
pub fn execute(cfg: &ScenarioConfig) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let initial = cfg.initial_state()?;
    let (dt, t_final) = match (cfg.dt, cfg.t_final) {
        (Some(dt), Some(t)) => (dt, t),
        (dt, t) => {
            let (auto_dt, auto_t) = suggest_step(&initial, &cfg.model, cfg.eps)?;
            (dt.unwrap_or(auto_dt), t.unwrap_or(auto_t))
        }
    };
    let mut integrator = IntegratorConfig::new(dt, t_final, cfg.eps, cfg.method)?;
    integrator.output_stride = cfg.output_stride;
    let trajectory = simulate(&initial, &integrator, &cfg.model)?;
    let report = verify(&trajectory.times, &trajectory.states, &cfg.model, cfg.eps)?;
    Ok(RunOutcome {
        trajectory,
        report,
        integrator,
        elapsed: start.elapsed(),
    })
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::BackwardEuler => "be",
        Method::Rk4 => "rk4",
    }
}

/// Writes the trajectory, envelope and summary files into `dir`.
pub fn write_outputs(
    cfg: &ScenarioConfig,
    outcome: &RunOutcome,
    dir: &Path,
) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(OutputError::from)?;
    let traj = &outcome.trajectory;
    let file = |name: &str| -> Result<BufWriter<File>, RunError> {
        Ok(BufWriter::new(
            File::create(dir.join(name)).map_err(OutputError::from)?,
        ))
    };
    write_trajectory(
        file(TRAJECTORY_FILE)?,
        &traj.times,
        &traj.states,
        &outcome.report.envelopes,
    )?;
    write_envelopes(
        file(ENVELOPE_FILE)?,
        &traj.times,
        &traj.states,
        &outcome.report,
    )?;

    let picard: Vec<usize> = traj.monitors.iter().map(|m| m.picard_iterations).collect();
    let summary = json!({
        "scenario": cfg.name,
        "method": method_name(cfg.method),
        "eps": cfg.eps,
        "dt": outcome.integrator.dt,
        "t_final": outcome.integrator.t_final,
        "output_stride": outcome.integrator.output_stride,
        "species": cfg.species.iter().map(|s| s.label.as_str()).collect::<Vec<_>>(),
        "runtime_seconds": outcome.elapsed.as_secs_f64(),
        "integrator": {
            "max_picard_iterations": picard.iter().max(),
            "recorded_picard_iterations": picard.iter().sum::<usize>(),
        },
        "verification": verification_json(&outcome.report),
    });
    let text =
        serde_json::to_string_pretty(&summary).map_err(|e| OutputError::Format(e.to_string()))?;
    fs::write(dir.join(SUMMARY_FILE), text).map_err(OutputError::from)?;
    Ok(())
}

/// Runs one scenario, writes its files, and returns the exit code.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path) -> (i32, Result<RunOutcome, RunError>) {
    let result = execute(cfg).and_then(|o| write_outputs(cfg, &o, dir).map(|_| o));
    let code = match &result {
        Ok(o) => o.exit_code(),
        Err(e) => e.exit_code(),
    };
    (code, result)
}

/// Output directory: explicit flag or environment value first, then the
/// scenario's own setting, then `multibgk-out`.
pub fn output_base(flag_or_env: Option<&Path>, cfg: &ScenarioConfig) -> PathBuf {
    flag_or_env
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("multibgk-out"))
}
