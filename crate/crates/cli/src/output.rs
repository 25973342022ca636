//! CSV and JSON output, and reading trajectories back.
//!
//! Numbers are written with Rust's shortest round-trip `{:e}` formatting, so
//! a trajectory read back from disk reproduces the in-memory states exactly.

use std::io::{Read, Write};
use std::sync::Arc;

use multibgk::equilibrium::{deviations, Envelopes};
use multibgk::verify::EnvelopeCheck;
use multibgk::{
    energy_to_kelvin, temperatures_of, DecayConstants, MixtureComposition, MomentState,
    VerificationReport,
};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("trajectory file: {0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] multibgk::Error),
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn trajectory_header(comp: &MixtureComposition, dim: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for sp in comp.species() {
        for k in 1..=dim {
            h.push(format!("u_{}_{k}", sp.label));
        }
        h.push(format!("T_{}_K", sp.label));
        h.push(format!("E_{}", sp.label));
    }
    for k in 1..=dim {
        h.push(format!("momentum_{k}"));
    }
    h.extend(
        [
            "energy_total",
            "T_min_K",
            "velocity_envelope",
            "energy_envelope",
            "temperature_envelope_K",
        ]
        .map(String::from),
    );
    h
}

/// One row per recorded state; `envelopes` must be on the same grid.
pub fn write_trajectory<W: Write>(
    out: W,
    times: &[f64],
    states: &[MomentState],
    envelopes: &[Envelopes],
) -> Result<(), OutputError> {
    let first = states
        .first()
        .ok_or_else(|| OutputError::Format("no states to write".into()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(first.composition(), first.dimension()))?;
    for ((&t, s), env) in times.iter().zip(states).zip(envelopes) {
        let temps = temperatures_of(s);
        let mut row = vec![num(t)];
        for i in 0..s.len() {
            row.extend(s.velocities().row(i).iter().map(|&x| num(x)));
            row.push(num(energy_to_kelvin(temps.values()[i])));
            row.push(num(s.energies()[i]));
        }
        row.extend(s.total_momentum().iter().map(|&x| num(x)));
        row.push(num(s.total_energy()));
        row.push(num(energy_to_kelvin(temps.min())));
        row.push(num(env.velocity));
        row.push(num(env.energy));
        row.push(num(energy_to_kelvin(env.temperature)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Distances to equilibrium next to their envelopes.
pub fn write_envelopes<W: Write>(
    out: W,
    times: &[f64],
    states: &[MomentState],
    report: &VerificationReport,
) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t",
        "velocity_deviation",
        "velocity_envelope",
        "energy_deviation",
        "energy_envelope",
        "temperature_deviation_K",
        "temperature_envelope_K",
    ])?;
    for ((&t, s), env) in times.iter().zip(states).zip(&report.envelopes) {
        let d = deviations(s, &report.equilibrium);
        w.write_record([
            num(t),
            num(d.velocity),
            num(env.velocity),
            num(d.energy),
            num(env.energy),
            num(energy_to_kelvin(d.temperature)),
            num(energy_to_kelvin(env.temperature)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse(field: &str, row: usize) -> Result<f64, OutputError> {
    field
        .trim()
        .parse()
        .map_err(|_| OutputError::Format(format!("row {row}: `{field}` is not a number")))
}

/// Reads times and states back from a trajectory CSV written for `comp`.
pub fn read_trajectory<R: Read>(
    input: R,
    comp: &Arc<MixtureComposition>,
) -> Result<(Vec<f64>, Vec<MomentState>), OutputError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let n = comp.len();
    // columns = 6 + 2N + d (N + 1)
    let rest = header.len().saturating_sub(6 + 2 * n);
    let dim = rest / (n + 1);
    if dim == 0 || !rest.is_multiple_of(n + 1) || header != trajectory_header(comp, dim) {
        return Err(OutputError::Format(
            "header does not match the scenario's species".into(),
        ));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let t = parse(&rec[0], row)?;
        let mut u = DMatrix::zeros(n, dim);
        let mut e = DVector::zeros(n);
        for i in 0..n {
            let base = 1 + i * (dim + 2);
            for k in 0..dim {
                u[(i, k)] = parse(&rec[base + k], row)?;
            }
            e[i] = parse(&rec[base + dim + 1], row)?;
        }
        times.push(t);
        states.push(MomentState::new(Arc::clone(comp), u, e)?);
    }
    Ok((times, states))
}

fn constants_json(c: &DecayConstants) -> Value {
    json!({
        "z_min": c.bounds.z_min,
        "z_max": c.bounds.z_max,
        "zhat_min": c.bounds.zhat_min,
        "zhat_max": c.bounds.zhat_max,
        "bounds_vacuous": c.bounds.vacuous,
        "C_U": c.c_u,
        "u_max": c.u_max,
        "u_max_energy_bound": c.u_max_energy,
        "C0": c.c0,
        "C1": c.c1,
        "C2": c.c2,
        "B_max": c.b_max,
    })
}

fn envelope_json(e: &EnvelopeCheck) -> Value {
    json!({ "ok": e.ok, "worst_ratio": e.worst_ratio, "worst_time": e.worst_time })
}

/// Everything in the report that is a function of the recorded states.
pub fn verification_json(r: &VerificationReport) -> Value {
    json!({
        "passed": r.passes(),
        "failures": r.failures(),
        "samples": r.samples,
        "max_momentum_drift": r.max_momentum_drift,
        "max_energy_drift": r.max_energy_drift,
        "min_temperature_K": energy_to_kelvin(r.min_temperature),
        "temperature_floor_ok": r.temperature_floor_ok,
        "velocity_bounds_ok": r.velocity_bounds_ok,
        "realizable": r.realizable,
        "equilibrium_drift": r.equilibrium_drift,
        "momentum_null_residual": r.momentum_null_residual,
        "energy_null_residual": r.energy_null_residual,
        "equilibrium": {
            "u_inf": r.equilibrium.u_inf.as_slice(),
            "T_inf_K": energy_to_kelvin(r.equilibrium.t_inf),
            "E_inf": r.equilibrium.e_inf.as_slice(),
        },
        "decay_constants": constants_json(&r.constants),
        "instantaneous_constants": constants_json(&r.instantaneous),
        "envelopes": {
            "velocity": envelope_json(&r.velocity_envelope),
            "energy": envelope_json(&r.energy_envelope),
            "temperature": envelope_json(&r.temperature_envelope),
        },
    })
}
