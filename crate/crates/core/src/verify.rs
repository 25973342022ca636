//! Post-hoc checks of a computed trajectory against the proved bounds.
//!
//! Everything here is a pure function of the recorded times and states, so a
//! trajectory read back from disk yields the same report.

use crate::collision::FrequencyModel;
use crate::equilibrium::{
    decay_envelopes, deviations, steady_state, DecayConstants, Envelopes, EquilibriumData,
};
use crate::error::{Error, Result};
use crate::integrate::{Monitor, MonitorReport, MONITOR_TOLERANCE};
use crate::species::MomentState;

/// Absolute slack on envelope checks, relative to the initial scale of each
/// quantity. A computed state cannot sit closer to equilibrium than roundoff.
pub const ENVELOPE_ROUNDOFF: f64 = 1e-12;

/// Drift allowed on conserved totals, null-space projections and equilibrium values.
pub const DRIFT_TOLERANCE: f64 = 1e-9;
pub const NULL_SPACE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCheck {
    pub ok: bool,
    /// Largest `deviation / envelope` over the trajectory.
    pub worst_ratio: f64,
    /// Time at which `worst_ratio` occurred.
    pub worst_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub samples: usize,
    pub max_momentum_drift: f64,
    pub max_energy_drift: f64,
    /// J
    pub min_temperature: f64,
    pub temperature_floor_ok: bool,
    pub velocity_bounds_ok: bool,
    pub realizable: bool,
    pub equilibrium: EquilibriumData,
    /// Largest relative change of `u_inf`, `T_inf`, `E_inf` along the trajectory.
    pub equilibrium_drift: f64,
    pub momentum_null_residual: f64,
    pub energy_null_residual: f64,
    /// Trajectory-uniform constants.
    pub constants: DecayConstants,
    /// Constants from the initial state alone, for comparison.
    pub instantaneous: DecayConstants,
    pub velocity_envelope: EnvelopeCheck,
    pub energy_envelope: EnvelopeCheck,
    pub temperature_envelope: EnvelopeCheck,
    pub envelopes: Vec<Envelopes>,
    pub monitors: Vec<MonitorReport>,
}

impl VerificationReport {
    /// Names of failed checks; empty when everything holds.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let checks = [
            (
                self.max_momentum_drift <= DRIFT_TOLERANCE,
                "momentum conservation",
            ),
            (
                self.max_energy_drift <= DRIFT_TOLERANCE,
                "energy conservation",
            ),
            (self.temperature_floor_ok, "temperature floor"),
            (self.velocity_bounds_ok, "velocity bounds"),
            (self.realizable, "realizability"),
            (
                self.equilibrium_drift <= DRIFT_TOLERANCE,
                "equilibrium invariance",
            ),
            (
                self.momentum_null_residual <= NULL_SPACE_TOLERANCE,
                "momentum null space",
            ),
            (
                self.energy_null_residual <= NULL_SPACE_TOLERANCE,
                "energy null space",
            ),
            (self.velocity_envelope.ok, "velocity envelope"),
            (self.energy_envelope.ok, "energy envelope"),
            (self.temperature_envelope.ok, "temperature envelope"),
        ];
        for (ok, name) in checks {
            if !ok {
                out.push(name);
            }
        }
        out
    }

    pub fn passes(&self) -> bool {
        self.failures().is_empty()
    }
}

struct Tracker {
    ok: bool,
    worst_ratio: f64,
    worst_time: f64,
    floor: f64,
}

impl Tracker {
    fn new(scale: f64) -> Self {
        Self {
            ok: true,
            worst_ratio: 0.0,
            worst_time: 0.0,
            floor: ENVELOPE_ROUNDOFF * scale,
        }
    }

    fn record(&mut self, t: f64, deviation: f64, envelope: f64) {
        if deviation > envelope * (1.0 + MONITOR_TOLERANCE) + self.floor {
            self.ok = false;
        }
        let ratio = if envelope > 0.0 {
            deviation / envelope
        } else if deviation > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio > self.worst_ratio {
            self.worst_ratio = ratio;
            self.worst_time = t;
        }
    }

    fn finish(self) -> EnvelopeCheck {
        EnvelopeCheck {
            ok: self.ok,
            worst_ratio: self.worst_ratio,
            worst_time: self.worst_time,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn verify(
    times: &[f64],
    states: &[MomentState],
    model: &FrequencyModel,
    eps: f64,
) -> Result<VerificationReport> {
    if times.len() != states.len() || states.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} times for {} states",
            times.len(),
            states.len()
        )));
    }
    let initial = &states[0];
    let comp = initial.composition();
    let rho = comp.mass_densities();
    let nd = comp.number_densities();
    let monitor = Monitor::new(initial);
    let eq = steady_state(initial);
    let constants = DecayConstants::conservative(initial, model)?;
    let instantaneous = DecayConstants::instantaneous(initial, model)?;

    let u_scale = initial
        .velocities()
        .iter()
        .fold(eq.u_inf.norm(), |m, x| m.max(x.abs()));
    let e_scale = initial.energies().norm();
    let mut vel = Tracker::new(u_scale);
    let mut en = Tracker::new(e_scale);
    let mut temp = Tracker::new(eq.t_inf.abs());

    // projections onto P^{1/2} 1 and Q^{1/2} 1, relative to |P^{1/2} 1| |W0| etc.
    let w_scale = (rho.sum()
        * (0..initial.len())
            .map(|i| rho[i] * initial.velocities().row(i).norm_squared())
            .sum::<f64>())
    .sqrt()
    .max(f64::MIN_POSITIVE);
    let xi_scale = (nd.sum() * initial.energies().component_div(nd).dot(initial.energies()))
        .sqrt()
        .max(f64::MIN_POSITIVE);

    let mut monitors = Vec::with_capacity(states.len());
    let mut envelopes = Vec::with_capacity(states.len());
    let mut equilibrium_drift: f64 = 0.0;
    let mut momentum_null: f64 = 0.0;
    let mut energy_null: f64 = 0.0;
    let u_inf_scale = u_scale.max(f64::MIN_POSITIVE);

    for (&t, state) in times.iter().zip(states) {
        monitors.push(monitor.check(state, 0));

        let now = steady_state(state);
        let du = (&now.u_inf - &eq.u_inf).norm() / u_inf_scale;
        let de = (&now.e_inf - &eq.e_inf).norm() / eq.e_inf.norm().max(f64::MIN_POSITIVE);
        equilibrium_drift = equilibrium_drift
            .max(du)
            .max(rel(now.t_inf, eq.t_inf))
            .max(de);

        // (W - W_inf)^T P^{1/2} 1 = sum rho_i u_i - rho_tot u_inf
        let p = state.total_momentum() - &eq.u_inf * rho.sum();
        momentum_null = momentum_null.max(p.norm() / w_scale);
        // (xi - xi_inf)^T Q^{1/2} 1 = sum (E_i - E_inf_i)
        let q = (state.energies() - &eq.e_inf).sum();
        energy_null = energy_null.max(q.abs() / xi_scale);

        let env = decay_envelopes(&constants, eps, t)?;
        let dev = deviations(state, &eq);
        vel.record(t, dev.velocity, env.velocity);
        en.record(t, dev.energy, env.energy);
        temp.record(t, dev.temperature, env.temperature);
        envelopes.push(env);
    }

    Ok(VerificationReport {
        samples: states.len(),
        max_momentum_drift: monitors
            .iter()
            .map(|m| m.total_momentum_drift)
            .fold(0.0, f64::max),
        max_energy_drift: monitors
            .iter()
            .map(|m| m.total_energy_drift)
            .fold(0.0, f64::max),
        min_temperature: monitors
            .iter()
            .map(|m| m.min_temperature)
            .fold(f64::INFINITY, f64::min),
        temperature_floor_ok: monitors.iter().all(|m| m.temperature_floor_ok),
        velocity_bounds_ok: monitors.iter().all(|m| m.velocity_bounds_ok),
        realizable: monitors.iter().all(|m| m.realizable),
        equilibrium: eq,
        equilibrium_drift,
        momentum_null_residual: momentum_null,
        energy_null_residual: energy_null,
        constants,
        instantaneous,
        velocity_envelope: vel.finish(),
        energy_envelope: en.finish(),
        temperature_envelope: temp.finish(),
        envelopes,
        monitors,
    })
}
