//! Time stepping: backward Euler with frozen-coefficient Picard iteration,
//! classical RK4 as a reference, and per-step monitors.

use nalgebra::{DMatrix, DVector};

use crate::collision::{assemble, FrequencyModel};
use crate::dynamics::{check_knudsen, evaluate, scaled_operators};
use crate::equilibrium::steady_state;
use crate::error::{Error, Result};
use crate::linalg::{lu_solve, lu_solve_vector, symmetric_eigenvalues};
use crate::species::{temperatures_of, MomentState};

pub const DEFAULT_PICARD_TOL: f64 = 1e-12;
pub const DEFAULT_PICARD_MAX_ITER: usize = 100;
pub const MAX_HALVINGS: usize = 10;
const ABSOLUTE_FLOOR: f64 = 1e-300;

/// Relative slack used by the monitors.
pub const MONITOR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    BackwardEuler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    pub eps: f64,
    pub method: Method,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub output_stride: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_final: f64, eps: f64, method: Method) -> Result<Self> {
        let cfg = Self {
            dt,
            t_final,
            eps,
            method,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max_iter: DEFAULT_PICARD_MAX_ITER,
            output_stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.output_stride = stride;
        self
    }

    /// Number of steps `simulate` takes; the last one may be shortened.
    pub fn steps(&self) -> usize {
        step_count(self.dt, self.t_final)
    }

    pub fn validate(&self) -> Result<()> {
        check_knudsen(self.eps)?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be nonnegative, got {}",
                self.t_final
            )));
        }
        if self.picard_tol.is_nan() || self.picard_tol <= 0.0 || self.picard_max_iter == 0 {
            return Err(Error::InvalidParameter(
                "Picard tolerance and iteration limit must be positive".into(),
            ));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidParameter(
                "output stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub state: MomentState,
    /// Picard sweeps summed over all sub-steps (0 for RK4).
    pub picard_iterations: usize,
    /// Deepest step-halving level reached.
    pub halvings: usize,
}

fn max_abs(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |m, x| m.max(x.abs()))
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let diff = max_abs(new.iter().zip(old).map(|(a, b)| a - b));
    let scale = max_abs(new.iter().copied()).max(ABSOLUTE_FLOOR);
    diff / scale
}

/// Negative temperatures are never allowed; hard-sphere frequencies also need `T > 0`.
fn check_temperatures(state: &MomentState, model: &FrequencyModel) -> Result<()> {
    let strict = matches!(model, FrequencyModel::HardSphere);
    let temps = temperatures_of(state);
    for (sp, &t) in state
        .composition()
        .species()
        .iter()
        .zip(temps.values().iter())
    {
        let ok = if strict { t > 0.0 } else { t >= 0.0 };
        if !ok {
            return Err(Error::RealizabilityLost(format!(
                "species `{}` reached temperature {t:e} J",
                sp.label
            )));
        }
    }
    Ok(())
}

fn backward_euler_attempt(
    state: &MomentState,
    dt: f64,
    cfg: &IntegratorConfig,
    model: &FrequencyModel,
) -> Result<(MomentState, usize)> {
    let comp = state.composition();
    let rho = comp.mass_densities();
    let nd = comp.number_densities();
    let masses = comp.masses();
    let k = dt / cfg.eps;

    let momenta = state.momenta();
    let mut iterate = state.clone();
    let mut mats = assemble(&iterate, model)?;
    let mut residual = f64::INFINITY;
    for sweep in 1..=cfg.picard_max_iter {
        let lhs_u = DMatrix::from_diagonal(&rho) + mats.d_minus_a() * k;
        let u_new = lu_solve(&lhs_u, &momenta)?;
        mats.refresh_velocity_terms(&u_new);

        let mut lhs_e = mats.f_minus_b() * k;
        for (j, mut col) in lhs_e.column_iter_mut().enumerate() {
            col /= nd[j];
        }
        lhs_e += DMatrix::identity(state.len(), state.len());
        let rhs_e = state.energies() + mats.g_minus_c() * &masses * (0.5 * k);
        let e_new = lu_solve_vector(&lhs_e, &rhs_e)?;

        residual = relative_change(u_new.as_slice(), iterate.velocities().as_slice()).max(
            relative_change(e_new.as_slice(), iterate.energies().as_slice()),
        );
        iterate = state.with_moments(u_new, e_new);
        check_temperatures(&iterate, model)?;
        if residual < cfg.picard_tol {
            return Ok((iterate, sweep));
        }
        mats = assemble(&iterate, model)?;
    }
    Err(Error::PicardNonConvergence {
        iterations: cfg.picard_max_iter,
        residual,
    })
}

fn backward_euler_halving(
    state: &MomentState,
    dt: f64,
    cfg: &IntegratorConfig,
    model: &FrequencyModel,
    depth: usize,
) -> Result<StepReport> {
    match backward_euler_attempt(state, dt, cfg, model) {
        Ok((state, picard_iterations)) => Ok(StepReport {
            state,
            picard_iterations,
            halvings: depth,
        }),
        Err(Error::RealizabilityLost(_)) if depth < MAX_HALVINGS => {
            let first = backward_euler_halving(state, 0.5 * dt, cfg, model, depth + 1)?;
            let second = backward_euler_halving(&first.state, 0.5 * dt, cfg, model, depth + 1)?;
            Ok(StepReport {
                state: second.state,
                picard_iterations: first.picard_iterations + second.picard_iterations,
                halvings: first.halvings.max(second.halvings),
            })
        }
        Err(e) => Err(e),
    }
}

/// One backward Euler step of size `cfg.dt`.
///
/// Each Picard sweep freezes the coupling matrices at the current iterate and
/// solves `(P + dt/eps (D - A)) U = P U^n`, then refreshes the velocity terms
/// and solves `(I + dt/eps (F - B) Q^{-1}) E = E^n + dt/(2 eps) (G - C) M 1`.
/// A step whose iterate loses positive temperatures is redone as two half steps.
pub fn backward_euler_step(
    state: &MomentState,
    cfg: &IntegratorConfig,
    model: &FrequencyModel,
) -> Result<StepReport> {
    cfg.validate()?;
    backward_euler_halving(state, cfg.dt, cfg, model, 0)
}

fn stage(
    base: &MomentState,
    momenta: &DMatrix<f64>,
    energies: &DVector<f64>,
    rho: &DVector<f64>,
) -> MomentState {
    let mut u = momenta.clone();
    for (i, mut row) in u.row_iter_mut().enumerate() {
        row /= rho[i];
    }
    base.with_moments(u, energies.clone())
}

fn rates(
    state: &MomentState,
    model: &FrequencyModel,
    eps: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_temperatures(state, model)?;
    let r = evaluate(state, model, eps)?;
    Ok((r.momentum_rate, r.energy_rate))
}

fn rk4_advance(
    state: &MomentState,
    dt: f64,
    eps: f64,
    model: &FrequencyModel,
) -> Result<MomentState> {
    let rho = state.composition().mass_densities();
    let k0 = state.momenta();
    let e0 = state.energies();

    let (k1, e1) = rates(state, model, eps)?;
    let s2 = stage(
        state,
        &(&k0 + &k1 * (0.5 * dt)),
        &(e0 + &e1 * (0.5 * dt)),
        &rho,
    );
    let (k2, e2) = rates(&s2, model, eps)?;
    let s3 = stage(
        state,
        &(&k0 + &k2 * (0.5 * dt)),
        &(e0 + &e2 * (0.5 * dt)),
        &rho,
    );
    let (k3, e3) = rates(&s3, model, eps)?;
    let s4 = stage(state, &(&k0 + &k3 * dt), &(e0 + &e3 * dt), &rho);
    let (k4, e4) = rates(&s4, model, eps)?;

    let h = dt / 6.0;
    let k = &k0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * h;
    let e = e0 + (e1 + e2 * 2.0 + e3 * 2.0 + e4) * h;
    let next = stage(state, &k, &e, &rho);
    check_temperatures(&next, model)?;
    Ok(next)
}

/// One classical RK4 step of size `cfg.dt` on `(rho u, E)`.
pub fn rk4_step(
    state: &MomentState,
    cfg: &IntegratorConfig,
    model: &FrequencyModel,
) -> Result<StepReport> {
    cfg.validate()?;
    Ok(StepReport {
        state: rk4_advance(state, cfg.dt, cfg.eps, model)?,
        picard_iterations: 0,
        halvings: 0,
    })
}

fn step_with(
    state: &MomentState,
    dt: f64,
    cfg: &IntegratorConfig,
    model: &FrequencyModel,
) -> Result<StepReport> {
    match cfg.method {
        Method::BackwardEuler => backward_euler_halving(state, dt, cfg, model, 0),
        Method::Rk4 => Ok(StepReport {
            state: rk4_advance(state, dt, cfg.eps, model)?,
            picard_iterations: 0,
            halvings: 0,
        }),
    }
}

/// Outcome of the per-step checks.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub total_momentum_drift: f64,
    pub total_energy_drift: f64,
    /// J
    pub min_temperature: f64,
    pub temperature_floor_ok: bool,
    pub velocity_bounds_ok: bool,
    pub realizable: bool,
    pub picard_iterations: usize,
}

impl MonitorReport {
    /// Conservation to `drift_tol` plus every boolean check.
    pub fn passes(&self, drift_tol: f64) -> bool {
        self.total_momentum_drift <= drift_tol
            && self.total_energy_drift <= drift_tol
            && self.temperature_floor_ok
            && self.velocity_bounds_ok
            && self.realizable
    }
}

/// Reference quantities from the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Monitor {
    momentum0: DVector<f64>,
    momentum_scale: f64,
    energy0: f64,
    floor: f64,
    floor_tol: f64,
    lower: DVector<f64>,
    upper: DVector<f64>,
    velocity_tol: f64,
}

impl Monitor {
    pub fn new(initial: &MomentState) -> Self {
        let comp = initial.composition();
        let rho = comp.mass_densities();
        let u = initial.velocities();
        let energy0 = initial.total_energy();

        let mut momentum_scale: f64 = (0..initial.len()).map(|i| rho[i] * u.row(i).norm()).sum();
        if momentum_scale == 0.0 {
            momentum_scale = (2.0 * rho.sum() * energy0.abs()).sqrt();
        }
        let momentum_scale = momentum_scale.max(ABSOLUTE_FLOOR);

        let temps = temperatures_of(initial);
        let floor = temps.min();
        let t_scale = if floor > 0.0 {
            floor
        } else {
            temps.max().abs()
        };

        let dim = initial.dimension();
        let lower = DVector::from_fn(dim, |k, _| u.column(k).min());
        let upper = DVector::from_fn(dim, |k, _| u.column(k).max());
        let mut u_scale = max_abs(u.iter().copied());
        if u_scale == 0.0 {
            let m_min = comp.masses().min();
            u_scale = (temps.max().abs() / m_min).sqrt();
        }

        Self {
            momentum0: initial.total_momentum(),
            momentum_scale,
            energy0,
            floor,
            floor_tol: MONITOR_TOLERANCE * t_scale,
            lower,
            upper,
            velocity_tol: MONITOR_TOLERANCE * u_scale,
        }
    }

    pub fn check(&self, state: &MomentState, picard_iterations: usize) -> MonitorReport {
        let momentum_drift =
            (state.total_momentum() - &self.momentum0).norm() / self.momentum_scale;
        let energy_drift =
            (state.total_energy() - self.energy0).abs() / self.energy0.abs().max(ABSOLUTE_FLOOR);
        let min_temperature = temperatures_of(state).min();
        let u = state.velocities();
        let velocity_bounds_ok = (0..u.ncols()).all(|k| {
            u.column(k).iter().all(|&x| {
                x >= self.lower[k] - self.velocity_tol && x <= self.upper[k] + self.velocity_tol
            })
        });
        MonitorReport {
            total_momentum_drift: momentum_drift,
            total_energy_drift: energy_drift,
            min_temperature,
            temperature_floor_ok: min_temperature >= self.floor - self.floor_tol,
            velocity_bounds_ok,
            realizable: min_temperature >= -self.floor_tol,
            picard_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MomentState>,
    pub monitors: Vec<MonitorReport>,
}

impl Trajectory {
    pub fn final_state(&self) -> &MomentState {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }
}

/// Number of steps needed to reach `t_final`; the last one may be partial.
fn step_count(dt: f64, t_final: f64) -> usize {
    let ratio = t_final / dt;
    (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0) as usize
}

/// Integrates from 0 to `cfg.t_final`, recording every `output_stride`-th step
/// and always the final one.
pub fn simulate(
    initial: &MomentState,
    cfg: &IntegratorConfig,
    model: &FrequencyModel,
) -> Result<Trajectory> {
    cfg.validate()?;
    let monitor = Monitor::new(initial);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![initial.clone()],
        monitors: vec![monitor.check(initial, 0)],
    };
    let steps = step_count(cfg.dt, cfg.t_final);
    let mut state = initial.clone();
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = if k == steps {
            cfg.t_final
        } else {
            k as f64 * cfg.dt
        };
        let report = step_with(&state, t_next - t, cfg, model).map_err(|e| Error::StepFailed {
            time: t,
            source: Box::new(e),
        })?;
        state = report.state;
        t = t_next;
        if k % cfg.output_stride == 0 || k == steps {
            traj.times.push(t);
            traj.monitors
                .push(monitor.check(&state, report.picard_iterations));
            traj.states.push(state.clone());
        }
    }
    Ok(traj)
}

/// Nonzero eigenvalues of `Z` and `Zhat` at `state`, relative cutoff `1e-8`.
fn relaxation_rates(state: &MomentState, model: &FrequencyModel, eps: f64) -> Result<Vec<f64>> {
    let mats = assemble(state, model)?;
    let ops = scaled_operators(state, &mats, eps)?;
    let mut eig = symmetric_eigenvalues(&ops.z)?;
    eig.extend(symmetric_eigenvalues(&ops.z_hat)?);
    let top = eig.iter().fold(0.0_f64, |m, &x| m.max(x));
    Ok(eig.into_iter().filter(|&x| x > 1e-8 * top).collect())
}

/// Step size and horizon from the spectra of `Z` and `Zhat`:
/// `dt = eps min(0.05 / r_slow, 1 / r_fast)` and `t_final = 40 eps / r_slow`.
/// `r_slow` is the smallest nonzero eigenvalue at `state`. Hard-sphere rates
/// grow as kinetic energy turns into heat, so `r_fast` is the largest one at
/// either `state` or its equilibrium. Explicit RK4 stays stable up to about
/// `2.8 / r_fast`, which leaves room for temperatures overshooting `T_inf`.
pub fn suggest_step(state: &MomentState, model: &FrequencyModel, eps: f64) -> Result<(f64, f64)> {
    check_knudsen(eps)?;
    let now = relaxation_rates(state, model, eps)?;
    if now.is_empty() {
        // single species: nothing relaxes, use the self-collision rate as a clock
        let r = assemble(state, model)?.lambda.max();
        return Ok((eps * 0.05 / r, 40.0 * eps / r));
    }
    let slow = now.iter().copied().fold(f64::INFINITY, f64::min);
    let mut fast = now.iter().copied().fold(0.0, f64::max);
    if let FrequencyModel::HardSphere = model {
        let eq = steady_state(state);
        let n = state.len();
        let relaxed = MomentState::from_temperatures(
            state.composition().clone(),
            DMatrix::from_fn(n, state.dimension(), |_, k| eq.u_inf[k]),
            &vec![eq.t_inf; n],
        )?;
        fast = relaxation_rates(&relaxed, model, eps)?
            .into_iter()
            .fold(fast, f64::max);
    }
    let dt = eps * (0.05 / slow).min(1.0 / fast);
    Ok((dt, 40.0 * eps / slow))
}
