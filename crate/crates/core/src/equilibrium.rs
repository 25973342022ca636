//! Steady state, eigenvalue bounds for `Z` and `Zhat`, and exponential decay envelopes.
//!
//! Trajectory-uniform constants come from a temperature floor and ceiling:
//! every `T_i(t)` stays above `T_min = min_k T_k(0)`, and since each
//! `E_j >= d n_j T_min / 2` the temperature of species `i` can never exceed
//!
//! ```text
//! T_ceil_i = 2 / (d n_i) * (E_tot - d T_min / 2 * sum_{j != i} n_j).
//! ```
//!
//! Hard-sphere `A` and `B` grow with temperature, so evaluating them at the
//! floor gives lower bounds on the decay rates, and at the ceilings gives
//! upper bounds on `B_max`.

use nalgebra::{DMatrix, DVector};

use crate::collision::{pair_matrices, CollisionMatrices, FrequencyModel};
use crate::dynamics::{check_knudsen, scaled_variables};
use crate::error::{Error, Result};
use crate::species::{temperatures_of, MomentState};

/// Relative gap below which the energy envelope uses its confluent form.
pub const CONFLUENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumData {
    /// Common velocity, m/s.
    pub u_inf: DVector<f64>,
    /// Common temperature, J.
    pub t_inf: f64,
    /// Species energies at equilibrium, J/m^3.
    pub e_inf: DVector<f64>,
}

/// `u_inf = sum rho_i u_i / sum rho_i`,
/// `T_inf = sum n_i T_i / sum n_i + sum rho_i (|u_i|^2 - |u_inf|^2) / (d sum n_i)`.
pub fn steady_state(state: &MomentState) -> EquilibriumData {
    let comp = state.composition();
    let rho = comp.mass_densities();
    let nd = comp.number_densities();
    let dim = state.dimension() as f64;
    let u = state.velocities();
    let rho_tot = rho.sum();
    let n_tot = nd.sum();

    let u_inf = state.total_momentum() / rho_tot;
    let u_inf2 = u_inf.norm_squared();
    let temps = temperatures_of(state);
    let mut t_inf = nd.dot(temps.values()) / n_tot;
    let mut kinetic = 0.0;
    for i in 0..state.len() {
        kinetic += rho[i] * (u.row(i).norm_squared() - u_inf2);
    }
    t_inf += kinetic / (dim * n_tot);

    let e_inf = DVector::from_fn(state.len(), |i, _| {
        0.5 * u_inf2 * rho[i] + 0.5 * dim * t_inf * nd[i]
    });
    EquilibriumData {
        u_inf,
        t_inf,
        e_inf,
    }
}

/// Distances of a state from an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviations {
    /// `max_i |u_i - u_inf|`
    pub velocity: f64,
    /// `|E - E_inf|`
    pub energy: f64,
    /// `max_i |T_i - T_inf|`
    pub temperature: f64,
}

pub fn deviations(state: &MomentState, eq: &EquilibriumData) -> Deviations {
    let u = state.velocities();
    let temps = temperatures_of(state);
    let mut velocity: f64 = 0.0;
    let mut temperature: f64 = 0.0;
    for i in 0..state.len() {
        let du = u.row(i).transpose() - &eq.u_inf;
        velocity = velocity.max(du.norm());
        temperature = temperature.max((temps.values()[i] - eq.t_inf).abs());
    }
    Deviations {
        velocity,
        energy: (state.energies() - &eq.e_inf).norm(),
        temperature,
    }
}

/// Rayleigh-quotient bracket on the nonzero spectra of `Z` and `Zhat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub z_min: f64,
    pub z_max: f64,
    pub zhat_min: f64,
    pub zhat_max: f64,
    /// Single species: `Z` and `Zhat` vanish and the bounds say nothing.
    pub vacuous: bool,
}

/// `z_min = N A_min / max rho`, `z_max = N A_max / min rho`, and the same for
/// `Zhat` with `B` and `n`.
pub fn eigen_bounds(
    mats: &CollisionMatrices,
    mass_densities: &DVector<f64>,
    number_densities: &DVector<f64>,
) -> SpectralBounds {
    bounds_from(
        (&mats.a, &mats.a),
        (&mats.b, &mats.b),
        mass_densities,
        number_densities,
    )
}

fn bounds_from(
    (a_lo, a_hi): (&DMatrix<f64>, &DMatrix<f64>),
    (b_lo, b_hi): (&DMatrix<f64>, &DMatrix<f64>),
    rho: &DVector<f64>,
    nd: &DVector<f64>,
) -> SpectralBounds {
    let n = rho.len() as f64;
    SpectralBounds {
        z_min: n * a_lo.min() / rho.max(),
        z_max: n * a_hi.max() / rho.min(),
        zhat_min: n * b_lo.min() / nd.max(),
        zhat_max: n * b_hi.max() / nd.min(),
        vacuous: rho.len() < 2,
    }
}

/// Everything the decay envelopes need.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayConstants {
    pub bounds: SpectralBounds,
    /// `|W0 - W_inf|_F / sqrt(min rho)`, m/s.
    pub c_u: f64,
    /// Euclidean norm of the componentwise extreme initial speeds, m/s.
    pub u_max: f64,
    /// `sqrt(2 E_tot / min rho)`, a looser speed bound.
    pub u_max_energy: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub b_max: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub m_max: f64,
    pub dimension: usize,
}

impl DecayConstants {
    /// Constants valid along the whole trajectory started at `initial`.
    pub fn conservative(initial: &MomentState, model: &FrequencyModel) -> Result<Self> {
        let (floor, ceiling) = temperature_range(initial)?;
        let comp = initial.composition();
        let n = initial.len();
        let rho = comp.mass_densities();
        let nd = comp.number_densities();
        let lam_lo = model.frequencies(
            comp.species(),
            nd.as_slice(),
            &vec![floor; n],
            initial.dimension(),
        )?;
        let lam_hi =
            model.frequencies(comp.species(), nd.as_slice(), &ceiling, initial.dimension())?;
        let (a_lo, b_lo) = pair_matrices(&lam_lo, &rho, nd);
        let (a_hi, b_hi) = pair_matrices(&lam_hi, &rho, nd);
        let bounds = bounds_from((&a_lo, &a_hi), (&b_lo, &b_hi), &rho, nd);
        Ok(Self::from_parts(initial, bounds, b_hi.max()))
    }

    /// Constants from the coupling matrices of `state` itself.
    pub fn instantaneous(state: &MomentState, model: &FrequencyModel) -> Result<Self> {
        let mats = crate::collision::assemble(state, model)?;
        let comp = state.composition();
        let bounds = eigen_bounds(&mats, &comp.mass_densities(), comp.number_densities());
        Ok(Self::from_parts(state, bounds, mats.b.max()))
    }

    fn from_parts(initial: &MomentState, bounds: SpectralBounds, b_max: f64) -> Self {
        let comp = initial.composition();
        let n = initial.len() as f64;
        let rho = comp.mass_densities();
        let nd = comp.number_densities();
        let eq = steady_state(initial);
        let u = initial.velocities();

        let mut w_dev2 = 0.0;
        for i in 0..initial.len() {
            w_dev2 += rho[i] * (u.row(i).transpose() - &eq.u_inf).norm_squared();
        }
        let c_u = w_dev2.sqrt() / rho.min().sqrt();

        let extremes = DVector::from_fn(initial.dimension(), |k, _| {
            u.column(k).iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
        });
        let u_max = extremes.norm();
        let u_max_energy = (2.0 * initial.total_energy() / rho.min()).sqrt();

        let (n_min, n_max) = (nd.min(), nd.max());
        let m_max = comp.masses().max();
        let c0 = 0.5 * 4.0 * n * (n - 1.0) * c_u * u_max * b_max * m_max / n_min.sqrt();

        let (_, xi) = scaled_variables(initial);
        let xi_inf = eq.e_inf.component_div(&nd.map(f64::sqrt));
        let c1 = n_max.sqrt() * (xi - xi_inf).norm();
        let c2 = c0 * n_max.sqrt();

        Self {
            bounds,
            c_u,
            u_max,
            u_max_energy,
            c0,
            c1,
            c2,
            b_max,
            n_min,
            n_max,
            m_max,
            dimension: initial.dimension(),
        }
    }
}

/// Floor `min_k T_k` and per-species ceilings, both in J.
pub fn temperature_range(initial: &MomentState) -> Result<(f64, Vec<f64>)> {
    let temps = temperatures_of(initial);
    let floor = temps.min();
    if !(floor.is_finite() && floor > 0.0) {
        let i = temps.values().imin();
        return Err(Error::NonPositiveTemperature {
            species: initial.composition().species()[i].label.clone(),
            value: floor,
        });
    }
    let nd = initial.composition().number_densities();
    let dim = initial.dimension() as f64;
    let e_tot = initial.total_energy();
    let n_tot = nd.sum();
    let ceiling = (0..initial.len())
        .map(|i| {
            let others = n_tot - nd[i];
            let t = 2.0 / (dim * nd[i]) * (e_tot - 0.5 * dim * floor * others);
            t.max(temps.values()[i])
        })
        .collect();
    Ok((floor, ceiling))
}

/// Trajectory-uniform lower bounds `(z_min, zhat_min)` on the decay rates.
pub fn conservative_decay_rate(
    initial: &MomentState,
    model: &FrequencyModel,
) -> Result<(f64, f64)> {
    let c = DecayConstants::conservative(initial, model)?;
    Ok((c.bounds.z_min, c.bounds.zhat_min))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelopes {
    pub velocity: f64,
    pub energy: f64,
    pub temperature: f64,
}

/// `(exp(-z tau) - exp(-zhat tau)) / (zhat - z)`, symmetric in the two rates.
fn difference_quotient(z: f64, zhat: f64, tau: f64) -> f64 {
    let (lo, hi) = if z <= zhat { (z, zhat) } else { (zhat, z) };
    let gap = hi - lo;
    if gap < CONFLUENT_TOLERANCE * hi {
        return tau * (-lo * tau).exp();
    }
    (-lo * tau).exp() * -(-gap * tau).exp_m1() / gap
}

pub fn decay_envelopes(constants: &DecayConstants, eps: f64, t: f64) -> Result<Envelopes> {
    check_knudsen(eps)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "envelope time must be nonnegative, got {t}"
        )));
    }
    let tau = t / eps;
    let SpectralBounds {
        z_min, zhat_min, ..
    } = constants.bounds;
    let dim = constants.dimension as f64;
    let vel_decay = (-z_min * tau).exp();
    let velocity = constants.c_u * vel_decay;
    let energy = constants.c1 * (-zhat_min * tau).exp()
        + constants.c2 * difference_quotient(z_min, zhat_min, tau);
    let temperature = 2.0 / (dim * constants.n_min) * energy
        + constants.m_max / dim * 2.0 * constants.u_max * constants.c_u * vel_decay;
    Ok(Envelopes {
        velocity,
        energy,
        temperature,
    })
}
