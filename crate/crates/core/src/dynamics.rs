//! Right-hand sides of the moment system.
//!
//! Three equivalent formulations are provided:
//!
//! * the per-species sums ([`momentum_rhs`], [`energy_rhs`]),
//! * the matrix form `P dU/dt = -(D - A) U / eps`,
//!   `dE/dt = -(F - B) Q^{-1} E / eps + (G - C) M 1 / (2 eps)` ([`vectorized_rhs`]),
//! * the symmetric scaled form in `W = P^{1/2} U`, `xi = Q^{-1/2} E` ([`scaled_operators`]).
//!
//! [`temperature_rhs`] gives `dT_i/dt` directly and is used to cross-check the
//! chain rule through the energy definition.

use nalgebra::{DMatrix, DVector};

use crate::collision::{assemble, CollisionMatrices, FrequencyModel};
use crate::error::{Error, Result};
use crate::species::{temperatures_of, MomentState};

/// Time derivatives of the conserved variables.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsEvaluation {
    /// `d(rho_i u_i)/dt`, N x d.
    pub momentum_rate: DMatrix<f64>,
    /// `dE_i/dt`.
    pub energy_rate: DVector<f64>,
    pub knudsen: f64,
}

impl RhsEvaluation {
    /// `du_i/dt = (d(rho_i u_i)/dt) / rho_i`.
    pub fn velocity_rate(&self, state: &MomentState) -> DMatrix<f64> {
        let rho = state.composition().mass_densities();
        let mut r = self.momentum_rate.clone();
        for (i, mut row) in r.row_iter_mut().enumerate() {
            row /= rho[i];
        }
        r
    }
}

pub(crate) fn check_knudsen(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidKnudsen(eps))
    }
}

/// Row `i` is `sum_j A_ij (u_j - u_i) / eps`.
pub fn momentum_rhs(
    state: &MomentState,
    mats: &CollisionMatrices,
    eps: f64,
) -> Result<DMatrix<f64>> {
    check_knudsen(eps)?;
    let u = state.velocities();
    let (n, dim) = u.shape();
    let mut rate = DMatrix::zeros(n, dim);
    for i in 0..n {
        for j in 0..n {
            let a = mats.a[(i, j)];
            for k in 0..dim {
                rate[(i, k)] += a * (u[(j, k)] - u[(i, k)]);
            }
        }
    }
    Ok(rate / eps)
}

/// Entry `i` is
/// `sum_j B_ij (E_j/n_j - E_i/n_i) / eps + sum_j B_ij S_ij (m_i - m_j) / (2 eps)`.
pub fn energy_rhs(state: &MomentState, mats: &CollisionMatrices, eps: f64) -> Result<DVector<f64>> {
    check_knudsen(eps)?;
    let comp = state.composition();
    let e = state.energies();
    let nd = comp.number_densities();
    let m = comp.masses();
    let n = state.len();
    let rate = DVector::from_fn(n, |i, _| {
        let mut exchange = 0.0;
        let mut friction = 0.0;
        for j in 0..n {
            exchange += mats.b[(i, j)] * (e[j] / nd[j] - e[i] / nd[i]);
            friction += mats.b[(i, j)] * mats.s[(i, j)] * (m[i] - m[j]);
        }
        exchange / eps + friction / (2.0 * eps)
    });
    Ok(rate)
}

/// Assembles the coupling matrices at `state` and evaluates both right-hand sides.
pub fn evaluate(state: &MomentState, model: &FrequencyModel, eps: f64) -> Result<RhsEvaluation> {
    check_knudsen(eps)?;
    let mats = assemble(state, model)?;
    Ok(RhsEvaluation {
        momentum_rate: momentum_rhs(state, &mats, eps)?,
        energy_rate: energy_rhs(state, &mats, eps)?,
        knudsen: eps,
    })
}

/// Matrix form of the same system.
pub fn vectorized_rhs(
    state: &MomentState,
    mats: &CollisionMatrices,
    eps: f64,
) -> Result<RhsEvaluation> {
    check_knudsen(eps)?;
    let comp = state.composition();
    let momentum_rate = -(mats.d_minus_a() * state.velocities()) / eps;
    let scaled_e = state.energies().component_div(comp.number_densities());
    let energy_rate =
        -(mats.f_minus_b() * scaled_e) / eps + (mats.g_minus_c() * comp.masses()) / (2.0 * eps);
    Ok(RhsEvaluation {
        momentum_rate,
        energy_rate,
        knudsen: eps,
    })
}

/// `dT_i/dt = sum_j lambda_ij beta_ji (T_j - T_i) / eps
///          + sum_j lambda_ij m_i alpha_ji (alpha_ji + beta_ij) |u_i - u_j|^2 / (eps d)`.
pub fn temperature_rhs(
    state: &MomentState,
    mats: &CollisionMatrices,
    eps: f64,
) -> Result<DVector<f64>> {
    check_knudsen(eps)?;
    let temps = temperatures_of(state);
    let t = temps.values();
    let u = state.velocities();
    let m = state.composition().masses();
    let dim = state.dimension() as f64;
    let n = state.len();
    let (lam, alpha, beta) = (&mats.lambda, &mats.alpha, &mats.beta);
    Ok(DVector::from_fn(n, |i, _| {
        let mut relax = 0.0;
        let mut heat = 0.0;
        for j in 0..n {
            relax += lam[(i, j)] * beta[(j, i)] * (t[j] - t[i]);
            let du2 = (u.row(i) - u.row(j)).norm_squared();
            heat += lam[(i, j)] * m[i] * alpha[(j, i)] * (alpha[(j, i)] + beta[(i, j)]) * du2;
        }
        relax / eps + heat / (eps * dim)
    }))
}

/// `dT_i/dt` from the conserved-variable rates through `T = 2E/(d n) - m|u|^2/d`.
pub fn temperature_rate_from_moments(state: &MomentState, rhs: &RhsEvaluation) -> DVector<f64> {
    let comp = state.composition();
    let dim = state.dimension() as f64;
    let du = rhs.velocity_rate(state);
    let u = state.velocities();
    DVector::from_fn(state.len(), |i, _| {
        let m = comp.species()[i].mass;
        let n = comp.number_densities()[i];
        2.0 * rhs.energy_rate[i] / (dim * n) - 2.0 * m * u.row(i).dot(&du.row(i)) / dim
    })
}

/// Operators of the scaled system `dW/dt = -Z W / eps`, `dxi/dt = -Zhat xi / eps + source`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledOperators {
    /// `P^{-1/2} (D - A) P^{-1/2}`
    pub z: DMatrix<f64>,
    /// `Q^{-1/2} (F - B) Q^{-1/2}`
    pub z_hat: DMatrix<f64>,
    /// `Q^{-1/2} (G - C) M 1 / (2 eps)`
    pub source: DVector<f64>,
    pub knudsen: f64,
}

impl ScaledOperators {
    pub fn velocity_rate(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        -(&self.z * w) / self.knudsen
    }

    pub fn energy_rate(&self, xi: &DVector<f64>) -> DVector<f64> {
        -(&self.z_hat * xi) / self.knudsen + &self.source
    }
}

/// `W = P^{1/2} U` and `xi = Q^{-1/2} E`.
pub fn scaled_variables(state: &MomentState) -> (DMatrix<f64>, DVector<f64>) {
    let comp = state.composition();
    let rho = comp.mass_densities();
    let mut w = state.velocities().clone();
    for (i, mut row) in w.row_iter_mut().enumerate() {
        row *= rho[i].sqrt();
    }
    let xi = state
        .energies()
        .component_div(&comp.number_densities().map(f64::sqrt));
    (w, xi)
}

/// `y -> D^{-1/2} y D^{-1/2}` for a diagonal given by `w`.
pub(crate) fn symmetric_scale(m: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let root = w.map(f64::sqrt);
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / (root[i] * root[j]))
}

pub fn scaled_operators(
    state: &MomentState,
    mats: &CollisionMatrices,
    eps: f64,
) -> Result<ScaledOperators> {
    check_knudsen(eps)?;
    let comp = state.composition();
    let nd = comp.number_densities();
    let z = symmetric_scale(&mats.d_minus_a(), &comp.mass_densities());
    let z_hat = symmetric_scale(&mats.f_minus_b(), nd);
    let gm = mats.g_minus_c() * comp.masses();
    let source = DVector::from_fn(state.len(), |i, _| gm[i] / (2.0 * eps * nd[i].sqrt()));
    Ok(ScaledOperators {
        z,
        z_hat,
        source,
        knudsen: eps,
    })
}
