//! Collision frequencies and the coupling matrices built from them.
//!
//! For a state with mass densities `rho`, number densities `n` and frequencies
//! `lambda`, the pairwise matrices are
//!
//! ```text
//! A_ij = rho_i rho_j lambda_ij lambda_ji / (rho_i lambda_ij + rho_j lambda_ji)
//! B_ij =   n_i   n_j lambda_ij lambda_ji / (  n_i lambda_ij +   n_j lambda_ji)
//! S_ij = |u_ij|^2,  C_ij = B_ij S_ij
//! ```
//!
//! and `D`, `F`, `G` are the diagonal row sums of `A`, `B`, `C`.
//! Self-collision pairs (`i == j`) are kept in every sum.

use std::f64::consts::PI;
use std::sync::LazyLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::species::{temperatures_of, MomentState, SpeciesParams};

/// `32 pi^2 / (3 (2 pi)^{3/2})`, the hard-sphere frequency prefactor.
pub static HARD_SPHERE_PREFACTOR: LazyLock<f64> =
    LazyLock::new(|| 32.0 * PI * PI / (3.0 * (2.0 * PI).powf(1.5)));

/// How collision frequencies are obtained from a state.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyModel {
    /// Temperature-dependent hard-sphere frequencies (d = 3 only).
    HardSphere,
    /// Fixed N x N frequencies in 1/s, all entries positive.
    ConstantMatrix(DMatrix<f64>),
}

impl FrequencyModel {
    pub fn constant(lambda: DMatrix<f64>) -> Result<Self> {
        validate_constant(&lambda)?;
        Ok(Self::ConstantMatrix(lambda))
    }

    /// Collision frequencies for the given species, densities and temperatures (J).
    pub fn frequencies(
        &self,
        species: &[SpeciesParams],
        number_densities: &[f64],
        temperatures: &[f64],
        dimension: usize,
    ) -> Result<DMatrix<f64>> {
        match self {
            FrequencyModel::HardSphere => {
                if dimension != 3 {
                    return Err(Error::UnsupportedDimension(dimension));
                }
                hard_sphere_lambda(species, number_densities, temperatures)
            }
            FrequencyModel::ConstantMatrix(lambda) => {
                validate_constant(lambda)?;
                if lambda.nrows() != species.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "constant frequency matrix is {}x{} for {} species",
                        lambda.nrows(),
                        lambda.ncols(),
                        species.len()
                    )));
                }
                Ok(lambda.clone())
            }
        }
    }
}

fn validate_constant(lambda: &DMatrix<f64>) -> Result<()> {
    if !lambda.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "frequency matrix must be square, got {}x{}",
            lambda.nrows(),
            lambda.ncols()
        )));
    }
    if lambda.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::InvalidParameter(
            "constant collision frequencies must be positive and finite".into(),
        ));
    }
    Ok(())
}

/// Hard-sphere frequencies
/// `lambda_ij = K m_i m_j / (m_i + m_j)^2 (d_i + d_j)^2 n_j sqrt(T_i/m_i + T_j/m_j)`.
pub fn hard_sphere_lambda(
    species: &[SpeciesParams],
    number_densities: &[f64],
    temperatures: &[f64],
) -> Result<DMatrix<f64>> {
    let n = species.len();
    if number_densities.len() != n || temperatures.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} species, {} densities, {} temperatures",
            number_densities.len(),
            temperatures.len()
        )));
    }
    for (sp, &t) in species.iter().zip(temperatures) {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::NonPositiveTemperature {
                species: sp.label.clone(),
                value: t,
            });
        }
    }
    let k = *HARD_SPHERE_PREFACTOR;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let (si, sj) = (&species[i], &species[j]);
        let msum = si.mass + sj.mass;
        let dsum = si.diameter + sj.diameter;
        k * (si.mass * sj.mass / (msum * msum))
            * dsum
            * dsum
            * number_densities[j]
            * (temperatures[i] / si.mass + temperatures[j] / sj.mass).sqrt()
    }))
}

/// Weights `alpha_ij = rho_i lambda_ij / (rho_i lambda_ij + rho_j lambda_ji)` and the
/// analogous `beta` with number densities.
pub fn alpha_beta(
    lambda: &DMatrix<f64>,
    mass_densities: &DVector<f64>,
    number_densities: &DVector<f64>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = lambda.nrows();
    let weight = |w: &DVector<f64>, i: usize, j: usize| {
        let a = w[i] * lambda[(i, j)];
        let b = w[j] * lambda[(j, i)];
        a / (a + b)
    };
    let alpha = DMatrix::from_fn(n, n, |i, j| weight(mass_densities, i, j));
    let beta = DMatrix::from_fn(n, n, |i, j| weight(number_densities, i, j));
    (alpha, beta)
}

/// Pairwise mixture velocities and temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureValues {
    species: usize,
    dimension: usize,
    velocities: Vec<f64>,
    /// `T_ij` in J.
    pub temperatures: DMatrix<f64>,
}

impl MixtureValues {
    /// `u_ij` as a d-slice.
    pub fn velocity(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.species + j) * self.dimension;
        &self.velocities[start..start + self.dimension]
    }
}

/// `u_ij = alpha_ij u_i + alpha_ji u_j` and
/// `T_ij = beta_ij T_i + beta_ji T_j + m_i alpha_ji beta_ij |u_i - u_j|^2 / d`.
pub fn mixture_values(
    state: &MomentState,
    alpha: &DMatrix<f64>,
    beta: &DMatrix<f64>,
) -> MixtureValues {
    let n = state.len();
    let dim = state.dimension();
    let u = state.velocities();
    let temps = temperatures_of(state);
    let t = temps.values();
    let masses = state.composition().masses();

    let mut velocities = vec![0.0; n * n * dim];
    for i in 0..n {
        for j in 0..n {
            let start = (i * n + j) * dim;
            for k in 0..dim {
                velocities[start + k] = alpha[(i, j)] * u[(i, k)] + alpha[(j, i)] * u[(j, k)];
            }
        }
    }
    let temperatures = DMatrix::from_fn(n, n, |i, j| {
        let du2 = (u.row(i) - u.row(j)).norm_squared();
        beta[(i, j)] * t[i]
            + beta[(j, i)] * t[j]
            + masses[i] * alpha[(j, i)] * beta[(i, j)] * du2 / dim as f64
    });
    MixtureValues {
        species: n,
        dimension: dim,
        velocities,
        temperatures,
    }
}

/// Every coupling matrix for one state. `d`, `f`, `g` hold the diagonals of
/// the diagonal matrices `D`, `F`, `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionMatrices {
    pub lambda: DMatrix<f64>,
    pub alpha: DMatrix<f64>,
    pub beta: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DVector<f64>,
    pub f: DVector<f64>,
    pub g: DVector<f64>,
}

impl CollisionMatrices {
    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `D - A`
    pub fn d_minus_a(&self) -> DMatrix<f64> {
        laplacian(&self.a)
    }

    /// `F - B`
    pub fn f_minus_b(&self) -> DMatrix<f64> {
        laplacian(&self.b)
    }

    /// `G - C`
    pub fn g_minus_c(&self) -> DMatrix<f64> {
        laplacian(&self.c)
    }

    /// Recomputes `S`, `C` and `G` for new velocities, keeping `alpha` and `B` fixed.
    pub(crate) fn refresh_velocity_terms(&mut self, velocities: &DMatrix<f64>) {
        self.s = mixture_speed_squared(&self.alpha, velocities);
        self.c = self.b.component_mul(&self.s);
        self.g = self.c.column_sum();
    }
}

/// `diag(M 1) - M` with the diagonal summed over `j != i`, so the large
/// self-collision entries never enter and cancel in floating point.
fn laplacian(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (0..n).filter(|&k| k != i).map(|k| m[(i, k)]).sum()
        } else {
            -m[(i, j)]
        }
    })
}

fn mixture_speed_squared(alpha: &DMatrix<f64>, u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (u.row(i) * alpha[(i, j)] + u.row(j) * alpha[(j, i)]).norm_squared();
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// Symmetric pair matrix `w_i w_j l_ij l_ji / (w_i l_ij + w_j l_ji)`.
fn harmonic_pair_matrix(lambda: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let n = lambda.nrows();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = w[i] * lambda[(i, j)];
            let y = w[j] * lambda[(j, i)];
            let v = x * y / (x + y);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// `A` and `B` for given frequencies and densities.
pub fn pair_matrices(
    lambda: &DMatrix<f64>,
    mass_densities: &DVector<f64>,
    number_densities: &DVector<f64>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    (
        harmonic_pair_matrix(lambda, mass_densities),
        harmonic_pair_matrix(lambda, number_densities),
    )
}

/// Assembles every coupling matrix at `state`.
pub fn assemble(state: &MomentState, model: &FrequencyModel) -> Result<CollisionMatrices> {
    let comp = state.composition();
    let temps = temperatures_of(state);
    let lambda = model.frequencies(
        comp.species(),
        comp.number_densities().as_slice(),
        temps.values().as_slice(),
        state.dimension(),
    )?;
    let rho = comp.mass_densities();
    let n = comp.number_densities();
    let (alpha, beta) = alpha_beta(&lambda, &rho, n);

    let (a, b) = pair_matrices(&lambda, &rho, n);
    let s = mixture_speed_squared(&alpha, state.velocities());
    let c = b.component_mul(&s);
    let d = a.column_sum();
    let f = b.column_sum();
    let g = c.column_sum();
    Ok(CollisionMatrices {
        lambda,
        alpha,
        beta,
        a,
        b,
        s,
        c,
        d,
        f,
        g,
    })
}

/// Hard-sphere `A` and `B` written directly in terms of masses, diameters and
/// densities, bypassing the frequency matrix:
///
/// ```text
/// A_ij = 16/3 sqrt(pi/2) m_i m_j (d_i + d_j)^2 / (m_i + m_j)^3 rho_i rho_j sqrt(T_i/m_i + T_j/m_j)
/// B_ij =  8/3 sqrt(pi/2)         (d_i + d_j)^2 / (m_i + m_j)^2 rho_i rho_j sqrt(T_i/m_i + T_j/m_j)
/// ```
pub fn closed_form_ab(
    species: &[SpeciesParams],
    number_densities: &[f64],
    temperatures: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = species.len();
    if number_densities.len() != n || temperatures.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} species, {} densities, {} temperatures",
            number_densities.len(),
            temperatures.len()
        )));
    }
    for (sp, &t) in species.iter().zip(temperatures) {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::NonPositiveTemperature {
                species: sp.label.clone(),
                value: t,
            });
        }
    }
    let root = (PI / 2.0).sqrt();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let (si, sj) = (&species[i], &species[j]);
            let rho_i = si.mass * number_densities[i];
            let rho_j = sj.mass * number_densities[j];
            let msum = si.mass + sj.mass;
            let dsum2 = (si.diameter + sj.diameter).powi(2);
            let thermal = (temperatures[i] / si.mass + temperatures[j] / sj.mass).sqrt();
            let aij = 16.0 / 3.0 * root * si.mass * sj.mass * dsum2 / msum.powi(3)
                * rho_i
                * rho_j
                * thermal;
            let bij = 8.0 / 3.0 * root * dsum2 / msum.powi(2) * rho_i * rho_j * thermal;
            a[(i, j)] = aij;
            a[(j, i)] = aij;
            b[(i, j)] = bij;
            b[(j, i)] = bij;
        }
    }
    Ok((a, b))
}
