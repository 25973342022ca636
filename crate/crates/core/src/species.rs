//! Species data, the moment state and the map between energies and temperatures.
//!
//! Temperatures are carried in energy units (Joules) everywhere inside the
//! library, so that `T / m` is a squared velocity. Kelvin only appears at the
//! configuration and output boundary via [`kelvin_to_energy`] and
//! [`energy_to_kelvin`].

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};

/// Boltzmann constant in J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Default spatial dimension of velocity space.
pub const DEFAULT_DIMENSION: usize = 3;

pub fn kelvin_to_energy(kelvin: f64) -> f64 {
    kelvin * BOLTZMANN
}

pub fn energy_to_kelvin(joule: f64) -> f64 {
    joule / BOLTZMANN
}

/// Physical constants of one species.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesParams {
    pub label: String,
    /// Particle mass in kg.
    pub mass: f64,
    /// Hard-sphere reference diameter in m.
    pub diameter: f64,
}

impl SpeciesParams {
    pub fn new(label: impl Into<String>, mass: f64, diameter: f64) -> Result<Self> {
        let label = label.into();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "species `{label}`: mass must be positive and finite (got {mass})"
            )));
        }
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "species `{label}`: diameter must be positive and finite (got {diameter})"
            )));
        }
        Ok(Self {
            label,
            mass,
            diameter,
        })
    }
}

/// Ordered species list with their (time-invariant) number densities.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComposition {
    species: Vec<SpeciesParams>,
    number_densities: DVector<f64>,
}

impl MixtureComposition {
    pub fn new(species: Vec<SpeciesParams>, number_densities: Vec<f64>) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::InvalidParameter(
                "a mixture needs at least one species".into(),
            ));
        }
        if species.len() != number_densities.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} species but {} number densities",
                species.len(),
                number_densities.len()
            )));
        }
        for (sp, &n) in species.iter().zip(&number_densities) {
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "species `{}`: number density must be positive and finite (got {n})",
                    sp.label
                )));
            }
        }
        Ok(Self {
            species,
            number_densities: DVector::from_vec(number_densities),
        })
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn species(&self) -> &[SpeciesParams] {
        &self.species
    }

    pub fn number_densities(&self) -> &DVector<f64> {
        &self.number_densities
    }

    pub fn masses(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.species.iter().map(|s| s.mass))
    }

    /// Mass densities `rho_i = m_i n_i`.
    pub fn mass_densities(&self) -> DVector<f64> {
        self.number_densities.component_mul(&self.masses())
    }

    pub fn total_number_density(&self) -> f64 {
        self.number_densities.sum()
    }

    pub fn total_mass_density(&self) -> f64 {
        self.mass_densities().sum()
    }
}

/// Dynamical state: bulk velocities (N x d, m/s) and energy densities (N, J/m^3)
/// on top of a fixed composition.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    composition: Arc<MixtureComposition>,
    velocities: DMatrix<f64>,
    energies: DVector<f64>,
}

impl MomentState {
    pub fn new(
        composition: Arc<MixtureComposition>,
        velocities: DMatrix<f64>,
        energies: DVector<f64>,
    ) -> Result<Self> {
        let n = composition.len();
        if velocities.nrows() != n || energies.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} species but velocities are {}x{} and {} energies were given",
                velocities.nrows(),
                velocities.ncols(),
                energies.len()
            )));
        }
        if velocities.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "velocity dimension must be at least 1".into(),
            ));
        }
        if velocities
            .iter()
            .chain(energies.iter())
            .any(|x| !x.is_finite())
        {
            return Err(Error::InvalidParameter(
                "velocities and energies must be finite".into(),
            ));
        }
        Ok(Self {
            composition,
            velocities,
            energies,
        })
    }

    /// Builds a state from velocities and temperatures (J) through the energy definition.
    pub fn from_temperatures(
        composition: Arc<MixtureComposition>,
        velocities: DMatrix<f64>,
        temperatures: &[f64],
    ) -> Result<Self> {
        let n = composition.len();
        if velocities.nrows() != n || temperatures.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} species but velocities have {} rows and {} temperatures were given",
                velocities.nrows(),
                temperatures.len()
            )));
        }
        let mut energies = DVector::zeros(n);
        for (i, sp) in composition.species().iter().enumerate() {
            let u: Vec<f64> = velocities.row(i).iter().copied().collect();
            let t = temperatures[i];
            if t < 0.0 {
                return Err(Error::NegativeTemperature {
                    species: sp.label.clone(),
                    value: t,
                });
            }
            energies[i] = energy_from(&u, t, composition.number_densities()[i], sp.mass)?;
        }
        Self::new(composition, velocities, energies)
    }

    /// Same composition, new moments. Shapes are trusted.
    pub(crate) fn with_moments(&self, velocities: DMatrix<f64>, energies: DVector<f64>) -> Self {
        debug_assert_eq!(velocities.shape(), self.velocities.shape());
        debug_assert_eq!(energies.len(), self.energies.len());
        Self {
            composition: Arc::clone(&self.composition),
            velocities,
            energies,
        }
    }

    pub fn composition(&self) -> &Arc<MixtureComposition> {
        &self.composition
    }

    pub fn len(&self) -> usize {
        self.composition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.composition.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.velocities.ncols()
    }

    pub fn velocities(&self) -> &DMatrix<f64> {
        &self.velocities
    }

    pub fn velocity(&self, i: usize) -> RowDVector<f64> {
        self.velocities.row(i).into_owned()
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    /// Species momentum densities `rho_i u_i` as an N x d matrix.
    pub fn momenta(&self) -> DMatrix<f64> {
        let rho = self.composition.mass_densities();
        let mut k = self.velocities.clone();
        for (i, mut row) in k.row_iter_mut().enumerate() {
            row *= rho[i];
        }
        k
    }

    /// Total momentum `sum_i rho_i u_i` (length d).
    pub fn total_momentum(&self) -> DVector<f64> {
        self.momenta().row_sum().transpose()
    }

    pub fn total_energy(&self) -> f64 {
        self.energies.sum()
    }
}

/// Temperatures (J) implied by a state.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedTemperatures(pub DVector<f64>);

impl DerivedTemperatures {
    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.min()
    }

    pub fn max(&self) -> f64 {
        self.0.max()
    }
}

/// `T_i = 2 E_i / (d n_i) - m_i |u_i|^2 / d`. No clamping: negative values are
/// returned as computed.
pub fn temperatures_of(state: &MomentState) -> DerivedTemperatures {
    let comp = state.composition();
    let d = state.dimension() as f64;
    let temps = DVector::from_iterator(
        state.len(),
        comp.species().iter().enumerate().map(|(i, sp)| {
            let n = comp.number_densities()[i];
            let u2 = state.velocities().row(i).norm_squared();
            2.0 * state.energies()[i] / (d * n) - sp.mass * u2 / d
        }),
    );
    DerivedTemperatures(temps)
}

/// `E = m n |u|^2 / 2 + d n T / 2`, with `d = u.len()`.
pub fn energy_from(u: &[f64], temperature: f64, number_density: f64, mass: f64) -> Result<f64> {
    if temperature < 0.0 || !temperature.is_finite() {
        return Err(Error::NegativeTemperature {
            species: String::new(),
            value: temperature,
        });
    }
    if u.is_empty() {
        return Err(Error::InvalidParameter(
            "velocity dimension must be at least 1".into(),
        ));
    }
    let d = u.len() as f64;
    let u2: f64 = u.iter().map(|x| x * x).sum();
    Ok(0.5 * mass * number_density * u2 + 0.5 * d * number_density * temperature)
}

/// True iff every derived temperature is at least `floor`.
pub fn is_realizable(state: &MomentState, floor: f64) -> bool {
    temperatures_of(state).values().iter().all(|&t| t >= floor)
}
