//! Scenario files.
//!
//! ```toml
//! name = "argon-krypton"
//! eps = 1.0
//!
//! [integrator]
//! method = "be"          # or "rk4"
//! dt = 5e-15             # optional, chosen from the spectrum when absent
//! t_final = 5e-12        # optional
//! output_stride = 1
//!
//! [model]
//! kind = "hard-sphere"   # or "constant" with `lambda = [[...], ...]` in 1/s
//!
//! [[species]]
//! label = "Ar"
//! mass = 66.335209e-27
//! diameter = 3.659e-10
//! number_density = 1e28
//! velocity = [100.0, 0.0, 0.0]
//! temperature = 1000.0   # K
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use multibgk::{
    kelvin_to_energy, FrequencyModel, Method, MixtureComposition, MomentState, SpeciesParams,
};
use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("species `{label}`: {message}")]
    Species { label: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] multibgk::Error),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    eps: Option<f64>,
    dimension: Option<usize>,
    integrator: Option<RawIntegrator>,
    model: Option<RawModel>,
    output: Option<PathBuf>,
    #[serde(default)]
    species: Vec<RawSpecies>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    method: Option<String>,
    dt: Option<f64>,
    t_final: Option<f64>,
    output_stride: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    lambda: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpecies {
    label: Option<String>,
    mass: Option<f64>,
    diameter: Option<f64>,
    number_density: Option<f64>,
    velocity: Option<Vec<f64>>,
    temperature: Option<f64>,
}

/// A validated scenario. Temperatures are kept in Kelvin here and converted
/// when the initial state is built.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub species: Vec<SpeciesParams>,
    pub number_densities: Vec<f64>,
    /// N x d, m/s
    pub velocities: DMatrix<f64>,
    pub temperatures_kelvin: Vec<f64>,
    pub eps: f64,
    pub method: Method,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub output_stride: usize,
    pub model: FrequencyModel,
    pub output: Option<PathBuf>,
}

pub fn parse_method(s: &str) -> Result<Method, ConfigError> {
    match s.to_ascii_lowercase().as_str() {
        "be" | "backward-euler" | "backward_euler" => Ok(Method::BackwardEuler),
        "rk4" => Ok(Method::Rk4),
        other => Err(ConfigError::Invalid(format!(
            "unknown integrator `{other}` (expected `be` or `rk4`)"
        ))),
    }
}

fn species_err(label: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Species {
        label: label.to_string(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let default_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        Self::from_toml(&text, &default_name)
    }

    pub fn from_toml(text: &str, default_name: &str) -> Result<Self, ConfigError> {
        let raw: RawScenario = toml::from_str(text)?;
        let dim = raw
            .dimension
            .unwrap_or(multibgk::species::DEFAULT_DIMENSION);
        if dim == 0 {
            return Err(ConfigError::Invalid("dimension must be at least 1".into()));
        }
        if raw.species.is_empty() {
            return Err(ConfigError::Invalid(
                "at least one [[species]] entry is required".into(),
            ));
        }

        let n = raw.species.len();
        let mut species = Vec::with_capacity(n);
        let mut densities = Vec::with_capacity(n);
        let mut temps = Vec::with_capacity(n);
        let mut velocities = DMatrix::zeros(n, dim);
        for (i, sp) in raw.species.iter().enumerate() {
            let label = sp.label.clone().unwrap_or_else(|| format!("#{}", i + 1));
            let need = |v: Option<f64>, what: &str| {
                v.ok_or_else(|| species_err(&label, format!("missing {what}")))
            };
            let mass = need(sp.mass, "mass")?;
            let diameter = need(sp.diameter, "diameter")?;
            let nd = need(sp.number_density, "number_density")?;
            let t = need(sp.temperature, "temperature")?;
            let params = SpeciesParams::new(label.clone(), mass, diameter)
                .map_err(|e| species_err(&label, e.to_string()))?;
            if !(nd.is_finite() && nd > 0.0) {
                return Err(species_err(
                    &label,
                    format!("number_density must be positive, got {nd}"),
                ));
            }
            if !(t.is_finite() && t >= 0.0) {
                return Err(species_err(
                    &label,
                    format!("temperature must be nonnegative, got {t} K"),
                ));
            }
            if let Some(u) = &sp.velocity {
                if u.len() != dim {
                    return Err(species_err(
                        &label,
                        format!("velocity has {} components, expected {dim}", u.len()),
                    ));
                }
                if u.iter().any(|x| !x.is_finite()) {
                    return Err(species_err(&label, "velocity must be finite"));
                }
                velocities.row_mut(i).copy_from_slice(u);
            }
            species.push(params);
            densities.push(nd);
            temps.push(t);
        }

        let model = match raw.model {
            None => FrequencyModel::HardSphere,
            Some(m) => match m.kind.as_str() {
                "hard-sphere" | "hard_sphere" => {
                    if m.lambda.is_some() {
                        return Err(ConfigError::Invalid(
                            "`lambda` is only valid with kind = \"constant\"".into(),
                        ));
                    }
                    FrequencyModel::HardSphere
                }
                "constant" => {
                    let rows = m.lambda.ok_or_else(|| {
                        ConfigError::Invalid("constant model needs a `lambda` matrix".into())
                    })?;
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(ConfigError::Invalid(format!(
                            "`lambda` must be {n}x{n} for {n} species"
                        )));
                    }
                    let flat: Vec<f64> = rows.into_iter().flatten().collect();
                    FrequencyModel::constant(DMatrix::from_row_slice(n, n, &flat))?
                }
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "unknown model kind `{other}` (expected `hard-sphere` or `constant`)"
                    )))
                }
            },
        };
        if matches!(model, FrequencyModel::HardSphere) {
            if dim != 3 {
                return Err(ConfigError::Invalid(format!(
                    "hard-sphere frequencies need dimension 3, got {dim}"
                )));
            }
            if let Some(i) = temps.iter().position(|&t| t <= 0.0) {
                return Err(species_err(
                    &species[i].label,
                    "hard-sphere frequencies need a positive temperature",
                ));
            }
        }

        let integ = raw.integrator.unwrap_or_default();
        let method = match integ.method.as_deref() {
            None => Method::BackwardEuler,
            Some(s) => parse_method(s)?,
        };
        let cfg = Self {
            name: raw.name.unwrap_or_else(|| default_name.to_string()),
            species,
            number_densities: densities,
            velocities,
            temperatures_kelvin: temps,
            eps: raw.eps.unwrap_or(1.0),
            method,
            dt: integ.dt,
            t_final: integ.t_final,
            output_stride: integ.output_stride.unwrap_or(1),
            model,
            output: raw.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the scalar settings; species data is checked while parsing.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "dt must be positive, got {dt}"
                )));
            }
        }
        if let Some(t) = self.t_final {
            if !(t.is_finite() && t >= 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "t_final must be nonnegative, got {t}"
                )));
            }
        }
        if self.output_stride == 0 {
            return Err(ConfigError::Invalid(
                "output_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn composition(&self) -> Result<Arc<MixtureComposition>, ConfigError> {
        Ok(Arc::new(MixtureComposition::new(
            self.species.clone(),
            self.number_densities.clone(),
        )?))
    }

    pub fn initial_state(&self) -> Result<MomentState, ConfigError> {
        let temps: Vec<f64> = self
            .temperatures_kelvin
            .iter()
            .map(|&t| kelvin_to_energy(t))
            .collect();
        Ok(MomentState::from_temperatures(
            self.composition()?,
            self.velocities.clone(),
            &temps,
        )?)
    }
}
