//! The three noble-gas relaxation scenarios.

use multibgk::{FrequencyModel, Method, SpeciesParams};
use nalgebra::DMatrix;

use crate::config::ScenarioConfig;

/// (label, mass kg, diameter m)
pub const HELIUM: (&str, f64, f64) = ("He", 6.6464731e-27, 2.193e-10);
pub const ARGON: (&str, f64, f64) = ("Ar", 66.335209e-27, 3.659e-10);
pub const KRYPTON: (&str, f64, f64) = ("Kr", 139.14984e-27, 4.199e-10);
pub const XENON: (&str, f64, f64) = ("Xe", 218.01714e-27, 4.939e-10);

fn gas((label, mass, diameter): (&str, f64, f64)) -> SpeciesParams {
    SpeciesParams::new(label, mass, diameter).expect("tabulated gas data is valid")
}

fn scenario(
    name: &str,
    gases: [(&str, f64, f64); 3],
    number_densities: [f64; 3],
    velocities: DMatrix<f64>,
    temperatures_kelvin: [f64; 3],
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        species: gases.into_iter().map(gas).collect(),
        number_densities: number_densities.to_vec(),
        velocities,
        temperatures_kelvin: temperatures_kelvin.to_vec(),
        eps: 1.0,
        method: Method::BackwardEuler,
        dt: None,
        t_final: None,
        output_stride: 1,
        model: FrequencyModel::HardSphere,
        output: None,
    }
}

/// Preset 1, 2 or 3.
pub fn preset(id: u8) -> Option<ScenarioConfig> {
    match id {
        1 => Some(scenario(
            "example1",
            [ARGON, KRYPTON, XENON],
            [1e28, 1e28, 1e28],
            DMatrix::zeros(3, 3),
            [1000.0, 2000.0, 3000.0],
        )),
        2 => {
            let mut u = DMatrix::zeros(3, 3);
            u[(0, 0)] = 100.0;
            Some(scenario(
                "example2",
                [ARGON, KRYPTON, XENON],
                [3e28, 2e28, 1e28],
                u,
                [1000.0, 1000.0, 1000.0],
            ))
        }
        3 => {
            let mut u = DMatrix::zeros(3, 3);
            u[(0, 0)] = 864.8;
            Some(scenario(
                "example3",
                [HELIUM, KRYPTON, XENON],
                [0.01e28, 1e28, 1e28],
                u,
                [3000.0, 300.0, 300.0],
            ))
        }
        _ => None,
    }
}

pub fn presets() -> Vec<ScenarioConfig> {
    (1..=3).filter_map(preset).collect()
}
