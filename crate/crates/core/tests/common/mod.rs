#![allow(dead_code)]

use std::sync::Arc;

use multibgk::{kelvin_to_energy, MixtureComposition, MomentState, SpeciesParams};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// (mass, diameter, number density, velocity, temperature in K)
pub type RawSpecies = (f64, f64, f64, [f64; 3], f64);

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|e| 10f64.powf(e))
}

pub fn species() -> impl Strategy<Value = RawSpecies> {
    (
        log_uniform(1e-27, 5e-25),
        1e-10..6e-10,
        log_uniform(1e25, 1e29),
        prop::array::uniform3(-1000.0..1000.0),
        log_uniform(10.0, 1e4),
    )
}

pub fn build(raw: &[RawSpecies]) -> MomentState {
    let n = raw.len();
    let comp = MixtureComposition::new(
        raw.iter()
            .enumerate()
            .map(|(i, r)| SpeciesParams::new(format!("s{i}"), r.0, r.1).unwrap())
            .collect(),
        raw.iter().map(|r| r.2).collect(),
    )
    .unwrap();
    let u = DMatrix::from_fn(n, 3, |i, k| raw[i].3[k]);
    let t: Vec<f64> = raw.iter().map(|r| kelvin_to_energy(r.4)).collect();
    MomentState::from_temperatures(Arc::new(comp), u, &t).unwrap()
}

/// Realizable hard-sphere states with 1 to `max_species` species in d = 3.
pub fn state(max_species: usize) -> impl Strategy<Value = MomentState> {
    prop::collection::vec(species(), 1..=max_species).prop_map(|raw| build(&raw))
}

/// Same, with at least two species.
pub fn mixture(max_species: usize) -> impl Strategy<Value = MomentState> {
    prop::collection::vec(species(), 2..=max_species).prop_map(|raw| build(&raw))
}

pub fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}
