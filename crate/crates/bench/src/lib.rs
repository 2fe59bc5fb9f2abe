//! Fixtures shared by the benchmarks.

use qesforge_core::razavy::RazavyParams;
use qesforge_core::{parse, ConstructedSystem, EnergyPair, GeneratingFunction};
use std::f64::consts::TAU;

pub fn razavy_gf(eps0: f64) -> GeneratingFunction {
    let p = RazavyParams::new(eps0).expect("eps0 >= 0.5");
    GeneratingFunction::new(parse(RazavyParams::GENERATOR).unwrap(), EnergyPair::new(p.eps0, p.eps1).unwrap(), TAU).unwrap()
}

pub fn razavy_system(eps0: f64) -> ConstructedSystem {
    ConstructedSystem::build(&razavy_gf(eps0)).expect("Razavy system builds")
}
