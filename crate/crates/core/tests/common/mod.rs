#![allow(dead_code)]

use std::path::PathBuf;

use shadow_cqe::fcidump::{read_fcidump, IntegralSet};
use shadow_cqe::oracle::SectorSpec;
use shadow_cqe::{qubit_hamiltonian, PauliSum};

pub const H3_GEOMETRIES: [&str; 6] = ["0.5", "0.7", "1.0", "1.5", "2.0", "2.5"];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn load(name: &str) -> (IntegralSet, PauliSum) {
    let ints = read_fcidump(&fixture(name)).expect("fixture parses");
    let h = qubit_hamiltonian(&ints).expect("hamiltonian maps");
    (ints, h)
}

pub fn h2() -> (IntegralSet, PauliSum) {
    load("h2_R_0.7414.fcidump")
}

pub fn h3(r: &str) -> (IntegralSet, PauliSum) {
    load(&format!("h3_R_{r}.fcidump"))
}

pub fn sector(ints: &IntegralSet) -> SectorSpec {
    SectorSpec::from_electrons(ints.n_electrons, ints.ms2).expect("consistent header")
}
