// SPDX-License-Identifier: Apache-2.0

//! Bundled example systems. Each passing fixture that has a closed-form
//! solution ships a reference file mapping component names to expressions.

use crate::system::{parse_spec_file, SpecFile};

pub struct Fixture {
    pub name: &'static str,
    pub spec: &'static str,
    pub reference: Option<&'static str>,
    /// Fault-injected variants are expected to fail `check`.
    pub fault: bool,
}

impl Fixture {
    pub fn load(&self) -> SpecFile {
        parse_spec_file(self.spec).unwrap_or_else(|e| panic!("fixture {}: {e}", self.name))
    }
}

macro_rules! fixture {
    ($name:literal, $fault:expr) => {
        Fixture { name: $name, spec: include_str!(concat!("../fixtures/", $name, ".spec")), reference: None, fault: $fault }
    };
    ($name:literal, ref) => {
        Fixture {
            name: $name,
            spec: include_str!(concat!("../fixtures/", $name, ".spec")),
            reference: Some(include_str!(concat!("../fixtures/", $name, "_reference.toml"))),
            fault: false,
        }
    };
}

pub const ALL: &[Fixture] = &[
    fixture!("ode_exp", ref),
    fixture!("zero_rhs", ref),
    fixture!("merged_vectors", false),
    fixture!("coupled_pair", ref),
    fixture!("coupled_pair_fault", true),
    fixture!("three_unknown_pair", false),
    fixture!("three_unknown_pair_fault", true),
    fixture!("frobenius", ref),
    fixture!("frobenius_fault", true),
    fixture!("frobenius_vector", ref),
    fixture!("seven_unknowns", ref),
    fixture!("seven_unknowns_fault", true),
];

pub fn get(name: &str) -> Option<&'static Fixture> {
    ALL.iter().find(|f| f.name == name)
}
