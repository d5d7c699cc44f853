//! Shipped configurations: one generic and one constant-curvature config per
//! type, plus the second-branch T33 config that separates its readings.

use crate::config::{parse_config, RunConfig};
use crate::error::Result;

pub struct Fixture {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! fixture {
    ($name:literal) => {
        Fixture {
            name: $name,
            source: include_str!(concat!("../fixtures/", $name, ".json")),
        }
    };
}

pub const FIXTURES: &[Fixture] = &[
    fixture!("t2211_generic"),
    fixture!("t2211_flat"),
    fixture!("t321_generic"),
    fixture!("t321_flat"),
    fixture!("t33_generic"),
    fixture!("t33_second_branch"),
    fixture!("t33_flat"),
    fixture!("t411_generic"),
    fixture!("t411_flat"),
    fixture!("t51_generic"),
    fixture!("t51_flat"),
];

impl Fixture {
    pub fn config(&self) -> Result<RunConfig> {
        parse_config(self.source)
    }
}

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}
