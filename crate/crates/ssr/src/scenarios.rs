//! Scenario files shipped with the binary.

use crate::config::Scenario;
use crate::error::{CliError, CliResult};

pub const BUILTIN: &[(&str, &str)] = &[
    ("fig1", include_str!("../scenarios/fig1.toml")),
    ("fig1a", include_str!("../scenarios/fig1a.toml")),
    ("fig2", include_str!("../scenarios/fig2.toml")),
    ("fig3", include_str!("../scenarios/fig3.toml")),
    ("single-class", include_str!("../scenarios/single-class.toml")),
    ("zero-density", include_str!("../scenarios/zero-density.toml")),
    ("roundtrip", include_str!("../scenarios/roundtrip.toml")),
    ("baseline", include_str!("../scenarios/baseline.toml")),
    ("optimized", include_str!("../scenarios/optimized.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> CliResult<&'static str> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            CliError::input(format!(
                "unknown scenario `{name}`; available: {}",
                names().collect::<Vec<_>>().join(", ")
            ))
        })
}

pub fn load(name: &str) -> CliResult<Scenario> {
    Scenario::from_toml(source(name)?)
}
