//! Named configurations shipped with the library.

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

macro_rules! preset {
    ($name:literal) => {
        ($name, include_str!(concat!("../presets/", $name, ".toml")))
    };
}

/// (name, TOML source) of every preset.
pub const PRESETS: [(&str, &str); 13] = [
    preset!("fig1d"),
    preset!("fig1e"),
    preset!("fig2a"),
    preset!("fig2b"),
    preset!("fig2cd"),
    preset!("fig3a"),
    preset!("fig3b"),
    preset!("fig3c"),
    preset!("fig3d"),
    preset!("fig3e"),
    preset!("supp_t1"),
    preset!("supp_chevron"),
    preset!("hh_scan"),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// One-line description taken from the preset's leading comment.
pub fn description(name: &str) -> Option<&'static str> {
    let src = source(name)?;
    Some(src.lines().next().and_then(|l| l.strip_prefix("# ")).unwrap_or(""))
}

pub fn load(name: &str) -> Result<ExperimentConfig> {
    let src = source(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset `{name}`; available: {}",
            names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    ExperimentConfig::from_toml_str(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for name in names() {
            load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(!description(name).unwrap().is_empty(), "{name}");
        }
    }

    #[test]
    fn unknown_preset_is_config_error() {
        assert!(matches!(load("nope"), Err(Error::Config(_))));
    }
}
