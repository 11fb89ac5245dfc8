//! Bundled scenarios for the seven worked systems and the follow-up system
//! with both a disease-free and an endemic equilibrium.

use crate::config::ScenarioConfig;
use crate::error::ConfigError;

pub const NAMES: [&str; 8] = ["ex5_1", "ex5_2", "ex5_3", "ex5_4", "ex5_5", "ex5_6", "ex5_7", "sec6_followup"];

/// Raw JSON of a bundled preset.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "ex5_1" => include_str!("../presets/ex5_1.json"),
        "ex5_2" => include_str!("../presets/ex5_2.json"),
        "ex5_3" => include_str!("../presets/ex5_3.json"),
        "ex5_4" => include_str!("../presets/ex5_4.json"),
        "ex5_5" => include_str!("../presets/ex5_5.json"),
        "ex5_6" => include_str!("../presets/ex5_6.json"),
        "ex5_7" => include_str!("../presets/ex5_7.json"),
        "sec6_followup" => include_str!("../presets/sec6_followup.json"),
        _ => return None,
    })
}

pub fn load(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let text = source(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string(), NAMES.join(", ")))?;
    ScenarioConfig::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_load() {
        for name in NAMES {
            let cfg = load(name).unwrap();
            assert_eq!(cfg.name.as_deref(), Some(name));
            assert!(cfg.sweep.is_some());
        }
    }

    #[test]
    fn unknown_preset_is_reported() {
        assert!(matches!(load("ex9_9"), Err(ConfigError::UnknownPreset(..))));
    }
}
