//! Defaults read from the TOML file named by `FRONTHAUL_CONFIG`.

use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

pub const ENV_VAR: &str = "FRONTHAUL_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub solve: SolveDefaults,
    #[serde(default)]
    pub sweep: SweepDefaults,
    #[serde(default)]
    pub render: RenderDefaults,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveDefaults {
    pub time_limit: Option<f64>,
    pub gap_tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub node_limit: Option<u64>,
    pub brute_force_guard: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDefaults {
    pub parallel_cells: Option<usize>,
    pub global_time_limit: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderDefaults {
    pub scale: Option<f64>,
    pub show_unused: Option<bool>,
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
}

/// The configured defaults, or built-in ones when the variable is unset.
pub fn load() -> Result<Config, CliError> {
    match std::env::var_os(ENV_VAR) {
        None => Ok(Config::default()),
        Some(path) => {
            let path = Path::new(&path);
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
            parse(&text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_are_optional() {
        assert_eq!(parse("").unwrap(), Config::default());
        let c = parse("[solve]\nseed = 9\ntime_limit = 30.0\n").unwrap();
        assert_eq!(c.solve.seed, Some(9));
        assert_eq!(c.solve.time_limit, Some(30.0));
        assert_eq!(c.render, RenderDefaults::default());
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        assert!(matches!(parse("[solve]\nsed = 9\n"), Err(CliError::Usage(_))));
    }
}
