//! Settings layered as flags > environment > `dxasp.toml` > defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

pub const DEFAULT_CONFIG_FILE: &str = "dxasp.toml";

/// Flat keys accepted in the config file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub max_ground_rules: Option<usize>,
    pub max_models: Option<usize>,
    pub max_repair_attempts: Option<usize>,
    pub max_in_flight: Option<usize>,
    pub bridge: Option<bool>,
    pub llm_url: Option<String>,
    pub llm_model: Option<String>,
    pub llm_key: Option<String>,
    pub response_path: Option<String>,
    pub kb_dir: Option<PathBuf>,
}

impl FileConfig {
    /// Reads `explicit`, or `dxasp.toml` in the working directory if present.
    pub fn load(explicit: Option<&Path>) -> Result<Self, String> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => {
                let p = PathBuf::from(DEFAULT_CONFIG_FILE);
                if !p.exists() {
                    return Ok(Self::default());
                }
                p
            }
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: FileConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        for (key, v) in [
            ("max_ground_rules", cfg.max_ground_rules),
            ("max_models", cfg.max_models),
            ("max_repair_attempts", cfg.max_repair_attempts),
            ("max_in_flight", cfg.max_in_flight),
        ] {
            if v == Some(0) {
                return Err(format!("`{key}` must be at least 1"));
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys() {
        let c = FileConfig::parse(
            "max_models = 8\nbridge = false\nllm_url = \"http://localhost:8080/v1/chat/completions\"\n",
        )
        .unwrap();
        assert_eq!(c.max_models, Some(8));
        assert_eq!(c.bridge, Some(false));
        assert!(c.llm_url.unwrap().starts_with("http://localhost"));
    }

    #[test]
    fn rejects_unknown_keys_and_zero_caps() {
        assert!(FileConfig::parse("colour = 1").unwrap_err().contains("colour"));
        assert!(FileConfig::parse("max_models = 0").unwrap_err().contains("at least 1"));
    }

    #[test]
    fn missing_default_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let explicit = dir.path().join("none.toml");
        assert!(FileConfig::load(Some(&explicit)).is_err());
        std::fs::write(&explicit, "max_in_flight = 2\n").unwrap();
        assert_eq!(FileConfig::load(Some(&explicit)).unwrap().max_in_flight, Some(2));
    }
}
