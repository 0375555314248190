//! Project configuration: flat key=value settings in `abstf.toml` at the
//! project root, overridden by command-line flags.

use std::path::{Component, Path};

use abstf_core::pipeline::{PipelineSettings, ProjectLayout};
use serde::{Deserialize, Serialize};

pub const CONFIG_FILE: &str = "abstf.toml";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectConfig {
    pub source_dir: String,
    pub tests: String,
    pub requirements: String,
    pub state_dir: String,
    pub step_limit: u64,
    pub domain_lo: i64,
    pub domain_hi: i64,
    pub budget: u64,
    pub interval_secs: f64,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        ProjectConfig {
            source_dir: "src".to_string(),
            tests: "tests.json".to_string(),
            requirements: "requirements.json".to_string(),
            state_dir: ".abstf".to_string(),
            step_limit: 1_000_000,
            domain_lo: -8,
            domain_hi: 8,
            budget: 10_000,
            interval_secs: 2.0,
        }
    }
}

impl ProjectConfig {
    /// Reads `abstf.toml` under `root`, falling back to defaults when the
    /// file is absent.
    pub fn load(root: &Path) -> Result<ProjectConfig, String> {
        let path = root.join(CONFIG_FILE);
        if !path.exists() {
            return Ok(ProjectConfig::default());
        }
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        let config: ProjectConfig =
            toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        for (field, value) in [
            ("source_dir", &self.source_dir),
            ("tests", &self.tests),
            ("requirements", &self.requirements),
            ("state_dir", &self.state_dir),
        ] {
            let path = Path::new(value);
            let escapes = path.is_absolute()
                || path.components().any(|c| matches!(c, Component::ParentDir));
            if value.is_empty() || escapes {
                return Err(format!(
                    "config `{field}` must be a relative path inside the project root, got `{value}`"
                ));
            }
        }
        if self.step_limit == 0 {
            return Err("config `step_limit` must be positive".to_string());
        }
        if self.budget == 0 {
            return Err("config `budget` must be positive".to_string());
        }
        if self.domain_lo > self.domain_hi {
            return Err(format!(
                "config domain is empty: {}..{}",
                self.domain_lo, self.domain_hi
            ));
        }
        if !(self.interval_secs > 0.0) {
            return Err("config `interval_secs` must be positive".to_string());
        }
        Ok(())
    }

    pub fn layout(&self, root: &Path) -> ProjectLayout {
        ProjectLayout {
            root: root.to_path_buf(),
            source_dir: self.source_dir.clone(),
            tests: self.tests.clone(),
            requirements: self.requirements.clone(),
            state_dir: self.state_dir.clone(),
        }
    }

    pub fn settings(&self) -> PipelineSettings {
        PipelineSettings {
            step_limit: self.step_limit,
            domain: (self.domain_lo, self.domain_hi),
            budget: self.budget,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let config = ProjectConfig::default();
        let text = config.to_toml();
        let back: ProjectConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.source_dir, "src");
        assert_eq!(back.step_limit, 1_000_000);
        assert_eq!(back.domain_lo, -8);
        assert_eq!(back.domain_hi, 8);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let config: ProjectConfig = toml::from_str("source_dir = \"code\"\n").unwrap();
        assert_eq!(config.source_dir, "code");
        assert_eq!(config.tests, "tests.json");
    }

    #[test]
    fn escaping_paths_rejected() {
        let bad: ProjectConfig =
            toml::from_str("source_dir = \"../elsewhere\"\n").unwrap();
        assert!(bad.validate().is_err());
        let abs: ProjectConfig = toml::from_str("state_dir = \"/tmp/state\"\n").unwrap();
        assert!(abs.validate().is_err());
    }

    #[test]
    fn zero_settings_rejected() {
        let bad: ProjectConfig = toml::from_str("step_limit = 0\n").unwrap();
        assert!(bad.validate().is_err());
        let bad: ProjectConfig = toml::from_str("budget = 0\n").unwrap();
        assert!(bad.validate().is_err());
    }
}
