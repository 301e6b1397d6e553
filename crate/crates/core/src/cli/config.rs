//! Operator configuration: a small TOML file, environment overrides and
//! command-line flags, in increasing precedence.
//!
//! ```toml
//! data_dir = "/var/lib/tutorweb"
//! port = 8080
//! admin_token = "change-me"
//! log_level = "info"
//!
//! [grade]
//! max_window = 30
//!
//! [timeout]
//! t_min = 15.0
//! g_min = 6.0
//! ```

use crate::grading::{GradePolicy, PolicyError};
use crate::pacing::TimeoutPolicy;
use crate::sync::LectureSettings;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("environment variable {0}: {1}")]
    Env(&'static str, String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GradeOverrides {
    base_window: Option<usize>,
    growth_threshold: Option<usize>,
    growth_divisor: Option<f64>,
    max_window: Option<usize>,
    scale: Option<f64>,
    last_answer_weight: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeoutOverrides {
    enabled: Option<bool>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    g_min: Option<f64>,
    width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    data_dir: Option<PathBuf>,
    port: Option<u16>,
    bind: Option<String>,
    admin_token: Option<String>,
    log_level: Option<String>,
    #[serde(default)]
    grade: GradeOverrides,
    #[serde(default)]
    timeout: TimeoutOverrides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub data_dir: PathBuf,
    pub port: u16,
    pub bind: String,
    pub admin_token: Option<String>,
    pub log_level: String,
    pub grade_policy: GradePolicy,
    pub timeout_policy: TimeoutPolicy,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            data_dir: PathBuf::from("tutorweb-data"),
            port: 8080,
            bind: "127.0.0.1".into(),
            admin_token: None,
            log_level: "info".into(),
            grade_policy: GradePolicy::default(),
            timeout_policy: TimeoutPolicy::default(),
        }
    }
}

impl Config {
    /// Defaults, then the config file (if any), then `TUTORWEB_*` variables.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                path: p.to_owned(),
                source,
            })?),
            None => None,
        };
        let mut cfg = match (path, text) {
            (Some(p), Some(t)) => Self::from_toml(&t).map_err(|source| ConfigError::Parse {
                path: p.to_owned(),
                source,
            })?,
            _ => Config::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        let f: FileConfig = toml::from_str(text)?;
        let d = Config::default();
        let g = f.grade;
        let t = f.timeout;
        let gd = d.grade_policy;
        let td = d.timeout_policy;
        Ok(Config {
            data_dir: f.data_dir.unwrap_or(d.data_dir),
            port: f.port.unwrap_or(d.port),
            bind: f.bind.unwrap_or(d.bind),
            admin_token: f.admin_token,
            log_level: f.log_level.unwrap_or(d.log_level),
            grade_policy: GradePolicy {
                base_window: g.base_window.unwrap_or(gd.base_window),
                growth_threshold: g.growth_threshold.unwrap_or(gd.growth_threshold),
                growth_divisor: g.growth_divisor.unwrap_or(gd.growth_divisor),
                max_window: g.max_window.unwrap_or(gd.max_window),
                scale: g.scale.unwrap_or(gd.scale),
                last_answer_weight: g.last_answer_weight.unwrap_or(gd.last_answer_weight),
            },
            timeout_policy: TimeoutPolicy {
                enabled: t.enabled.unwrap_or(td.enabled),
                t_min: t.t_min.unwrap_or(td.t_min),
                t_max: t.t_max.unwrap_or(td.t_max),
                g_min: t.g_min.unwrap_or(td.g_min),
                width: t.width.unwrap_or(td.width),
            },
        })
    }

    pub fn apply_env<F: Fn(&str) -> Option<String>>(&mut self, get: F) -> Result<(), ConfigError> {
        if let Some(v) = get("TUTORWEB_DATA_DIR") {
            self.data_dir = v.into();
        }
        if let Some(v) = get("TUTORWEB_PORT") {
            self.port = v
                .parse()
                .map_err(|e: std::num::ParseIntError| ConfigError::Env("TUTORWEB_PORT", e.to_string()))?;
        }
        if let Some(v) = get("TUTORWEB_ADMIN_TOKEN") {
            self.admin_token = Some(v);
        }
        if let Some(v) = get("TUTORWEB_LOG") {
            self.log_level = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grade_policy.validate()?;
        self.timeout_policy.validate()?;
        Ok(())
    }

    pub fn lecture_settings(&self) -> LectureSettings {
        LectureSettings {
            grade_policy: self.grade_policy,
            timeout_policy: self.timeout_policy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn overrides() {
        let cfg = Config::from_toml(
            "port = 9000\nadmin_token = \"s3cret\"\n[grade]\nmax_window = 20\n[timeout]\nenabled = false\n",
        )
        .unwrap();
        assert_eq!(cfg.port, 9000);
        assert_eq!(cfg.admin_token.as_deref(), Some("s3cret"));
        assert_eq!(cfg.grade_policy.max_window, 20);
        assert_eq!(cfg.grade_policy.base_window, 8);
        assert!(!cfg.timeout_policy.enabled);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::from_toml("prot = 1").is_err());
        assert!(Config::from_toml("[grade]\nwindow = 3").is_err());
    }

    #[test]
    fn invalid_policy_rejected() {
        let cfg = Config::from_toml("[grade]\nbase_window = 40\n").unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::Policy(_))));
    }

    #[test]
    fn env_overrides() {
        let mut cfg = Config::default();
        cfg.apply_env(|k| match k {
            "TUTORWEB_PORT" => Some("7000".into()),
            "TUTORWEB_ADMIN_TOKEN" => Some("tok".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(cfg.port, 7000);
        assert_eq!(cfg.admin_token.as_deref(), Some("tok"));
        assert!(cfg.apply_env(|k| (k == "TUTORWEB_PORT").then(|| "x".into())).is_err());
    }
}
