use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SessionError;
use crate::dsp::DspConfig;
use crate::emotion::Emotion;
use crate::evaluation::DEFAULT_TOLERANCE_DEG;
use crate::generator::{BackendKind, RemoteConfig, MAX_DURATION_S, MIN_DURATION_S};
use crate::prompt::TransitionPolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub remote: RemoteConfig,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Stub,
            remote: RemoteConfig::default(),
        }
    }
}

/// Optional per-clip check that a classifier hears the intended emotion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub enabled: bool,
    /// Program and leading arguments; the clip's WAV path is appended and
    /// stdout must be a JSON object of tag probabilities.
    pub command: Vec<String>,
    pub top_m: usize,
    pub tolerance_deg: f64,
    pub max_retries: u32,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            command: Vec::new(),
            top_m: 3,
            tolerance_deg: DEFAULT_TOLERANCE_DEG,
            max_retries: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub start_emotion: Emotion,
    pub goal_emotion: Emotion,
    pub target_duration_s: f64,
    pub clip_duration_s: f64,
    /// Seconds of the previous processed clip passed as conditioning.
    pub conditioning_s: f64,
    pub temperature: f64,
    pub seed: u64,
    pub initial_instrument: String,
    pub initial_genre: String,
    /// Mood-tag mapping table; the built-in table when absent.
    pub mapping_path: Option<PathBuf>,
    /// Tag statistics; without them instrument and genre never change.
    pub stats_path: Option<PathBuf>,
    pub backend: BackendConfig,
    pub validation: ValidationConfig,
    pub dsp: DspConfig,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            start_emotion: Emotion::Stressed,
            goal_emotion: Emotion::Calm,
            target_duration_s: 900.0,
            clip_duration_s: 30.0,
            conditioning_s: 10.0,
            temperature: 0.3,
            seed: 0,
            initial_instrument: "piano".into(),
            initial_genre: "classical".into(),
            mapping_path: None,
            stats_path: None,
            backend: BackendConfig::default(),
            validation: ValidationConfig::default(),
            dsp: DspConfig::default(),
        }
    }
}

impl SessionConfig {
    pub fn from_toml(text: &str) -> Result<Self, SessionError> {
        let config: Self =
            toml::from_str(text).map_err(|e| SessionError::InvalidConfig(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, SessionError> {
        let text = std::fs::read_to_string(path).map_err(|source| SessionError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn policy(&self) -> Result<TransitionPolicy, SessionError> {
        Ok(TransitionPolicy::new(self.temperature, self.seed)?)
    }

    /// Checks value ranges. File existence is checked when the files are
    /// loaded.
    pub fn validate(&self) -> Result<(), SessionError> {
        let bad = |m: String| Err(SessionError::InvalidConfig(m));
        if !(MIN_DURATION_S..=MAX_DURATION_S).contains(&self.clip_duration_s) {
            return bad(format!(
                "clip_duration_s {} outside [{MIN_DURATION_S}, {MAX_DURATION_S}]",
                self.clip_duration_s
            ));
        }
        if !(self.target_duration_s.is_finite() && self.target_duration_s >= self.clip_duration_s) {
            return bad(format!(
                "target_duration_s {} must be at least the clip duration",
                self.target_duration_s
            ));
        }
        if !(self.conditioning_s >= 0.0 && self.conditioning_s < self.clip_duration_s) {
            return bad(format!(
                "conditioning_s {} must lie in [0, clip_duration_s)",
                self.conditioning_s
            ));
        }
        self.policy()?;
        for (name, v) in [
            ("initial_instrument", &self.initial_instrument),
            ("initial_genre", &self.initial_genre),
        ] {
            if v.trim().is_empty() || v.chars().any(char::is_uppercase) {
                return bad(format!("{name} must be a non-empty lowercase label"));
            }
        }
        self.dsp
            .validate()
            .map_err(|e| SessionError::InvalidConfig(e.to_string()))?;
        let v = &self.validation;
        if v.enabled {
            if v.top_m == 0 {
                return bad("validation.top_m must be at least 1".into());
            }
            if !(v.tolerance_deg >= 0.0 && v.tolerance_deg <= 180.0) {
                return bad(format!(
                    "tolerance_deg {} outside [0, 180]",
                    v.tolerance_deg
                ));
            }
        }
        Ok(())
    }
}
