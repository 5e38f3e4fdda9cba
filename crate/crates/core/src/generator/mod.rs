//! Generation backends.
//!
//! A [`Backend`] turns a text prompt (plus optional conditioning audio
//! from the previous segment) into a mono 32 kHz clip. [`StubBackend`]
//! synthesizes a deterministic tone from the target emotion;
//! [`RemoteBackend`] speaks the HTTP protocol of the generation service.

mod remote;
mod stub;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clip::{AudioClip, SAMPLE_RATE};
use crate::emotion::Emotion;

pub use remote::{HealthStatus, RemoteBackend, RemoteConfig};
pub use stub::{stub_synthesize, StubBackend};

pub const MIN_DURATION_S: f64 = 1.0;
pub const MAX_DURATION_S: f64 = 120.0;
/// Allowed deviation of a returned clip from the requested duration.
pub const DURATION_TOLERANCE_S: f64 = 0.5;

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend returned unusable audio: {0}")]
    BadAudio(String),
    #[error("backend rejected the request ({code}): {message}")]
    Rejected { code: String, message: String },
    #[error("invalid generation request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub prompt: String,
    pub duration_s: f64,
    /// Tail of the previous segment, for continuity.
    pub conditioning: Option<AudioClip>,
    pub seed: Option<u64>,
    /// Emotion the prompt was built for. Backends that cannot read text
    /// (the stub) use it directly.
    pub emotion: Option<Emotion>,
}

impl GenerationRequest {
    pub fn new(prompt: impl Into<String>, duration_s: f64) -> Self {
        Self {
            prompt: prompt.into(),
            duration_s,
            conditioning: None,
            seed: None,
            emotion: None,
        }
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        let invalid = |m: String| Err(GenerationError::InvalidRequest(m));
        if self.prompt.trim().is_empty() {
            return invalid("empty prompt".into());
        }
        if !(MIN_DURATION_S..=MAX_DURATION_S).contains(&self.duration_s) {
            return invalid(format!(
                "duration {} s outside [{MIN_DURATION_S}, {MAX_DURATION_S}]",
                self.duration_s
            ));
        }
        if let Some(cond) = &self.conditioning {
            if cond.sample_rate() != SAMPLE_RATE {
                return invalid(format!("conditioning at {} Hz", cond.sample_rate()));
            }
            if cond.len() as f64 >= self.duration_s * f64::from(SAMPLE_RATE) {
                return invalid(format!(
                    "conditioning of {} samples is not shorter than the request",
                    cond.len()
                ));
            }
        }
        Ok(())
    }

    pub fn expected_samples(&self) -> usize {
        (self.duration_s * f64::from(SAMPLE_RATE)).round() as usize
    }
}

/// Something that produces audio from prompts. Implementations hold no
/// unsynchronized mutable state, so a backend can move between threads.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    fn generate(&self, request: &GenerationRequest) -> Result<AudioClip, GenerationError>;
}

/// Which backend a session uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Stub,
    Remote,
}

/// Validates the request, runs the backend and checks the result against
/// the clip contract: 32 kHz, mono, within half a second of the requested
/// duration.
pub fn generate(
    backend: &dyn Backend,
    request: &GenerationRequest,
) -> Result<AudioClip, GenerationError> {
    request.validate()?;
    let clip = backend.generate(request)?;
    if clip.sample_rate() != SAMPLE_RATE {
        return Err(GenerationError::BadAudio(format!(
            "sample rate {} Hz",
            clip.sample_rate()
        )));
    }
    let drift = (clip.duration_s() - request.duration_s).abs();
    if drift > DURATION_TOLERANCE_S {
        return Err(GenerationError::BadAudio(format!(
            "{:.3} s returned for a {:.3} s request",
            clip.duration_s(),
            request.duration_s
        )));
    }
    Ok(clip)
}
