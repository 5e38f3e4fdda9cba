//! HTTP client for the generation service.
//!
//! `POST {endpoint}/generate` with a JSON body
//! `{prompt, duration_s, seed?, conditioning_wav_b64?}` returns a WAV file
//! (16-bit PCM or 32-bit float, mono, 32 kHz). Failures carry a JSON body
//! `{error_code, message}`. `GET {endpoint}/health` reports
//! `{status, model, loaded}`.

use std::thread;
use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use ureq::Agent;

use super::{Backend, GenerationError, GenerationRequest};
use crate::clip::{AudioClip, SAMPLE_RATE};
use crate::dsp::wav::{read_wav_with_info, wav_bytes, BitDepth};

/// Upper bound on a response body: two minutes of float audio plus slack.
const MAX_RESPONSE_BYTES: u64 = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub timeout_s: f64,
    /// Sleep before each retry of a request that failed with
    /// `BackendUnavailable`; its length is the retry count.
    pub retry_backoff_s: Vec<f64>,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000".into(),
            timeout_s: 300.0,
            retry_backoff_s: vec![0.5, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub loaded: bool,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    prompt: &'a str,
    duration_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditioning_wav_b64: Option<String>,
}

#[derive(Deserialize)]
struct WireError {
    error_code: String,
    message: String,
}

pub struct RemoteBackend {
    config: RemoteConfig,
    agent: Agent,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, GenerationError> {
        if !(config.timeout_s.is_finite() && config.timeout_s > 0.0) {
            return Err(GenerationError::InvalidRequest(format!(
                "timeout {} s",
                config.timeout_s
            )));
        }
        if config
            .retry_backoff_s
            .iter()
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(GenerationError::InvalidRequest("negative backoff".into()));
        }
        let agent = Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_s)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self { config, agent })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{path}", self.config.endpoint.trim_end_matches('/'))
    }

    pub fn health(&self) -> Result<HealthStatus, GenerationError> {
        let mut response = self
            .agent
            .get(&self.url("health"))
            .call()
            .map_err(unavailable)?;
        if !response.status().is_success() {
            return Err(GenerationError::BackendUnavailable(format!(
                "health check returned {}",
                response.status()
            )));
        }
        let body = response.body_mut().read_to_string().map_err(unavailable)?;
        serde_json::from_str(&body)
            .map_err(|e| GenerationError::BackendUnavailable(format!("health body: {e}")))
    }

    fn attempt(&self, body: &str) -> Result<AudioClip, GenerationError> {
        let mut response = self
            .agent
            .post(&self.url("generate"))
            .header("content-type", "application/json")
            .send(body)
            .map_err(unavailable)?;
        let status = response.status();
        let bytes = response
            .body_mut()
            .with_config()
            .limit(MAX_RESPONSE_BYTES)
            .read_to_vec()
            .map_err(unavailable)?;
        if status.is_success() {
            return decode_audio(&bytes);
        }
        let (code, message) = match serde_json::from_slice::<WireError>(&bytes) {
            Ok(e) => (e.error_code, e.message),
            Err(_) => (
                status.as_u16().to_string(),
                String::from_utf8_lossy(&bytes).into_owned(),
            ),
        };
        if status.is_server_error() {
            Err(GenerationError::BackendUnavailable(format!(
                "{} {code}: {message}",
                status.as_u16()
            )))
        } else {
            Err(GenerationError::Rejected { code, message })
        }
    }
}

fn unavailable(e: ureq::Error) -> GenerationError {
    GenerationError::BackendUnavailable(e.to_string())
}

/// Parses a response body into a clip, rejecting anything that is not mono
/// 32 kHz. Float samples outside [-1, 1] are clamped.
fn decode_audio(bytes: &[u8]) -> Result<AudioClip, GenerationError> {
    let (clip, info) =
        read_wav_with_info(bytes).map_err(|e| GenerationError::BadAudio(e.to_string()))?;
    if info.channels != 1 {
        return Err(GenerationError::BadAudio(format!(
            "{} channels",
            info.channels
        )));
    }
    if info.sample_rate != SAMPLE_RATE {
        return Err(GenerationError::BadAudio(format!(
            "sample rate {} Hz",
            info.sample_rate
        )));
    }
    let samples = clip
        .into_samples()
        .into_iter()
        .map(|s| s.clamp(-1.0, 1.0))
        .collect();
    Ok(AudioClip::from_trusted(samples, SAMPLE_RATE))
}

impl Backend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn generate(&self, request: &GenerationRequest) -> Result<AudioClip, GenerationError> {
        let conditioning_wav_b64 = request.conditioning.as_ref().map(|c| {
            base64::engine::general_purpose::STANDARD.encode(wav_bytes(c, BitDepth::Float32))
        });
        let body = serde_json::to_string(&WireRequest {
            prompt: &request.prompt,
            duration_s: request.duration_s,
            seed: request.seed,
            conditioning_wav_b64,
        })
        .expect("request serializes");

        let mut backoff = self.config.retry_backoff_s.iter();
        loop {
            match self.attempt(&body) {
                Err(GenerationError::BackendUnavailable(reason)) => match backoff.next() {
                    Some(&wait) => {
                        log::warn!("generation failed ({reason}); retrying in {wait} s");
                        thread::sleep(Duration::from_secs_f64(wait));
                    }
                    None => return Err(GenerationError::BackendUnavailable(reason)),
                },
                other => return other,
            }
        }
    }
}
