use std::f64::consts::{PI, TAU};

use super::{Backend, GenerationError, GenerationRequest};
use crate::clip::{db_to_amplitude, AudioClip, SAMPLE_RATE};
use crate::emotion::Emotion;
use crate::rng::{domain, Stream};

const CARRIER_AMPLITUDE: f64 = 0.5;
const TREMOLO_DEPTH: f64 = 0.3;
const NOISE_DBFS: f64 = -45.0;
const FADE_S: f64 = 0.05;

pub fn carrier_hz(valence: f64) -> f64 {
    200.0 + 120.0 * (valence + 1.0)
}

pub fn tremolo_hz(arousal: f64) -> f64 {
    1.0 + 4.0 * (arousal + 1.0)
}

/// Deterministic stand-in for a music model: a sine whose pitch follows
/// valence and whose tremolo rate follows arousal, plus seeded white noise
/// and short raised-cosine fades.
pub fn stub_synthesize(emotion: Emotion, duration_s: f64, seed: u64) -> AudioClip {
    let rate = f64::from(SAMPLE_RATE);
    let n = (duration_s * rate).round() as usize;
    let f0 = carrier_hz(emotion.valence());
    let fr = tremolo_hz(emotion.arousal());
    let fade = ((FADE_S * rate).round() as usize).min(n / 2);
    // uniform on [-a, a] has RMS a/√3
    let noise_peak = db_to_amplitude(NOISE_DBFS) * 3f64.sqrt();
    let mut noise = Stream::derive(seed, domain::STUB_NOISE, &[emotion.ring_index() as u64]);

    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let envelope = 1.0 + TREMOLO_DEPTH * (TAU * fr * t).sin();
            let tone = CARRIER_AMPLITUDE * envelope * (TAU * f0 * t).sin();
            let hiss = noise_peak * (2.0 * noise.uniform() - 1.0);
            let edge = i.min(n - 1 - i);
            let gain = if edge < fade {
                0.5 - 0.5 * (PI * edge as f64 / fade as f64).cos()
            } else {
                1.0
            };
            ((tone + hiss) * gain) as f32
        })
        .collect();
    AudioClip::from_trusted(samples, SAMPLE_RATE)
}

/// Backend that ignores the prompt text and conditioning audio and renders
/// [`stub_synthesize`] for the request's emotion.
#[derive(Debug, Clone, Default)]
pub struct StubBackend;

impl StubBackend {
    /// Emotion of a request: the explicit hint, else the first prompt tag
    /// that names an emotion.
    fn emotion_of(request: &GenerationRequest) -> Result<Emotion, GenerationError> {
        request
            .emotion
            .or_else(|| {
                request
                    .prompt
                    .split(',')
                    .find_map(|tag| tag.trim().parse().ok())
            })
            .ok_or_else(|| {
                GenerationError::InvalidRequest(format!(
                    "no emotion in prompt `{}`",
                    request.prompt
                ))
            })
    }
}

impl Backend for StubBackend {
    fn name(&self) -> &str {
        "stub"
    }

    fn generate(&self, request: &GenerationRequest) -> Result<AudioClip, GenerationError> {
        let emotion = Self::emotion_of(request)?;
        if let Some(cond) = &request.conditioning {
            log::debug!("stub ignoring conditioning {}", cond.digest());
        }
        Ok(stub_synthesize(
            emotion,
            request.duration_s,
            request.seed.unwrap_or(0),
        ))
    }
}
