//! Mono PCM audio buffers.

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Native rate of the generation model; every clip in a session uses it.
pub const SAMPLE_RATE: u32 = 32_000;

#[derive(Debug, Error, PartialEq)]
pub enum ClipError {
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
}

/// A mono buffer of 32-bit float samples.
///
/// Samples are always finite. Magnitudes above 1.0 are allowed in
/// intermediate results; the normalization stage brings them back under
/// full scale.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self, ClipError> {
        if sample_rate == 0 {
            return Err(ClipError::ZeroSampleRate);
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(ClipError::NonFinite(i));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a clip from samples already known to be finite.
    pub(crate) fn from_trusted(samples: Vec<f32>, sample_rate: u32) -> Self {
        debug_assert!(sample_rate > 0);
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn silence(len: usize, sample_rate: u32) -> Self {
        Self::from_trusted(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> u16 {
        1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.samples.iter().map(|&s| f64::from(s).powi(2)).sum();
        (sum / self.samples.len() as f64).sqrt()
    }

    /// The final `seconds` of the clip (the whole clip when shorter).
    pub fn tail(&self, seconds: f64) -> AudioClip {
        let n = (seconds * f64::from(self.sample_rate)).round() as usize;
        let start = self.samples.len().saturating_sub(n);
        Self::from_trusted(self.samples[start..].to_vec(), self.sample_rate)
    }

    /// Hex SHA-256 over the little-endian bytes of the samples.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for s in &self.samples {
            hasher.update(s.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn amplitude_to_db(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert_eq!(AudioClip::new(vec![0.0], 0), Err(ClipError::ZeroSampleRate));
        assert_eq!(
            AudioClip::new(vec![0.0, f32::NAN], 8000),
            Err(ClipError::NonFinite(1))
        );
    }

    #[test]
    fn tail_clamps_to_length() {
        let clip = AudioClip::new((0..10).map(|i| i as f32 / 10.0).collect(), 10).unwrap();
        assert_eq!(clip.tail(0.3).samples(), &[0.7, 0.8, 0.9]);
        assert_eq!(clip.tail(5.0).len(), 10);
    }

    #[test]
    fn digest_tracks_content() {
        let a = AudioClip::new(vec![0.1, 0.2], 100).unwrap();
        let b = AudioClip::new(vec![0.1, 0.25], 100).unwrap();
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), b.digest());
    }
}
