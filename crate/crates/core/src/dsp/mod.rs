//! Post-production: silence trimming, peak normalization, equal-power
//! crossfading, high-pass filtering, spectral gating, and WAV I/O.
//!
//! Every operation takes its input by reference and returns a new clip.

mod biquad;
mod chain;
mod crossfade;
mod gate;
mod levels;
pub mod stft;
pub mod wav;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use biquad::{highpass, Biquad};
pub use chain::{master, prepare_clip, ClipReport};
pub use crossfade::{crossfade_concat, crossfade_len, overlap_len, Crossfader};
pub use gate::spectral_gate;
pub use levels::{normalize_peak, silence_bounds, trim_silence};
pub use wav::{read_wav, write_wav, BitDepth, WavError};

#[derive(Debug, Error, PartialEq)]
pub enum DspError {
    #[error("fewer than {min_s} s of non-silent audio")]
    AllSilent { min_s: f64 },
    #[error("clip is silent; nothing to normalize")]
    SilentClip,
    #[error("clip {index} has sample rate {found}, expected {expected}")]
    RateMismatch {
        index: usize,
        expected: u32,
        found: u32,
    },
    #[error("overlap of {overlap} samples exceeds clip {index} ({len} samples)")]
    OverlapTooLong {
        index: usize,
        overlap: usize,
        len: usize,
    },
    #[error("clip has {len} samples, needs at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("no clips to concatenate")]
    NoClips,
    #[error("invalid DSP setting: {0}")]
    InvalidConfig(String),
}

/// Tunables of the post-production chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DspConfig {
    pub trim_threshold_dbfs: f64,
    pub trim_frame_ms: f64,
    pub trim_hop_ms: f64,
    pub normalize_peak_dbfs: f64,
    /// Normalize each clip before trimming it instead of after.
    pub normalize_before_trim: bool,
    pub crossfade_fraction: f64,
    pub highpass_cutoff_hz: f64,
    pub highpass_q: f64,
    pub gate_percentile: f64,
    /// Threshold factor α: a bin opens when its magnitude exceeds α times
    /// the noise floor.
    pub gate_threshold_factor: f64,
    /// Gain β applied to fully closed bins.
    pub gate_floor: f64,
    /// Half-width, in bins, of the median taken across neighbouring noise
    /// floors. Zero uses each bin's own across-frame percentile.
    pub gate_floor_median_bins: usize,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self {
            trim_threshold_dbfs: -50.0,
            trim_frame_ms: 20.0,
            trim_hop_ms: 10.0,
            normalize_peak_dbfs: -1.0,
            normalize_before_trim: false,
            crossfade_fraction: 0.25,
            highpass_cutoff_hz: 40.0,
            highpass_q: std::f64::consts::FRAC_1_SQRT_2,
            gate_percentile: 50.0,
            gate_threshold_factor: 1.5,
            gate_floor: 0.1,
            gate_floor_median_bins: 8,
        }
    }
}

impl DspConfig {
    pub fn validate(&self) -> Result<(), DspError> {
        let bad = |msg: &str| Err(DspError::InvalidConfig(msg.to_string()));
        let finite = [
            self.trim_threshold_dbfs,
            self.trim_frame_ms,
            self.trim_hop_ms,
            self.normalize_peak_dbfs,
            self.crossfade_fraction,
            self.highpass_cutoff_hz,
            self.highpass_q,
            self.gate_percentile,
            self.gate_threshold_factor,
            self.gate_floor,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all settings must be finite");
        }
        if !(self.crossfade_fraction > 0.0 && self.crossfade_fraction < 0.5) {
            return bad("crossfade_fraction must lie in (0, 0.5)");
        }
        if !(self.gate_floor > 0.0 && self.gate_floor <= 1.0) {
            return bad("gate_floor must lie in (0, 1]");
        }
        if self.gate_threshold_factor < 1.0 {
            return bad("gate_threshold_factor must be at least 1");
        }
        if !(0.0..=100.0).contains(&self.gate_percentile) {
            return bad("gate_percentile must lie in [0, 100]");
        }
        if self.trim_frame_ms <= 0.0 || self.trim_hop_ms <= 0.0 {
            return bad("trim frame and hop must be positive");
        }
        if self.highpass_cutoff_hz <= 0.0 || self.highpass_q <= 0.0 {
            return bad("high-pass cutoff and Q must be positive");
        }
        Ok(())
    }
}
