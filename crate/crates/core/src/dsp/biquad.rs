use std::f64::consts::PI;

use super::DspError;
use crate::clip::AudioClip;

/// Second-order IIR section with coefficients normalized by `a0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// RBJ audio-EQ-cookbook high-pass.
    pub fn highpass(sample_rate: u32, cutoff_hz: f64, q: f64) -> Result<Self, DspError> {
        let nyquist = f64::from(sample_rate) / 2.0;
        if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
            return Err(DspError::InvalidConfig(format!(
                "cutoff {cutoff_hz} Hz must lie in (0, {nyquist})"
            )));
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(DspError::InvalidConfig(format!("Q {q} must be positive")));
        }
        let w0 = 2.0 * PI * cutoff_hz / f64::from(sample_rate);
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Ok(Self {
            b0: (1.0 + cos) / 2.0 / a0,
            b1: -(1.0 + cos) / a0,
            b2: (1.0 + cos) / 2.0 / a0,
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        })
    }

    /// Filters from rest, transposed direct form II with f64 state.
    pub fn process(&self, input: &[f32]) -> Vec<f32> {
        let (mut z1, mut z2) = (0.0f64, 0.0f64);
        input
            .iter()
            .map(|&x| {
                let x = f64::from(x);
                let y = self.b0 * x + z1;
                z1 = self.b1 * x - self.a1 * y + z2;
                z2 = self.b2 * x - self.a2 * y;
                y as f32
            })
            .collect()
    }
}

pub fn highpass(clip: &AudioClip, cutoff_hz: f64, q: f64) -> Result<AudioClip, DspError> {
    let filter = Biquad::highpass(clip.sample_rate(), cutoff_hz, q)?;
    Ok(AudioClip::from_trusted(
        filter.process(clip.samples()),
        clip.sample_rate(),
    ))
}
