//! The per-clip and whole-session stages of post-production.

use serde::{Deserialize, Serialize};

use super::{highpass, normalize_peak, silence_bounds, spectral_gate, DspConfig, DspError};
use crate::clip::AudioClip;

/// What [`prepare_clip`] did to one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipReport {
    pub input_samples: usize,
    pub trimmed_head: usize,
    pub trimmed_tail: usize,
    /// Peak of the clip just before normalization.
    pub pre_normalization_peak: f32,
    pub gain: f64,
}

/// Trims leading and trailing silence and normalizes the peak, in the
/// order chosen by `normalize_before_trim`.
pub fn prepare_clip(
    clip: &AudioClip,
    config: &DspConfig,
) -> Result<(AudioClip, ClipReport), DspError> {
    let trim = |c: &AudioClip| -> Result<(AudioClip, usize, usize), DspError> {
        let range = silence_bounds(c, config)?;
        let head = range.start;
        let tail = c.len() - range.end;
        Ok((
            AudioClip::from_trusted(c.samples()[range].to_vec(), c.sample_rate()),
            head,
            tail,
        ))
    };
    let normalize = |c: &AudioClip| -> Result<(AudioClip, f32, f64), DspError> {
        let peak = c.peak();
        let out = normalize_peak(c, config.normalize_peak_dbfs)?;
        let gain = f64::from(out.peak()) / f64::from(peak);
        Ok((out, peak, gain))
    };
    let (out, head, tail, peak, gain) = if config.normalize_before_trim {
        let (n, peak, gain) = normalize(clip)?;
        let (t, head, tail) = trim(&n)?;
        (t, head, tail, peak, gain)
    } else {
        let (t, head, tail) = trim(clip)?;
        let (n, peak, gain) = normalize(&t)?;
        (n, head, tail, peak, gain)
    };
    Ok((
        out,
        ClipReport {
            input_samples: clip.len(),
            trimmed_head: head,
            trimmed_tail: tail,
            pre_normalization_peak: peak,
            gain,
        },
    ))
}

/// High-pass filter followed by spectral gating.
pub fn master(clip: &AudioClip, config: &DspConfig) -> Result<AudioClip, DspError> {
    let filtered = highpass(clip, config.highpass_cutoff_hz, config.highpass_q)?;
    spectral_gate(&filtered, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::db_to_amplitude;

    const RATE: u32 = 32_000;

    fn padded_tone() -> AudioClip {
        let mut s = vec![0.0f32; RATE as usize / 2];
        s.extend((0..2 * RATE).map(|i| 0.25 * ((i as f32) * 0.05).sin()));
        s.extend(vec![0.0f32; RATE as usize]);
        AudioClip::new(s, RATE).unwrap()
    }

    #[test]
    fn trims_then_normalizes() {
        let (out, report) = prepare_clip(&padded_tone(), &DspConfig::default()).unwrap();
        assert_eq!(report.input_samples, 3 * RATE as usize + RATE as usize / 2);
        assert!(report.trimmed_head > 15_000 && report.trimmed_head <= 16_000);
        assert!(report.trimmed_tail > 31_000);
        assert_eq!(
            out.len(),
            report.input_samples - report.trimmed_head - report.trimmed_tail
        );
        assert!((f64::from(out.peak()) - db_to_amplitude(-1.0)).abs() < 1e-6);
        assert!((f64::from(report.pre_normalization_peak) - 0.25).abs() < 1e-3);
    }

    #[test]
    fn normalizing_first_can_trim_differently() {
        let config = DspConfig {
            normalize_before_trim: true,
            ..Default::default()
        };
        let (out, report) = prepare_clip(&padded_tone(), &config).unwrap();
        assert!((f64::from(out.peak()) - db_to_amplitude(-1.0)).abs() < 1e-6);
        assert!(report.gain > 3.0);
    }

    #[test]
    fn silent_clip_fails() {
        let clip = AudioClip::silence(2 * RATE as usize, RATE);
        assert!(matches!(
            prepare_clip(&clip, &DspConfig::default()),
            Err(DspError::AllSilent { .. })
        ));
    }

    #[test]
    fn master_keeps_length() {
        let clip = padded_tone();
        assert_eq!(
            master(&clip, &DspConfig::default()).unwrap().len(),
            clip.len()
        );
    }
}
