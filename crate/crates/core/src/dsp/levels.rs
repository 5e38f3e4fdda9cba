use std::ops::Range;

use super::{DspConfig, DspError};
use crate::clip::{amplitude_to_db, db_to_amplitude, AudioClip};

const MIN_TRIMMED_S: f64 = 1.0;

/// Sample range left after dropping the leading and trailing runs of
/// frames whose RMS is under the trim threshold.
///
/// Frames start every hop; the last frames may be shorter than a full
/// frame. The kept range runs from the first loud frame's start to the
/// last loud frame's end.
pub fn silence_bounds(clip: &AudioClip, config: &DspConfig) -> Result<Range<usize>, DspError> {
    let rate = f64::from(clip.sample_rate());
    let min_len = (MIN_TRIMMED_S * rate).round() as usize;
    if clip.len() < min_len {
        return Err(DspError::TooShort {
            len: clip.len(),
            min: min_len,
        });
    }
    let frame = ((config.trim_frame_ms / 1000.0 * rate).round() as usize).max(1);
    let hop = ((config.trim_hop_ms / 1000.0 * rate).round() as usize).max(1);
    let samples = clip.samples();

    let is_loud = |start: usize| {
        let end = (start + frame).min(samples.len());
        let window = &samples[start..end];
        let energy: f64 = window.iter().map(|&s| f64::from(s).powi(2)).sum();
        let rms = (energy / window.len() as f64).sqrt();
        rms > 0.0 && amplitude_to_db(rms) >= config.trim_threshold_dbfs
    };

    let starts = (0..samples.len()).step_by(hop);
    let first = starts.clone().find(|&s| is_loud(s));
    let Some(first) = first else {
        return Err(DspError::AllSilent {
            min_s: MIN_TRIMMED_S,
        });
    };
    let last = starts.rev().find(|&s| is_loud(s)).unwrap_or(first);
    let range = first..(last + frame).min(samples.len());
    if range.len() < min_len {
        return Err(DspError::AllSilent {
            min_s: MIN_TRIMMED_S,
        });
    }
    Ok(range)
}

pub fn trim_silence(clip: &AudioClip, config: &DspConfig) -> Result<AudioClip, DspError> {
    let range = silence_bounds(clip, config)?;
    Ok(AudioClip::from_trusted(
        clip.samples()[range].to_vec(),
        clip.sample_rate(),
    ))
}

/// Scales the clip so its peak sits at `target_dbfs`.
pub fn normalize_peak(clip: &AudioClip, target_dbfs: f64) -> Result<AudioClip, DspError> {
    let peak = f64::from(clip.peak());
    if peak == 0.0 {
        return Err(DspError::SilentClip);
    }
    let gain = db_to_amplitude(target_dbfs) / peak;
    let samples = clip
        .samples()
        .iter()
        .map(|&s| (f64::from(s) * gain) as f32)
        .collect();
    Ok(AudioClip::from_trusted(samples, clip.sample_rate()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const RATE: u32 = 32_000;

    fn tone(seconds: f64, dbfs: f64) -> Vec<f32> {
        let amp = db_to_amplitude(dbfs);
        let n = (seconds * f64::from(RATE)) as usize;
        (0..n)
            .map(|i| {
                (amp * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / f64::from(RATE)).sin())
                    as f32
            })
            .collect()
    }

    #[test]
    fn trims_leading_and_trailing_silence() {
        let mut samples = vec![0.0; 2 * RATE as usize];
        samples.extend(tone(5.0, -6.0));
        samples.extend(vec![0.0; RATE as usize]);
        let clip = AudioClip::new(samples, RATE).unwrap();
        let range = silence_bounds(&clip, &DspConfig::default()).unwrap();
        let tol = (0.020 * f64::from(RATE)) as i64;
        assert!(
            (range.start as i64 - 2 * RATE as i64).abs() <= tol,
            "{range:?}"
        );
        assert!(
            (range.end as i64 - 7 * RATE as i64).abs() <= tol,
            "{range:?}"
        );
        let trimmed = trim_silence(&clip, &DspConfig::default()).unwrap();
        assert!((trimmed.duration_s() - 5.0).abs() <= 0.04);
    }

    #[test]
    fn loud_clip_is_untouched() {
        let clip = AudioClip::new(tone(2.0, -6.0).iter().map(|s| s + 0.1).collect(), RATE).unwrap();
        assert_eq!(trim_silence(&clip, &DspConfig::default()).unwrap(), clip);
    }

    #[test]
    fn silent_clip_errors() {
        let clip = AudioClip::silence(3 * RATE as usize, RATE);
        assert!(matches!(
            trim_silence(&clip, &DspConfig::default()),
            Err(DspError::AllSilent { .. })
        ));
        // half a second of sound is not enough either
        let mut samples = vec![0.0; 2 * RATE as usize];
        samples.extend(tone(0.5, -6.0));
        let clip = AudioClip::new(samples, RATE).unwrap();
        assert!(matches!(
            trim_silence(&clip, &DspConfig::default()),
            Err(DspError::AllSilent { .. })
        ));
    }

    #[test]
    fn normalizes_to_target_peak() {
        let clip = AudioClip::new(vec![0.0, 0.5, -0.25, 0.1], RATE).unwrap();
        let out = normalize_peak(&clip, -1.0).unwrap();
        let expected = 10f64.powf(-1.0 / 20.0);
        assert!((f64::from(out.peak()) - expected).abs() / expected < 1e-6);
        assert!((f64::from(out.peak()) - 0.891251).abs() < 1e-6);
        // pure scaling by 1.78236...
        let gain = f64::from(out.samples()[2]) / -0.25;
        assert!((gain - 1.782_501_876).abs() < 1e-6);

        let quarter = AudioClip::new(vec![0.25, -0.1], RATE).unwrap();
        assert_eq!(normalize_peak(&quarter, 0.0).unwrap().peak(), 1.0);
    }

    #[test]
    fn normalize_is_idempotent() {
        let clip = AudioClip::new(tone(0.1, -13.0), RATE).unwrap();
        let once = normalize_peak(&clip, -1.0).unwrap();
        let twice = normalize_peak(&once, -1.0).unwrap();
        for (a, b) in once.samples().iter().zip(twice.samples()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn normalize_rejects_silence() {
        let clip = AudioClip::silence(10, RATE);
        assert_eq!(normalize_peak(&clip, -1.0), Err(DspError::SilentClip));
    }
}
