use std::f64::consts::FRAC_PI_2;

use super::DspError;
use crate::clip::AudioClip;

/// Overlap between a clip of `prev_len` samples and its successor.
pub fn overlap_len(prev_len: usize, fraction: f64) -> usize {
    (fraction * prev_len as f64).round() as usize
}

/// Length of the crossfaded concatenation of clips with these lengths.
pub fn crossfade_len(lengths: &[usize], fraction: f64) -> usize {
    let Some((&first, rest)) = lengths.split_first() else {
        return 0;
    };
    let mut prev = first;
    let mut total = first;
    for &len in rest {
        total += len - overlap_len(prev, fraction).min(len);
        prev = len;
    }
    total
}

/// Joins clips end to end, overlapping each with the previous one by
/// `fraction` of the previous clip's length.
///
/// Within an overlap of `n` samples, sample `j` mixes the outgoing clip
/// with gain `cos(πt/2)` and the incoming clip with `sin(πt/2)`, where
/// `t = j / n`.
pub fn crossfade_concat(clips: &[AudioClip], fraction: f64) -> Result<AudioClip, DspError> {
    let lengths: Vec<usize> = clips.iter().map(AudioClip::len).collect();
    let mut fader = Crossfader::with_capacity(fraction, crossfade_len(&lengths, fraction));
    for clip in clips {
        fader.push(clip)?;
    }
    fader.finish()
}

/// Incremental form of [`crossfade_concat`]: clips are appended one at a
/// time, so callers need not keep them all.
#[derive(Debug, Clone)]
pub struct Crossfader {
    fraction: f64,
    out: Vec<f32>,
    rate: Option<u32>,
    prev_len: usize,
    count: usize,
}

impl Crossfader {
    pub fn new(fraction: f64) -> Self {
        Self::with_capacity(fraction, 0)
    }

    pub fn with_capacity(fraction: f64, samples: usize) -> Self {
        Self {
            fraction,
            out: Vec::with_capacity(samples),
            rate: None,
            prev_len: 0,
            count: 0,
        }
    }

    pub fn push(&mut self, clip: &AudioClip) -> Result<(), DspError> {
        let index = self.count;
        let Some(rate) = self.rate else {
            self.rate = Some(clip.sample_rate());
            self.out.extend_from_slice(clip.samples());
            self.prev_len = clip.len();
            self.count = 1;
            return Ok(());
        };
        if clip.sample_rate() != rate {
            return Err(DspError::RateMismatch {
                index,
                expected: rate,
                found: clip.sample_rate(),
            });
        }
        let overlap = overlap_len(self.prev_len, self.fraction);
        if overlap > clip.len() {
            return Err(DspError::OverlapTooLong {
                index,
                overlap,
                len: clip.len(),
            });
        }
        let incoming = clip.samples();
        let start = self.out.len() - overlap;
        for (j, (o, &i)) in self.out[start..]
            .iter_mut()
            .zip(&incoming[..overlap])
            .enumerate()
        {
            let theta = FRAC_PI_2 * j as f64 / overlap as f64;
            *o = (f64::from(*o) * theta.cos() + f64::from(i) * theta.sin()) as f32;
        }
        self.out.extend_from_slice(&incoming[overlap..]);
        self.prev_len = clip.len();
        self.count += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn clips(&self) -> usize {
        self.count
    }

    pub fn finish(self) -> Result<AudioClip, DspError> {
        let rate = self.rate.ok_or(DspError::NoClips)?;
        Ok(AudioClip::from_trusted(self.out, rate))
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::rng::Stream;

    const RATE: u32 = 32_000;

    fn noise(len: usize, rms: f64, seed: u64) -> AudioClip {
        let mut s = Stream::from_seed(seed);
        let raw: Vec<f64> = (0..len).map(|_| s.uniform() * 2.0 - 1.0).collect();
        let actual = (raw.iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
        AudioClip::new(
            raw.iter().map(|v| (v * rms / actual) as f32).collect(),
            RATE,
        )
        .unwrap()
    }

    #[test]
    fn single_clip_is_unchanged() {
        let clip = noise(1000, 0.3, 1);
        assert_eq!(
            crossfade_concat(std::slice::from_ref(&clip), 0.25).unwrap(),
            clip
        );
    }

    #[test]
    fn two_thirty_second_clips() {
        let a = AudioClip::silence(30 * RATE as usize, RATE);
        let out = crossfade_concat(&[a.clone(), a], 0.25).unwrap();
        assert_eq!(out.len(), 1_680_000);
        assert_eq!(out.duration_s(), 52.5);
    }

    #[test]
    fn uncorrelated_equal_rms_clips_keep_constant_power() {
        let c = 0.4;
        let a = noise(4 * RATE as usize, c, 11);
        let b = noise(4 * RATE as usize, c, 12);
        let out = crossfade_concat(&[a.clone(), b], 0.25).unwrap();
        let overlap = overlap_len(a.len(), 0.25);
        let start = a.len() - overlap;
        let region = &out.samples()[start..a.len()];
        let rms =
            (region.iter().map(|&s| f64::from(s).powi(2)).sum::<f64>() / overlap as f64).sqrt();
        assert!((rms / c - 1.0).abs() < 0.01, "rms {rms}");
    }

    #[test]
    fn coherent_clips_sum_in_amplitude() {
        // identical signals add in amplitude: at the midpoint both gains
        // are 1/√2, so a constant c becomes c·√2
        let c = 0.5f32;
        let a = AudioClip::new(vec![c; 800], RATE).unwrap();
        let out = crossfade_concat(&[a.clone(), a], 0.25).unwrap();
        let mid = 600 + 100;
        assert!((out.samples()[mid] - c * std::f32::consts::SQRT_2).abs() < 1e-6);
        assert_eq!(out.samples()[600], c);
    }

    #[test]
    fn errors() {
        let a = AudioClip::silence(100, RATE);
        let b = AudioClip::silence(100, 16_000);
        assert!(matches!(
            crossfade_concat(&[a.clone(), b], 0.25),
            Err(DspError::RateMismatch { index: 1, .. })
        ));
        let long = AudioClip::silence(1000, RATE);
        let short = AudioClip::silence(100, RATE);
        assert!(matches!(
            crossfade_concat(&[long, short], 0.25),
            Err(DspError::OverlapTooLong {
                index: 1,
                overlap: 250,
                len: 100
            })
        ));
        assert_eq!(crossfade_concat(&[], 0.25), Err(DspError::NoClips));
    }

    proptest! {
        #[test]
        fn length_formula_holds(
            lengths in prop::collection::vec(1000usize..2000, 1..8),
            fraction in 0.01f64..0.49,
        ) {
            let clips: Vec<AudioClip> = lengths.iter().map(|&n| AudioClip::silence(n, RATE)).collect();
            let out = crossfade_concat(&clips, fraction).unwrap();
            let expected = lengths[0]
                + lengths
                    .windows(2)
                    .map(|w| w[1] - (fraction * w[0] as f64).round() as usize)
                    .sum::<usize>();
            prop_assert_eq!(out.len(), expected);
            prop_assert_eq!(crossfade_len(&lengths, fraction), expected);
        }
    }
}
