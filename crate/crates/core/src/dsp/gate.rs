//! Spectral gating.
//!
//! 1. STFT magnitudes `|X[t][b]|`.
//! 2. Noise floor per bin: the `gate_percentile`-th percentile of that
//!    bin's magnitudes across all frames (linear interpolation between
//!    order statistics), then the median of those floors over
//!    `±gate_floor_median_bins` neighbouring bins.
//! 3. Raw mask: 1 where `|X| > α · floor`, else 0.
//! 4. Mask smoothed by a 5-frame × 3-bin moving average (truncated at the
//!    edges).
//! 5. Output spectrum `X · (m + (1 − m)·β)`, resynthesized by weighted
//!    overlap-add to the input length.
//!
//! The magnitudes of the whole clip are held as `f32` during step 2; the
//! spectra are recomputed for step 5 rather than stored.

use rustfft::num_complex::Complex64;

use super::stft::{frame_count, OverlapAdd, StftEngine, BINS, WINDOW_LEN};
use super::{DspConfig, DspError};
use crate::clip::AudioClip;

const SMOOTH_FRAMES: usize = 2;
const SMOOTH_BINS: usize = 1;

pub fn spectral_gate(clip: &AudioClip, config: &DspConfig) -> Result<AudioClip, DspError> {
    if clip.len() < WINDOW_LEN {
        return Err(DspError::TooShort {
            len: clip.len(),
            min: WINDOW_LEN,
        });
    }
    let alpha = config.gate_threshold_factor;
    let beta = config.gate_floor;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(DspError::InvalidConfig(format!("threshold factor {alpha}")));
    }
    if !(beta.is_finite() && (0.0..=1.0).contains(&beta)) {
        return Err(DspError::InvalidConfig(format!("gate floor {beta}")));
    }
    if !(0.0..=100.0).contains(&config.gate_percentile) {
        return Err(DspError::InvalidConfig(format!(
            "percentile {}",
            config.gate_percentile
        )));
    }

    let input = clip.samples();
    let frames = frame_count(input.len());
    let mut engine = StftEngine::new();
    let mut spectrum = vec![Complex64::default(); BINS];

    // bin-major so each bin's history is contiguous
    let mut magnitudes = vec![0f32; frames * BINS];
    for t in 0..frames {
        engine.analyze(input, t, &mut spectrum);
        for (b, c) in spectrum.iter().enumerate() {
            magnitudes[b * frames + t] = c.norm() as f32;
        }
    }

    let mut scratch = vec![0f32; frames];
    let per_bin: Vec<f64> = (0..BINS)
        .map(|b| {
            scratch.copy_from_slice(&magnitudes[b * frames..(b + 1) * frames]);
            percentile(&mut scratch, config.gate_percentile)
        })
        .collect();
    let floors = median_filter(&per_bin, config.gate_floor_median_bins);

    // frame-major raw mask
    let mut open = vec![0u8; frames * BINS];
    for b in 0..BINS {
        let threshold = alpha * floors[b];
        for t in 0..frames {
            open[t * BINS + b] = u8::from(f64::from(magnitudes[b * frames + t]) > threshold);
        }
    }
    drop(magnitudes);

    let mut ola = OverlapAdd::new(input.len());
    let mut column = vec![0u32; BINS];
    let mut frame = vec![0.0; WINDOW_LEN];
    for t in 0..frames {
        let lo = t.saturating_sub(SMOOTH_FRAMES);
        let hi = (t + SMOOTH_FRAMES).min(frames - 1);
        column.fill(0);
        for row in open[lo * BINS..(hi + 1) * BINS].chunks_exact(BINS) {
            for (c, &m) in column.iter_mut().zip(row) {
                *c += u32::from(m);
            }
        }
        let rows = (hi - lo + 1) as f64;

        engine.analyze(input, t, &mut spectrum);
        for (b, value) in spectrum.iter_mut().enumerate() {
            let b_lo = b.saturating_sub(SMOOTH_BINS);
            let b_hi = (b + SMOOTH_BINS).min(BINS - 1);
            let ones: u32 = column[b_lo..=b_hi].iter().sum();
            let mask = f64::from(ones) / (rows * (b_hi - b_lo + 1) as f64);
            *value *= mask + (1.0 - mask) * beta;
        }
        engine.synthesize(&spectrum, &mut frame);
        ola.push(&frame);
    }
    Ok(AudioClip::from_trusted(ola.finish(), clip.sample_rate()))
}

/// Linear-interpolated percentile; reorders `values`.
fn percentile(values: &mut [f32], p: f64) -> f64 {
    let n = values.len();
    let rank = p / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    let (_, &mut lower, upper) = values.select_nth_unstable_by(lo, f32::total_cmp);
    let lower = f64::from(lower);
    if frac == 0.0 || upper.is_empty() {
        return lower;
    }
    let next = upper.iter().copied().fold(f32::INFINITY, f32::min);
    lower + frac * (f64::from(next) - lower)
}

fn median_filter(values: &[f64], radius: usize) -> Vec<f64> {
    if radius == 0 {
        return values.to_vec();
    }
    let mut window = Vec::with_capacity(2 * radius + 1);
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(values.len() - 1);
            window.clear();
            window.extend_from_slice(&values[lo..=hi]);
            window.sort_by(f64::total_cmp);
            let m = window.len();
            if m % 2 == 1 {
                window[m / 2]
            } else {
                (window[m / 2 - 1] + window[m / 2]) / 2.0
            }
        })
        .collect()
}
