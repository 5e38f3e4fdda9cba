//! Shared inputs for the benchmarks.

use isomed::rng::Stream;
use isomed::{AudioClip, SAMPLE_RATE};

/// Uniform noise at the given RMS, reproducible from `seed`.
pub fn noise_clip(seconds: f64, rms: f64, seed: u64) -> AudioClip {
    let n = (seconds * f64::from(SAMPLE_RATE)) as usize;
    let mut s = Stream::from_seed(seed);
    // uniform on [-1, 1] has RMS 1/√3
    let scale = rms * 3f64.sqrt();
    let samples = (0..n)
        .map(|_| ((s.uniform() * 2.0 - 1.0) * scale) as f32)
        .collect();
    AudioClip::new(samples, SAMPLE_RATE).expect("finite samples")
}

/// `count` score vectors of length `len` with matching 0/1 truth.
pub fn label_rows(count: usize, len: usize, seed: u64) -> Vec<(Vec<bool>, Vec<f64>)> {
    let mut s = Stream::from_seed(seed);
    (0..count)
        .map(|_| {
            let truth: Vec<bool> = (0..len).map(|_| s.uniform() < 0.1).collect();
            let scores = (0..len).map(|_| s.uniform()).collect();
            (truth, scores)
        })
        .collect()
}
