//! Short-time Fourier analysis and weighted overlap-add synthesis.
//!
//! Periodic Hann window of 1024 samples, hop 256. The signal is centred:
//! frame `k` covers input samples `k·hop − 512 .. k·hop + 512`, with zeros
//! outside the clip, so every input sample lies well inside at least three
//! frames. Synthesis windows each inverse frame again and divides by the
//! summed squared window at every sample, which reconstructs the input
//! exactly (up to rounding) when the spectra are left untouched.

use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub const WINDOW_LEN: usize = 1024;
pub const HOP: usize = WINDOW_LEN / 4;
pub const BINS: usize = WINDOW_LEN / 2 + 1;
const CENTER: usize = WINDOW_LEN / 2;

fn hann() -> &'static [f64] {
    static WINDOW: OnceLock<Vec<f64>> = OnceLock::new();
    WINDOW.get_or_init(|| {
        (0..WINDOW_LEN)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / WINDOW_LEN as f64).cos())
            .collect()
    })
}

/// Number of frames needed to cover `len` input samples.
pub fn frame_count(len: usize) -> usize {
    if len == 0 {
        0
    } else {
        (CENTER + len - 1) / HOP + 1
    }
}

/// FFT plans plus scratch space for frame-by-frame work.
pub struct StftEngine {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Default for StftEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl StftEngine {
    pub fn new() -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(WINDOW_LEN);
        let inverse = planner.plan_fft_inverse(WINDOW_LEN);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            buf: vec![Complex64::default(); WINDOW_LEN],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    /// Spectrum of frame `frame` of `input`, written to `out[..BINS]`.
    pub fn analyze(&mut self, input: &[f32], frame: usize, out: &mut [Complex64]) {
        let window = hann();
        let origin = frame * HOP;
        for (j, slot) in self.buf.iter_mut().enumerate() {
            let pos = origin + j;
            let x = if pos >= CENTER && pos - CENTER < input.len() {
                f64::from(input[pos - CENTER])
            } else {
                0.0
            };
            *slot = Complex64::new(x * window[j], 0.0);
        }
        self.forward
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        out[..BINS].copy_from_slice(&self.buf[..BINS]);
    }

    /// Windowed time-domain frame for a one-sided spectrum.
    pub fn synthesize(&mut self, spectrum: &[Complex64], out: &mut [f64]) {
        let window = hann();
        self.buf[..BINS].copy_from_slice(&spectrum[..BINS]);
        for (b, c) in spectrum.iter().enumerate().take(WINDOW_LEN / 2).skip(1) {
            self.buf[WINDOW_LEN - b] = c.conj();
        }
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / WINDOW_LEN as f64;
        for ((o, c), w) in out.iter_mut().zip(&self.buf).zip(window) {
            *o = c.re * scale * w;
        }
    }
}

/// Streaming weighted overlap-add. Frames must be pushed in order; output
/// samples are finalized as soon as no later frame can touch them.
pub struct OverlapAdd {
    len: usize,
    frames: usize,
    pushed: usize,
    acc: Vec<f64>,
    out: Vec<f32>,
}

impl OverlapAdd {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            frames: frame_count(len),
            pushed: 0,
            acc: vec![0.0; WINDOW_LEN],
            out: Vec::with_capacity(len),
        }
    }

    pub fn push(&mut self, windowed: &[f64]) {
        assert!(self.pushed < self.frames, "more frames than the signal has");
        for (a, w) in self.acc.iter_mut().zip(windowed) {
            *a += w;
        }
        let origin = self.pushed * HOP;
        self.pushed += 1;
        let ready = if self.pushed == self.frames {
            WINDOW_LEN
        } else {
            HOP
        };
        for i in 0..ready {
            self.emit(origin + i, self.acc[i]);
        }
        self.acc.copy_within(HOP.., 0);
        self.acc[WINDOW_LEN - HOP..].fill(0.0);
    }

    fn emit(&mut self, padded: usize, value: f64) {
        if padded < CENTER || padded - CENTER >= self.len {
            return;
        }
        debug_assert_eq!(padded - CENTER, self.out.len());
        let norm = window_power_sum(padded, self.frames);
        self.out.push((value / norm) as f32);
    }

    pub fn finish(self) -> Vec<f32> {
        assert_eq!(self.out.len(), self.len, "not all frames were pushed");
        self.out
    }
}

fn window_power_sum(padded: usize, frames: usize) -> f64 {
    let window = hann();
    let first = (padded + HOP).saturating_sub(WINDOW_LEN) / HOP;
    let last = (padded / HOP).min(frames - 1);
    (first..=last)
        .map(|k| padded - k * HOP)
        .filter(|&j| j < WINDOW_LEN)
        .map(|j| window[j] * window[j])
        .sum()
}

/// All frames of a signal, for offline inspection.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub frames: Vec<Vec<Complex64>>,
    pub len: usize,
}

pub fn stft(input: &[f32]) -> Spectrogram {
    let mut engine = StftEngine::new();
    let frames = (0..frame_count(input.len()))
        .map(|k| {
            let mut spectrum = vec![Complex64::default(); BINS];
            engine.analyze(input, k, &mut spectrum);
            spectrum
        })
        .collect();
    Spectrogram {
        frames,
        len: input.len(),
    }
}

pub fn istft(spectrogram: &Spectrogram) -> Vec<f32> {
    let mut engine = StftEngine::new();
    let mut ola = OverlapAdd::new(spectrogram.len);
    let mut frame = vec![0.0; WINDOW_LEN];
    for spectrum in &spectrogram.frames {
        engine.synthesize(spectrum, &mut frame);
        ola.push(&frame);
    }
    ola.finish()
}
