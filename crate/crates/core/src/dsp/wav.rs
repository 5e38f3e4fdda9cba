//! RIFF/WAVE reading and writing for 16-bit PCM and 32-bit float.
//!
//! Reading accepts mono or stereo; stereo is averaged down to mono.
//! 16-bit samples map to `i / 32768`; writing quantizes `round(x · 32768)`
//! clamped to the i16 range.

use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor, Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavSpec};
use thiserror::Error;

use crate::clip::AudioClip;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("bad WAV header: {0}")]
    BadHeader(String),
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("WAV data is truncated or corrupt: {0}")]
    Truncated(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Pcm16,
    Float32,
}

/// Format of a decoded file, before downmixing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavInfo {
    pub channels: u16,
    pub sample_rate: u32,
    pub bit_depth: BitDepth,
}

fn header_error(e: hound::Error) -> WavError {
    match e {
        hound::Error::Unsupported => WavError::UnsupportedFormat("unsupported encoding".into()),
        // hound reports short reads as `Other`
        hound::Error::IoError(io)
            if matches!(
                io.kind(),
                std::io::ErrorKind::UnexpectedEof | std::io::ErrorKind::Other
            ) =>
        {
            WavError::BadHeader(format!("header ends early: {io}"))
        }
        hound::Error::IoError(io) => WavError::Io(io),
        other => WavError::BadHeader(other.to_string()),
    }
}

fn data_error(e: hound::Error) -> WavError {
    match e {
        hound::Error::IoError(io)
            if !matches!(
                io.kind(),
                std::io::ErrorKind::UnexpectedEof | std::io::ErrorKind::Other
            ) =>
        {
            WavError::Io(io)
        }
        other => WavError::Truncated(other.to_string()),
    }
}

pub fn read_wav<R: Read>(reader: R) -> Result<AudioClip, WavError> {
    read_wav_with_info(reader).map(|(clip, _)| clip)
}

pub fn read_wav_with_info<R: Read>(reader: R) -> Result<(AudioClip, WavInfo), WavError> {
    let mut wav = hound::WavReader::new(reader).map_err(header_error)?;
    let spec = wav.spec();
    let bit_depth = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => BitDepth::Pcm16,
        (SampleFormat::Float, 32) => BitDepth::Float32,
        (format, bits) => {
            return Err(WavError::UnsupportedFormat(format!(
                "{bits}-bit {format:?}"
            )))
        }
    };
    if !(1..=2).contains(&spec.channels) {
        return Err(WavError::UnsupportedFormat(format!(
            "{} channels",
            spec.channels
        )));
    }
    if spec.sample_rate == 0 {
        return Err(WavError::BadHeader("zero sample rate".into()));
    }
    let interleaved: Vec<f32> = match bit_depth {
        BitDepth::Pcm16 => wav
            .samples::<i16>()
            .map(|s| s.map(|v| f32::from(v) / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(data_error)?,
        BitDepth::Float32 => wav
            .samples::<f32>()
            .collect::<Result<_, _>>()
            .map_err(data_error)?,
    };
    let samples = if spec.channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|pair| ((f64::from(pair[0]) + f64::from(pair[1])) / 2.0) as f32)
            .collect()
    } else {
        interleaved
    };
    let clip = AudioClip::new(samples, spec.sample_rate)
        .map_err(|e| WavError::UnsupportedFormat(e.to_string()))?;
    let info = WavInfo {
        channels: spec.channels,
        sample_rate: spec.sample_rate,
        bit_depth,
    };
    Ok((clip, info))
}

pub fn write_wav<W: Write + Seek>(
    clip: &AudioClip,
    bit_depth: BitDepth,
    writer: W,
) -> Result<(), WavError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: match bit_depth {
            BitDepth::Pcm16 => 16,
            BitDepth::Float32 => 32,
        },
        sample_format: match bit_depth {
            BitDepth::Pcm16 => SampleFormat::Int,
            BitDepth::Float32 => SampleFormat::Float,
        },
    };
    let to_io = |e: hound::Error| match e {
        hound::Error::IoError(io) => WavError::Io(io),
        other => WavError::UnsupportedFormat(other.to_string()),
    };
    let mut out = hound::WavWriter::new(writer, spec).map_err(to_io)?;
    match bit_depth {
        BitDepth::Pcm16 => {
            for &s in clip.samples() {
                let q = (f64::from(s) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                out.write_sample(q).map_err(to_io)?;
            }
        }
        BitDepth::Float32 => {
            for &s in clip.samples() {
                out.write_sample(s).map_err(to_io)?;
            }
        }
    }
    out.finalize().map_err(to_io)
}

pub fn wav_bytes(clip: &AudioClip, bit_depth: BitDepth) -> Vec<u8> {
    let mut cursor = Cursor::new(Vec::with_capacity(clip.len() * 4 + 64));
    write_wav(clip, bit_depth, &mut cursor).expect("writing to memory cannot fail");
    cursor.into_inner()
}

pub fn read_wav_file(path: &Path) -> Result<AudioClip, WavError> {
    read_wav(BufReader::new(File::open(path)?))
}

pub fn write_wav_file(path: &Path, clip: &AudioClip, bit_depth: BitDepth) -> Result<(), WavError> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_wav(clip, bit_depth, &mut writer)?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn sine(rate: u32) -> AudioClip {
        let s = (0..rate)
            .map(|i| {
                (0.8 * (2.0 * std::f64::consts::PI * 440.0 * f64::from(i) / f64::from(rate)).sin())
                    as f32
            })
            .collect();
        AudioClip::new(s, rate).unwrap()
    }

    #[test]
    fn float_round_trip_is_exact() {
        let clip = sine(32_000);
        let bytes = wav_bytes(&clip, BitDepth::Float32);
        let (back, info) = read_wav_with_info(bytes.as_slice()).unwrap();
        assert_eq!(back, clip);
        assert_eq!(info.channels, 1);
        assert_eq!(info.bit_depth, BitDepth::Float32);
    }

    #[test]
    fn pcm16_round_trip_within_quantization() {
        let clip = AudioClip::new(vec![-1.0, -0.5, 0.0, 0.3, 0.999, 1.0], 8000).unwrap();
        let back = read_wav(wav_bytes(&clip, BitDepth::Pcm16).as_slice()).unwrap();
        for (a, b) in clip.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() <= 2f32.powi(-15));
        }
    }

    #[test]
    fn stereo_is_averaged() {
        let spec = WavSpec {
            channels: 2,
            sample_rate: 16_000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut cursor, spec).unwrap();
        for s in [16384i16, 0, -8192, -8192] {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
        let (clip, info) = read_wav_with_info(cursor.into_inner().as_slice()).unwrap();
        assert_eq!(info.channels, 2);
        assert_eq!(clip.samples(), &[0.25, -0.25]);
    }

    #[test]
    fn truncated_header_is_rejected() {
        let bytes = wav_bytes(&sine(8000), BitDepth::Float32);
        for cut in [0, 4, 12, 30] {
            assert!(
                matches!(read_wav(&bytes[..cut]), Err(WavError::BadHeader(_))),
                "cut at {cut}"
            );
        }
        assert!(matches!(
            read_wav(b"RIFX\0\0\0\0WAVEfmt ".as_slice()),
            Err(WavError::BadHeader(_))
        ));
    }

    #[test]
    fn unsupported_depths_are_rejected() {
        let spec = WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 24,
            sample_format: SampleFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut cursor, spec).unwrap();
        w.write_sample(1000i32).unwrap();
        w.finalize().unwrap();
        assert!(matches!(
            read_wav(cursor.into_inner().as_slice()),
            Err(WavError::UnsupportedFormat(_))
        ));
    }

    proptest! {
        #[test]
        fn pcm16_error_bound(samples in prop::collection::vec(-1.0f32..=1.0, 1..200)) {
            let clip = AudioClip::new(samples, 32_000).unwrap();
            let back = read_wav(wav_bytes(&clip, BitDepth::Pcm16).as_slice()).unwrap();
            for (a, b) in clip.samples().iter().zip(back.samples()) {
                prop_assert!((a - b).abs() <= 2f32.powi(-15));
            }
        }
    }
}
