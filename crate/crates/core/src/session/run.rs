use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{
    manifest_path_for, plan_session, Classifier, CommandClassifier, SegmentRecord, SessionConfig,
    SessionError, SessionManifest, SessionPlan, VerdictRecord, MANIFEST_FORMAT_VERSION,
};
use crate::clip::AudioClip;
use crate::dsp::wav::{write_wav, BitDepth};
use crate::dsp::{crossfade_len, master, prepare_clip, Crossfader};
use crate::emotion::MoodMapping;
use crate::evaluation::{emotion_match, MetricError};
use crate::generator::{generate, Backend, GenerationRequest};
use crate::rng::{derive_seed, domain};
use crate::tags::TagStats;

/// Mapping and statistics a session reads, with digests of their contents.
#[derive(Debug, Clone)]
pub struct SessionInputs {
    pub mapping: MoodMapping,
    pub stats: TagStats,
    pub mapping_digest: String,
    pub stats_digest: Option<String>,
}

impl SessionInputs {
    pub fn load(config: &SessionConfig) -> Result<Self, SessionError> {
        let mapping = match &config.mapping_path {
            Some(p) => MoodMapping::load(p)?,
            None => MoodMapping::builtin(),
        };
        let (stats, stats_digest) = match &config.stats_path {
            Some(p) => {
                let stats = TagStats::load(p)?;
                let digest = sha256_hex(stats.to_toml().as_bytes());
                (stats, Some(digest))
            }
            None => (TagStats::default(), None),
        };
        Ok(Self::new(mapping, stats, stats_digest))
    }

    pub fn new(mapping: MoodMapping, stats: TagStats, stats_digest: Option<String>) -> Self {
        let canonical: String = mapping
            .iter()
            .map(|(tag, emotion)| format!("{tag}\t{emotion}\n"))
            .collect();
        Self {
            mapping_digest: sha256_hex(canonical.as_bytes()),
            mapping,
            stats,
            stats_digest,
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A finished session held in memory.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub audio: AudioClip,
    pub manifest: SessionManifest,
}

/// A failed session: the error and a manifest of the segments completed.
#[derive(Debug)]
pub struct SessionFailure {
    pub error: SessionError,
    pub manifest: SessionManifest,
}

#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub manifest: SessionManifest,
    pub wav_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Generates, prepares and assembles every planned segment.
///
/// Segment `i`, attempt `r` is generated with seed
/// `derive_seed(seed, GENERATE, [i, r])` and conditioned on the last
/// `conditioning_s` seconds of segment `i − 1` as it entered assembly.
/// With a classifier, a segment is regenerated up to `max_retries` times
/// until the classifier hears the intended emotion; after that the last
/// attempt is kept and flagged.
pub fn render_session(
    plan: &SessionPlan,
    config: &SessionConfig,
    inputs: &SessionInputs,
    backend: &dyn Backend,
    classifier: Option<&dyn Classifier>,
) -> Result<Rendered, Box<SessionFailure>> {
    let mut manifest = SessionManifest {
        format_version: MANIFEST_FORMAT_VERSION,
        config: config.clone(),
        seed: config.seed,
        backend: backend.name().to_string(),
        mapping_digest: inputs.mapping_digest.clone(),
        stats_digest: inputs.stats_digest.clone(),
        path: plan.path.states.clone(),
        allocation: plan.allocation.clone(),
        segments: Vec::with_capacity(plan.len()),
        complete: false,
        failure: None,
        total_samples: None,
        total_duration_s: None,
        output_digest: None,
    };
    match render_into(plan, config, inputs, backend, classifier, &mut manifest) {
        Ok(audio) => {
            manifest.complete = true;
            manifest.total_samples = Some(audio.len());
            manifest.total_duration_s = Some(audio.duration_s());
            manifest.output_digest = Some(audio.digest());
            Ok(Rendered { audio, manifest })
        }
        Err(error) => {
            manifest.failure = Some(error.to_string());
            Err(Box::new(SessionFailure { error, manifest }))
        }
    }
}

fn render_into(
    plan: &SessionPlan,
    config: &SessionConfig,
    inputs: &SessionInputs,
    backend: &dyn Backend,
    classifier: Option<&dyn Classifier>,
    manifest: &mut SessionManifest,
) -> Result<AudioClip, SessionError> {
    let validation = &config.validation;
    let classifier = match (validation.enabled, classifier) {
        (true, Some(c)) => Some(c),
        (true, None) => {
            return Err(SessionError::InvalidConfig(
                "validation enabled without a classifier".into(),
            ))
        }
        (false, _) => None,
    };
    let clip_samples = (config.clip_duration_s * f64::from(crate::SAMPLE_RATE)).round() as usize;
    let expected = crossfade_len(
        &vec![clip_samples; plan.len()],
        config.dsp.crossfade_fraction,
    );
    let mut fader = Crossfader::with_capacity(config.dsp.crossfade_fraction, expected);
    let mut conditioning: Option<AudioClip> = None;

    for segment in &plan.segments {
        let index = segment.index;
        let mut attempt = 0u32;
        let (clip, report, verdict, seed, generated) = loop {
            let seed = derive_seed(
                config.seed,
                domain::GENERATE,
                &[index as u64, u64::from(attempt)],
            );
            let request = GenerationRequest {
                prompt: segment.rendered.clone(),
                duration_s: config.clip_duration_s,
                conditioning: conditioning.clone(),
                seed: Some(seed),
                emotion: Some(segment.emotion),
            };
            let raw = generate(backend, &request)
                .map_err(|source| SessionError::GenerationFailed { index, source })?;
            let (clip, report) = prepare_clip(&raw, &config.dsp)
                .map_err(|source| SessionError::Segment { index, source })?;
            let verdict = match classifier {
                None => None,
                Some(c) => {
                    let probs = c.classify(&clip)?;
                    Some(
                        match emotion_match(
                            &probs,
                            segment.emotion,
                            &inputs.mapping,
                            validation.top_m,
                            validation.tolerance_deg,
                        ) {
                            Ok(v) => VerdictRecord {
                                matched: v.matched,
                                error_deg: Some(v.error_deg),
                                closest_tag: Some(v.closest_tag),
                                closest_emotion: Some(v.closest_emotion),
                            },
                            Err(MetricError::NoMappableTags) => VerdictRecord {
                                matched: false,
                                error_deg: None,
                                closest_tag: None,
                                closest_emotion: None,
                            },
                            Err(source) => return Err(SessionError::Validation { index, source }),
                        },
                    )
                }
            };
            let accepted = verdict.as_ref().is_none_or(|v| v.matched);
            if accepted || attempt >= validation.max_retries {
                break (clip, report, verdict, seed, raw.len());
            }
            log::info!(
                "segment {index}: classifier disagreed, retry {}",
                attempt + 1
            );
            attempt += 1;
        };

        fader
            .push(&clip)
            .map_err(|source| SessionError::Segment { index, source })?;
        conditioning = (config.conditioning_s > 0.0).then(|| clip.tail(config.conditioning_s));
        manifest.segments.push(SegmentRecord {
            index,
            emotion: segment.emotion,
            prompt: segment.rendered.clone(),
            mood_tag: segment.prompt.mood_tag.clone(),
            instrument: segment.prompt.instrument.clone(),
            genre: segment.prompt.genre.clone(),
            instrument_redrawn: segment.instrument_redrawn,
            genre_redrawn: segment.genre_redrawn,
            empty_distribution: segment.empty_distribution.clone(),
            seed,
            retries: attempt,
            validation_exhausted: verdict.as_ref().is_some_and(|v| !v.matched),
            verdict,
            generated_samples: generated,
            trimmed_head: report.trimmed_head,
            trimmed_tail: report.trimmed_tail,
            pre_normalization_peak: report.pre_normalization_peak,
            normalization_gain: report.gain,
            samples: clip.len(),
            content_digest: clip.digest(),
        });
        log::info!(
            "segment {}/{} {} `{}`",
            index + 1,
            plan.len(),
            segment.emotion,
            segment.rendered
        );
    }

    let assembled = fader.finish().map_err(SessionError::Assembly)?;
    master(&assembled, &config.dsp).map_err(SessionError::Assembly)
}

/// Plans and renders a session, then writes the float WAV to `output` and
/// the manifest next to it. A failed session still writes its partial
/// manifest before returning the error.
pub fn run_session(
    config: &SessionConfig,
    backend: &dyn Backend,
    classifier: Option<&dyn Classifier>,
    output: &Path,
) -> Result<SessionOutcome, SessionError> {
    let inputs = SessionInputs::load(config)?;
    let plan = plan_session(config, &inputs.stats, &inputs.mapping)?;
    let command;
    let classifier = match classifier {
        Some(c) => Some(c),
        None if config.validation.enabled => {
            command = CommandClassifier::new(&config.validation.command)?;
            Some(&command as &dyn Classifier)
        }
        None => None,
    };
    let manifest_path = manifest_path_for(output);
    match render_session(&plan, config, &inputs, backend, classifier) {
        Ok(rendered) => {
            let file = File::create(output).map_err(|source| SessionError::Io {
                path: output.to_path_buf(),
                source,
            })?;
            let mut writer = BufWriter::new(file);
            write_wav(&rendered.audio, BitDepth::Float32, &mut writer)?;
            writer.flush().map_err(|source| SessionError::Io {
                path: output.to_path_buf(),
                source,
            })?;
            rendered.manifest.save(&manifest_path)?;
            Ok(SessionOutcome {
                manifest: rendered.manifest,
                wav_path: output.to_path_buf(),
                manifest_path,
            })
        }
        Err(failure) => {
            if let Err(e) = failure.manifest.save(&manifest_path) {
                log::error!("could not write partial manifest: {e}");
            }
            Err(failure.error)
        }
    }
}

#[cfg(test)]
mod tests;
