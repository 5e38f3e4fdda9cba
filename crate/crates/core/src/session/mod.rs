//! End-to-end sessions: planning the segment sequence, generating each
//! segment with continuity conditioning and optional emotion validation,
//! and assembling the finished file with a reproducibility manifest.

mod classifier;
mod config;
mod manifest;
mod plan;
mod run;

use std::path::PathBuf;

use thiserror::Error;

use crate::dsp::{DspError, WavError};
use crate::emotion::MappingError;
use crate::evaluation::MetricError;
use crate::generator::GenerationError;
use crate::prompt::PromptError;
use crate::tags::IngestError;

pub use classifier::{Classifier, CommandClassifier};
pub use config::{BackendConfig, SessionConfig, ValidationConfig};
pub use manifest::{
    manifest_path_for, SegmentRecord, SessionManifest, VerdictRecord, MANIFEST_FORMAT_VERSION,
};
pub use plan::{allocate_segments, plan_session, segment_count, PlannedSegment, SessionPlan};
pub use run::{
    render_session, run_session, Rendered, SessionFailure, SessionInputs, SessionOutcome,
};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Stats(#[from] IngestError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("segment {index}: generation failed: {source}")]
    GenerationFailed {
        index: usize,
        source: GenerationError,
    },
    #[error("segment {index}: {source}")]
    Segment { index: usize, source: DspError },
    #[error("assembly: {0}")]
    Assembly(DspError),
    #[error("classifier: {0}")]
    Classifier(String),
    #[error("segment {index}: {source}")]
    Validation { index: usize, source: MetricError },
    #[error(transparent)]
    Wav(#[from] WavError),
    #[error("manifest: {0}")]
    Manifest(String),
}

impl SessionError {
    pub fn is_backend(&self) -> bool {
        matches!(self, SessionError::GenerationFailed { .. })
    }
}
