//! Iso-principle music generation: emotion geometry, tag statistics,
//! prompt construction, generation backends, audio post-production and
//! evaluation metrics.

pub mod clip;
pub mod dsp;
pub mod emotion;
pub mod evaluation;
pub mod generator;
pub mod prompt;
pub mod rng;
pub mod session;
pub mod tags;

pub use clip::{AudioClip, SAMPLE_RATE};
pub use dsp::{DspConfig, DspError};
pub use emotion::{plan_path, Emotion, EmotionError, IsoPath, MoodMapping};
pub use prompt::{render_prompt, sample_transition, PromptSpec, Transition, TransitionPolicy};
pub use tags::{compute_tag_stats, parse_jamendo_tsv, TagStats};
