use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use isomed::dsp::DspConfig;
use isomed::generator::BackendKind;
use isomed::session::SessionConfig;
use isomed::Emotion;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "isomed",
    version,
    about = "Plan, generate and evaluate iso-principle music sessions"
)]
pub struct Cli {
    /// Log level when RUST_LOG is unset.
    #[arg(long, global = true, default_value = "warn")]
    pub log: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the emotion path and the planned segments.
    Plan(PlanArgs),
    /// Compute per-mood instrument and genre statistics from a tag TSV.
    Stats(StatsArgs),
    /// Render a full session to a WAV file and manifest.
    Generate(GenerateArgs),
    /// Run trim, normalize, crossfade and mastering over existing WAVs.
    Post(PostArgs),
    /// Evaluation metrics over text inputs.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Inter-rater agreement on mood-tag mapping judgements.
    ValidateMapping(ValidateMappingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Stub,
    Remote,
}

impl From<BackendArg> for BackendKind {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Stub => BackendKind::Stub,
            BackendArg::Remote => BackendKind::Remote,
        }
    }
}

/// Session settings; each flag overrides the config file.
#[derive(Debug, Args, Default)]
pub struct SessionArgs {
    /// TOML session config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Starting emotion.
    #[arg(long, value_parser = parse_emotion)]
    pub from: Option<Emotion>,
    /// Goal emotion.
    #[arg(long, value_parser = parse_emotion)]
    pub to: Option<Emotion>,
    /// Target session length in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Length of each generated clip in seconds.
    #[arg(long)]
    pub clip_duration: Option<f64>,
    #[arg(long)]
    pub conditioning: Option<f64>,
    #[arg(long)]
    pub instrument: Option<String>,
    #[arg(long)]
    pub genre: Option<String>,
    /// Tag statistics file written by `isomed stats`.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Mood tag to emotion table (tag<TAB>emotion).
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Generation service base URL.
    #[arg(long, env = "ISOMED_ENDPOINT")]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Enable per-clip emotion validation.
    #[arg(long)]
    pub validate: bool,
    /// Classifier program and arguments; the clip path is appended.
    #[arg(long, num_args = 1.., value_name = "ARG", allow_hyphen_values = true)]
    pub classifier: Option<Vec<String>>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub top_m: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub dsp: DspArgs,
}

impl SessionArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<SessionConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => SessionConfig::load(path).map_err(|e| CliError::input(path, e))?,
            None => SessionConfig::default(),
        };
        set(&mut c.seed, self.seed);
        set(&mut c.temperature, self.temperature);
        set(&mut c.start_emotion, self.from);
        set(&mut c.goal_emotion, self.to);
        set(&mut c.target_duration_s, self.duration);
        set(&mut c.clip_duration_s, self.clip_duration);
        set(&mut c.conditioning_s, self.conditioning);
        set(&mut c.initial_instrument, self.instrument.clone());
        set(&mut c.initial_genre, self.genre.clone());
        if self.stats.is_some() {
            c.stats_path = self.stats.clone();
        }
        if self.mapping.is_some() {
            c.mapping_path = self.mapping.clone();
        }
        set(&mut c.backend.kind, self.backend.map(Into::into));
        set(&mut c.backend.remote.endpoint, self.endpoint.clone());
        set(&mut c.backend.remote.timeout_s, self.timeout);
        if self.validate {
            c.validation.enabled = true;
        }
        set(&mut c.validation.command, self.classifier.clone());
        set(&mut c.validation.max_retries, self.max_retries);
        set(&mut c.validation.top_m, self.top_m);
        set(&mut c.validation.tolerance_deg, self.tolerance);
        self.dsp.apply(&mut c.dsp);
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(c)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn parse_emotion(s: &str) -> Result<Emotion, String> {
    s.parse().map_err(|e: isomed::EmotionError| e.to_string())
}

/// Post-production overrides.
#[derive(Debug, Args, Default)]
pub struct DspArgs {
    #[arg(long)]
    pub dsp_trim_threshold_dbfs: Option<f64>,
    #[arg(long)]
    pub dsp_trim_frame_ms: Option<f64>,
    #[arg(long)]
    pub dsp_trim_hop_ms: Option<f64>,
    #[arg(long)]
    pub dsp_normalize_peak_dbfs: Option<f64>,
    #[arg(long)]
    pub dsp_normalize_before_trim: Option<bool>,
    #[arg(long)]
    pub dsp_crossfade_fraction: Option<f64>,
    #[arg(long)]
    pub dsp_highpass_cutoff_hz: Option<f64>,
    #[arg(long)]
    pub dsp_highpass_q: Option<f64>,
    #[arg(long)]
    pub dsp_gate_percentile: Option<f64>,
    #[arg(long)]
    pub dsp_gate_threshold_factor: Option<f64>,
    #[arg(long)]
    pub dsp_gate_floor: Option<f64>,
    #[arg(long)]
    pub dsp_gate_floor_median_bins: Option<usize>,
}

impl DspArgs {
    pub fn apply(&self, d: &mut DspConfig) {
        set(&mut d.trim_threshold_dbfs, self.dsp_trim_threshold_dbfs);
        set(&mut d.trim_frame_ms, self.dsp_trim_frame_ms);
        set(&mut d.trim_hop_ms, self.dsp_trim_hop_ms);
        set(&mut d.normalize_peak_dbfs, self.dsp_normalize_peak_dbfs);
        set(&mut d.normalize_before_trim, self.dsp_normalize_before_trim);
        set(&mut d.crossfade_fraction, self.dsp_crossfade_fraction);
        set(&mut d.highpass_cutoff_hz, self.dsp_highpass_cutoff_hz);
        set(&mut d.highpass_q, self.dsp_highpass_q);
        set(&mut d.gate_percentile, self.dsp_gate_percentile);
        set(&mut d.gate_threshold_factor, self.dsp_gate_threshold_factor);
        set(&mut d.gate_floor, self.dsp_gate_floor);
        set(
            &mut d.gate_floor_median_bins,
            self.dsp_gate_floor_median_bins,
        );
    }
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// Print the resolved config as TOML instead of the plan.
    #[arg(long)]
    pub show_config: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Tag TSV (TRACK_ID, ARTIST_ID, ALBUM_ID, PATH, DURATION, TAGS...).
    pub tsv: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fail on malformed rows instead of skipping them.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// Output WAV; the manifest is written next to it.
    #[arg(long, default_value = "session.wav")]
    pub out: PathBuf,
    /// Re-render from a manifest's config and check its output digest.
    #[arg(long, conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PostArgs {
    /// Input clips in playback order.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Write 16-bit PCM instead of 32-bit float.
    #[arg(long)]
    pub pcm16: bool,
    #[command(flatten)]
    pub dsp: DspArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Aggregate {
    /// Average of per-row scores.
    #[default]
    Mean,
    /// One score over all rows' labels together.
    Pooled,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Hamming score between label vectors and thresholded scores.
    Hamming(LabelArgs),
    /// Area under the precision-recall curve.
    Auprc(LabelArgs),
    /// Scaled cosine similarity of paired embeddings.
    Clap {
        /// Audio embeddings, one per line.
        #[arg(long)]
        audio: PathBuf,
        /// Text embeddings, one per line.
        #[arg(long)]
        text: PathBuf,
    },
    /// Fleiss' kappa.
    Kappa {
        /// Count matrix, one subject per line.
        #[arg(long, required_unless_present = "labels", conflicts_with = "labels")]
        counts: Option<PathBuf>,
        /// Rater labels, subject<TAB>label<TAB>label...
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Whether classifier output agrees with an intended emotion.
    Match {
        /// JSON object of tag probabilities, or an array of them.
        #[arg(long)]
        probs: PathBuf,
        #[arg(long, value_parser = parse_emotion)]
        emotion: Emotion,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        top_m: usize,
        #[arg(long, default_value_t = isomed::evaluation::DEFAULT_TOLERANCE_DEG)]
        tolerance: f64,
    },
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Ground-truth 0/1 vectors, one per line.
    #[arg(long)]
    pub truth: PathBuf,
    /// Predicted scores in [0, 1], one vector per line.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, default_value_t = isomed::evaluation::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t)]
    pub aggregate: Aggregate,
}

#[derive(Debug, Args)]
pub struct ValidateMappingArgs {
    /// Rater labels: mood tag, then one emotion per rater, tab-separated.
    pub labels: PathBuf,
    /// Mapping to compare against; the built-in table when absent.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
}
