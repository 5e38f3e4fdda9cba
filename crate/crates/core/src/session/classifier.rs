use std::collections::BTreeMap;
use std::io::{BufWriter, Write};
use std::process::Command;

use super::SessionError;
use crate::clip::AudioClip;
use crate::dsp::wav::{write_wav, BitDepth};
use crate::evaluation::parse_probabilities;

/// Emotion-recognition model consulted by the validation loop.
pub trait Classifier: Send + Sync {
    /// Tag probabilities for one clip.
    fn classify(&self, clip: &AudioClip) -> Result<BTreeMap<String, f64>, SessionError>;
}

/// Runs an external program on a temporary float WAV of the clip. The WAV
/// path is appended to the arguments; stdout must be one JSON object of
/// tag probabilities.
#[derive(Debug, Clone)]
pub struct CommandClassifier {
    program: String,
    args: Vec<String>,
}

impl CommandClassifier {
    pub fn new(command: &[String]) -> Result<Self, SessionError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| SessionError::InvalidConfig("empty classifier command".into()))?;
        Ok(Self {
            program: program.clone(),
            args: args.to_vec(),
        })
    }
}

impl Classifier for CommandClassifier {
    fn classify(&self, clip: &AudioClip) -> Result<BTreeMap<String, f64>, SessionError> {
        let err = |m: String| SessionError::Classifier(m);
        let mut file = tempfile::Builder::new()
            .suffix(".wav")
            .tempfile()
            .map_err(|e| err(e.to_string()))?;
        let mut writer = BufWriter::new(file.as_file_mut());
        write_wav(clip, BitDepth::Float32, &mut writer)?;
        writer.flush().map_err(|e| err(e.to_string()))?;
        drop(writer);
        let output = Command::new(&self.program)
            .args(&self.args)
            .arg(file.path())
            .output()
            .map_err(|e| err(format!("{}: {e}", self.program)))?;
        if !output.status.success() {
            return Err(err(format!(
                "{} exited with {}: {}",
                self.program,
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let mut clips = parse_probabilities(&stdout).map_err(|e| err(e.to_string()))?;
        if clips.len() != 1 {
            return Err(err(format!("expected one clip, got {}", clips.len())));
        }
        Ok(clips.remove(0))
    }
}
