use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::*;
use crate::emotion::Emotion;
use crate::generator::{GenerationError, StubBackend};
use crate::SAMPLE_RATE;

fn short_config() -> SessionConfig {
    SessionConfig {
        start_emotion: Emotion::Sad,
        goal_emotion: Emotion::Depressed,
        target_duration_s: 12.0,
        clip_duration_s: 4.0,
        conditioning_s: 1.0,
        seed: 7,
        ..Default::default()
    }
}

fn inputs() -> SessionInputs {
    SessionInputs::new(MoodMapping::builtin(), TagStats::default(), None)
}

fn render(
    config: &SessionConfig,
    backend: &dyn Backend,
    classifier: Option<&dyn Classifier>,
) -> Result<Rendered, Box<SessionFailure>> {
    let inputs = inputs();
    let plan = plan_session(config, &inputs.stats, &inputs.mapping).unwrap();
    render_session(&plan, config, &inputs, backend, classifier)
}

/// Records every request and delegates to the stub.
#[derive(Default)]
struct Recording {
    requests: Mutex<Vec<GenerationRequest>>,
    fail_from: Option<usize>,
}

impl Backend for Recording {
    fn name(&self) -> &str {
        "recording"
    }

    fn generate(&self, request: &GenerationRequest) -> Result<AudioClip, GenerationError> {
        let mut seen = self.requests.lock().unwrap();
        if self.fail_from.is_some_and(|n| seen.len() >= n) {
            return Err(GenerationError::BackendUnavailable("down".into()));
        }
        seen.push(request.clone());
        StubBackend.generate(request)
    }
}

struct Always {
    tag: &'static str,
    calls: AtomicUsize,
}

impl Classifier for Always {
    fn classify(&self, _: &AudioClip) -> Result<BTreeMap<String, f64>, SessionError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(BTreeMap::from([(self.tag.to_string(), 0.9)]))
    }
}

/// Answers with the tag mapped to whatever emotion the clip's pitch
/// encodes, i.e. a perfect listener for the stub.
struct Echo;

impl Classifier for Echo {
    fn classify(&self, _: &AudioClip) -> Result<BTreeMap<String, f64>, SessionError> {
        Ok(BTreeMap::from([
            ("sad".to_string(), 0.7),
            ("dark".to_string(), 0.6),
        ]))
    }
}

#[test]
fn deterministic_and_length_consistent() {
    let config = short_config();
    let a = render(&config, &StubBackend, None).unwrap();
    let b = render(&config, &StubBackend, None).unwrap();
    assert_eq!(a.manifest, b.manifest);
    assert_eq!(a.audio, b.audio);
    assert!(a.manifest.complete);

    let lengths: Vec<usize> = a.manifest.segments.iter().map(|s| s.samples).collect();
    assert_eq!(
        a.audio.len(),
        crossfade_len(&lengths, config.dsp.crossfade_fraction)
    );
    assert_eq!(a.manifest.total_samples, Some(a.audio.len()));
    assert_eq!(
        a.manifest.output_digest.as_deref(),
        Some(a.audio.digest().as_str())
    );

    let first = a.manifest.segments.first().unwrap();
    let last = a.manifest.segments.last().unwrap();
    assert_eq!(first.emotion, config.start_emotion);
    assert_eq!(last.emotion, config.goal_emotion);

    let other = SessionConfig { seed: 8, ..config };
    assert_ne!(
        render(&other, &StubBackend, None)
            .unwrap()
            .manifest
            .output_digest,
        a.manifest.output_digest
    );
}

#[test]
fn conditioning_is_the_tail_of_the_previous_clip() {
    let config = short_config();
    let backend = Recording::default();
    let rendered = render(&config, &backend, None).unwrap();
    let requests = backend.requests.into_inner().unwrap();
    assert_eq!(requests.len(), rendered.manifest.segments.len());
    assert!(requests[0].conditioning.is_none());
    for r in &requests[1..] {
        let c = r.conditioning.as_ref().unwrap();
        assert_eq!(c.len(), SAMPLE_RATE as usize);
        assert_eq!(r.duration_s, 4.0);
    }
    let seeds: std::collections::BTreeSet<_> = requests.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), requests.len());
}

#[test]
fn matching_classifier_records_no_retries() {
    let config = SessionConfig {
        validation: crate::session::ValidationConfig {
            enabled: true,
            ..Default::default()
        },
        ..short_config()
    };
    let rendered = render(&config, &StubBackend, Some(&Echo)).unwrap();
    for s in &rendered.manifest.segments {
        assert_eq!(s.retries, 0);
        assert!(s.verdict.as_ref().unwrap().matched);
        assert!(!s.validation_exhausted);
    }
    assert!(!rendered.manifest.validation_exhausted());
}

#[test]
fn never_matching_classifier_exhausts_retries() {
    let config = SessionConfig {
        validation: crate::session::ValidationConfig {
            enabled: true,
            max_retries: 2,
            ..Default::default()
        },
        ..short_config()
    };
    // "happy" sits across the circumplex from sad and depressed
    let classifier = Always {
        tag: "happy",
        calls: AtomicUsize::new(0),
    };
    let rendered = render(&config, &StubBackend, Some(&classifier)).unwrap();
    let n = rendered.manifest.segments.len();
    assert_eq!(classifier.calls.load(Ordering::SeqCst), 3 * n);
    for s in &rendered.manifest.segments {
        assert_eq!(s.retries, 2);
        assert!(s.validation_exhausted);
        assert!(!s.verdict.as_ref().unwrap().matched);
        // the kept attempt is the last one
        assert_eq!(
            s.seed,
            derive_seed(7, domain::GENERATE, &[s.index as u64, 2])
        );
    }
    assert!(rendered.manifest.validation_exhausted());
}

#[test]
fn unmappable_classifier_output_counts_as_a_miss() {
    let config = SessionConfig {
        validation: crate::session::ValidationConfig {
            enabled: true,
            max_retries: 1,
            ..Default::default()
        },
        ..short_config()
    };
    let classifier = Always {
        tag: "not-a-tag",
        calls: AtomicUsize::new(0),
    };
    let rendered = render(&config, &StubBackend, Some(&classifier)).unwrap();
    let v = rendered.manifest.segments[0].verdict.clone().unwrap();
    assert!(!v.matched);
    assert_eq!(v.error_deg, None);
}

#[test]
fn validation_without_classifier_is_an_error() {
    let config = SessionConfig {
        validation: crate::session::ValidationConfig {
            enabled: true,
            ..Default::default()
        },
        ..short_config()
    };
    let failure = render(&config, &StubBackend, None).unwrap_err();
    assert!(matches!(failure.error, SessionError::InvalidConfig(_)));
}

#[test]
fn failure_keeps_completed_segments() {
    let backend = Recording {
        fail_from: Some(2),
        ..Default::default()
    };
    let failure = render(&short_config(), &backend, None).unwrap_err();
    assert!(matches!(
        failure.error,
        SessionError::GenerationFailed { index: 2, .. }
    ));
    assert!(failure.error.is_backend());
    assert_eq!(failure.manifest.segments.len(), 2);
    assert!(!failure.manifest.complete);
    assert!(failure.manifest.failure.is_some());
    assert_eq!(failure.manifest.output_digest, None);
}

#[test]
fn run_session_writes_wav_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("session.wav");
    let outcome = run_session(&short_config(), &StubBackend, None, &out).unwrap();
    assert_eq!(
        outcome.manifest_path,
        dir.path().join("session.manifest.json")
    );
    let audio = crate::dsp::wav::read_wav_file(&out).unwrap();
    assert_eq!(Some(audio.digest()), outcome.manifest.output_digest);
    let loaded = SessionManifest::load(&outcome.manifest_path).unwrap();
    assert_eq!(loaded, outcome.manifest);

    let failing = Recording {
        fail_from: Some(1),
        ..Default::default()
    };
    let out2 = dir.path().join("broken.wav");
    assert!(run_session(&short_config(), &failing, None, &out2).is_err());
    assert!(!out2.exists());
    let partial = SessionManifest::load(&manifest_path_for(&out2)).unwrap();
    assert_eq!(partial.segments.len(), 1);
    assert!(!partial.complete);
}
