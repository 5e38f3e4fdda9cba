use serde::{Deserialize, Serialize};

use super::{SessionConfig, SessionError};
use crate::emotion::{plan_path, Emotion, IsoPath, MoodMapping};
use crate::prompt::{mood_for_emotion, render_prompt, sample_transition, PromptSpec};
use crate::tags::TagStats;

/// Smallest segment count whose untrimmed assembly reaches `target_s`:
/// `ceil((T − L) / (L·(1 − f))) + 1`.
pub fn segment_count(target_s: f64, clip_s: f64, fraction: f64) -> usize {
    let advance = clip_s * (1.0 - fraction);
    // the epsilon keeps exact multiples from rounding up
    let extra = ((target_s - clip_s) / advance - 1e-9).ceil().max(0.0);
    extra as usize + 1
}

/// Splits `segments` over `states` as evenly as possible, giving the
/// remainder to the earliest states.
pub fn allocate_segments(segments: usize, states: usize) -> Vec<usize> {
    assert!(states > 0 && segments >= states);
    let base = segments / states;
    let extra = segments % states;
    (0..states).map(|i| base + usize::from(i < extra)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSegment {
    pub index: usize,
    pub emotion: Emotion,
    pub prompt: PromptSpec,
    pub rendered: String,
    pub instrument_redrawn: bool,
    pub genre_redrawn: bool,
    pub empty_distribution: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionPlan {
    pub path: IsoPath,
    pub allocation: Vec<usize>,
    pub segments: Vec<PlannedSegment>,
}

impl SessionPlan {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Plans the path, the number of segments per path state, and every
/// segment's prompt. The first prompt uses the configured instrument and
/// genre; each later one is a transition from its predecessor.
///
/// When the path has more states than the duration allows segments, each
/// state still gets one segment and the session runs long.
pub fn plan_session(
    config: &SessionConfig,
    stats: &TagStats,
    mapping: &MoodMapping,
) -> Result<SessionPlan, SessionError> {
    config.validate()?;
    let path = plan_path(config.start_emotion, config.goal_emotion);
    let n = segment_count(
        config.target_duration_s,
        config.clip_duration_s,
        config.dsp.crossfade_fraction,
    )
    .max(path.len());
    let allocation = allocate_segments(n, path.len());
    let emotions: Vec<Emotion> = path
        .states
        .iter()
        .zip(&allocation)
        .flat_map(|(&e, &count)| std::iter::repeat_n(e, count))
        .collect();

    let policy = config.policy()?;
    let first = PromptSpec::new(
        mood_for_emotion(emotions[0], stats, mapping),
        emotions[0],
        config.initial_instrument.clone(),
        config.initial_genre.clone(),
    )?;
    let mut segments = vec![PlannedSegment {
        index: 0,
        emotion: emotions[0],
        rendered: render_prompt(&first),
        prompt: first,
        instrument_redrawn: false,
        genre_redrawn: false,
        empty_distribution: Vec::new(),
    }];
    for (index, &emotion) in emotions.iter().enumerate().skip(1) {
        let prev = &segments[index - 1].prompt;
        let t = sample_transition(prev, emotion, stats, mapping, &policy, index as u64);
        segments.push(PlannedSegment {
            index,
            emotion,
            rendered: render_prompt(&t.spec),
            prompt: t.spec,
            instrument_redrawn: t.instrument_redrawn,
            genre_redrawn: t.genre_redrawn,
            empty_distribution: t.empty_distribution,
        });
    }
    Ok(SessionPlan {
        path,
        allocation,
        segments,
    })
}
