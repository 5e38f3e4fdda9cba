use serde::{Deserialize, Serialize};

use super::{angular_ring, Emotion};

/// Ordered emotional states from the initial to the desired state, each
/// adjacent to the next on the angular ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoPath {
    pub states: Vec<Emotion>,
}

impl IsoPath {
    pub fn start(&self) -> Emotion {
        self.states[0]
    }

    pub fn goal(&self) -> Emotion {
        *self.states.last().expect("paths are never empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Walks the ring from `start` to `goal` in the direction with fewer
/// intermediate states. Equal arcs (only possible on even rings) go the
/// way whose midpoint has the higher valence.
pub fn plan_path(start: Emotion, goal: Emotion) -> IsoPath {
    let ring = angular_ring();
    let states = walk_ring(
        ring,
        start.ring_index(),
        goal.ring_index(),
        |e: &Emotion| e.valence(),
    );
    IsoPath { states }
}

pub(crate) fn walk_ring<T: Copy>(
    ring: &[T],
    start: usize,
    goal: usize,
    valence: impl Fn(&T) -> f64,
) -> Vec<T> {
    let n = ring.len();
    let ccw_steps = (goal + n - start) % n;
    let cw_steps = (start + n - goal) % n;
    let collect = |step: isize, steps: usize| -> Vec<T> {
        (0..=steps)
            .map(|k| ring[(start as isize + step * k as isize).rem_euclid(n as isize) as usize])
            .collect()
    };
    let ccw = collect(1, ccw_steps);
    if ccw_steps == cw_steps {
        let cw = collect(-1, cw_steps);
        if midpoint_valence(&cw, &valence) > midpoint_valence(&ccw, &valence) {
            return cw;
        }
        return ccw;
    }
    if ccw_steps < cw_steps {
        ccw
    } else {
        collect(-1, cw_steps)
    }
}

fn midpoint_valence<T>(states: &[T], valence: &impl Fn(&T) -> f64) -> f64 {
    let last = states.len() - 1;
    (valence(&states[last / 2]) + valence(&states[last.div_ceil(2)])) / 2.0
}
