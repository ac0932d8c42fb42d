//! Overlap filtering between training samples and a benchmark.

use super::{ImagerySample, TrajectorySample};
use crate::bench::PuzzleInstance;
use crate::tasks::{TaskKind, TaskRegistry};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashSet;

/// Hash of task, canonical initial state and action sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fingerprint(pub String);

impl Fingerprint {
    pub fn new(task: TaskKind, state: &str, actions: &[String]) -> Self {
        let mut h = Sha256::new();
        for part in [task.name(), state.trim()] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        h.update((actions.len() as u64).to_le_bytes());
        for a in actions {
            h.update((a.len() as u64).to_le_bytes());
            h.update(a.as_bytes());
        }
        Fingerprint(hex::encode(h.finalize()))
    }
}

pub trait Fingerprinted {
    fn fingerprint(&self) -> Fingerprint;
}

impl Fingerprinted for ImagerySample {
    fn fingerprint(&self) -> Fingerprint {
        Fingerprint::new(self.task, &self.initial, &self.actions)
    }
}

impl Fingerprinted for TrajectorySample {
    fn fingerprint(&self) -> Fingerprint {
        let actions: Vec<String> = self.steps.iter().map(|s| s.action.clone()).collect();
        Fingerprint::new(self.task, &self.initial, &actions)
    }
}

/// Benchmark fingerprints. Each instance contributes its construction
/// sequence and, for trajectories, its bare initial state.
pub fn benchmark_fingerprints(registry: &TaskRegistry, instances: &[PuzzleInstance]) -> HashSet<Fingerprint> {
    let mut out = HashSet::new();
    for i in instances {
        let env = registry.env(i.task);
        let state = env.canonical_state(&i.payload);
        out.insert(Fingerprint::new(i.task, &state, &env.canonical_actions(i)));
        out.insert(instance_state_fingerprint(i.task, &state));
    }
    out
}

/// Marks a benchmark initial state; trajectories starting from it overlap
/// whatever moves they take.
fn instance_state_fingerprint(task: TaskKind, state: &str) -> Fingerprint {
    Fingerprint::new(task, state, &["*".to_string()])
}

/// Drops samples whose fingerprint is in `benchmark`. Idempotent.
pub fn filter_overlap<T: Fingerprinted>(samples: Vec<T>, benchmark: &HashSet<Fingerprint>) -> Vec<T> {
    samples
        .into_iter()
        .filter(|s| !benchmark.contains(&s.fingerprint()))
        .collect()
}

/// Stricter filter for trajectories: also drops any that start from a
/// benchmark initial state.
pub fn filter_trajectories(samples: Vec<TrajectorySample>, benchmark: &HashSet<Fingerprint>) -> Vec<TrajectorySample> {
    samples
        .into_iter()
        .filter(|s| {
            !benchmark.contains(&s.fingerprint()) && !benchmark.contains(&instance_state_fingerprint(s.task, &s.initial))
        })
        .collect()
}
