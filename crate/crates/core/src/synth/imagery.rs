//! Stage-1 samples: random initial states, random legal moves, and the
//! resulting state as the target.

use super::ImagerySample;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};
use crate::tasks::{IntBand, TaskEnv, TaskKind, TaskRegistry};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Longest walk a sample may take.
pub const MAX_STEPS: usize = 8;

/// `count` samples with step counts drawn uniformly from `steps`. Each sample
/// has its own derived seed, so a sample does not depend on its neighbours.
pub fn random_walk_samples(env: &dyn TaskEnv, steps: IntBand, count: usize, seed: u64) -> Result<Vec<ImagerySample>> {
    if steps.lo < 1 || steps.hi > MAX_STEPS || steps.lo > steps.hi {
        return Err(Error::Config(format!(
            "step range [{}, {}] must lie within [1, {MAX_STEPS}]",
            steps.lo, steps.hi
        )));
    }
    (0..count)
        .map(|i| {
            let s = derive_seed(seed, &[env.name(), "imagery", &i.to_string()]);
            let mut rng = seeded(s);
            let n = rng.gen_range(steps.lo..=steps.hi);
            let mut sample = env.random_walk(&mut rng, n)?;
            sample.seed = s;
            Ok(sample)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageryProfile {
    pub seed: u64,
    pub tasks: Vec<TaskKind>,
    pub per_task: usize,
    pub steps: IntBand,
}

impl ImageryProfile {
    /// 4,000 samples for each of the five tasks.
    pub fn standard(seed: u64) -> Self {
        Self {
            seed,
            tasks: TaskKind::ALL.to_vec(),
            per_task: 4000,
            steps: IntBand::new(1, MAX_STEPS),
        }
    }

    pub fn total(&self) -> usize {
        self.tasks.len() * self.per_task
    }

    /// All samples, grouped by task in profile order. Tasks run on separate
    /// threads.
    pub fn generate(&self, registry: &TaskRegistry) -> Result<Vec<ImagerySample>> {
        let parts: Vec<Result<Vec<ImagerySample>>> = std::thread::scope(|s| {
            let handles: Vec<_> = self
                .tasks
                .iter()
                .map(|&t| s.spawn(move || random_walk_samples(registry.env(t), self.steps, self.per_task, self.seed)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("imagery worker panicked"))
                .collect()
        });
        let mut out = Vec::with_capacity(self.total());
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }
}
