//! Stage-2 samples: narrated replays of validated solutions.

use super::TrajectorySample;
use crate::bench::{build_instance, PuzzleInstance};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::tasks::{GroundTruth, TaskKind, TaskRegistry, Tier};
use serde::{Deserialize, Serialize};

/// Narrates `solution` and checks the narration replays to the goal.
pub fn pseudo_reasoning(registry: &TaskRegistry, instance: &PuzzleInstance, solution: &[String]) -> Result<TrajectorySample> {
    let env = registry.env(instance.task);
    let sample = env.narrate(instance, solution)?;
    env.verify_trajectory(instance, &sample)?;
    Ok(sample)
}

/// The stored solution of a plan instance.
pub fn stored_solution(instance: &PuzzleInstance) -> Result<&[String]> {
    match &instance.ground_truth {
        GroundTruth::Plan { solution } => Ok(solution),
        _ => Err(Error::UnsupportedTask(instance.task.name())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryProfile {
    pub seed: u64,
    pub tasks: Vec<TaskKind>,
    pub count: usize,
    /// Relative share of each tier, easy to hard.
    pub tier_weights: [usize; 3],
}

impl TrajectoryProfile {
    /// 5,000 trajectories split over the plan tasks.
    pub fn standard(seed: u64) -> Self {
        Self {
            seed,
            tasks: vec![TaskKind::MovingBox, TaskKind::WoodSlide],
            count: 5000,
            tier_weights: [2, 1, 1],
        }
    }

    /// (task, tier, index) of every trajectory, deterministic and summing to
    /// `count`.
    pub fn plan(&self) -> Vec<(TaskKind, Tier, usize)> {
        let weight_sum: usize = self.tier_weights.iter().sum::<usize>().max(1);
        let slots = self.tasks.len() * weight_sum;
        (0..self.count)
            .map(|k| {
                let slot = k % slots;
                let task = self.tasks[slot / weight_sum];
                let mut w = slot % weight_sum;
                let mut tier = Tier::Easy;
                for (t, &tw) in Tier::ALL.iter().zip(&self.tier_weights) {
                    if w < tw {
                        tier = *t;
                        break;
                    }
                    w -= tw;
                }
                (task, tier, k)
            })
            .collect()
    }

    /// Generates fresh instances and narrates their solutions. Seeds are
    /// drawn from a separate stream from benchmark seeds.
    pub fn generate(&self, registry: &TaskRegistry) -> Result<Vec<TrajectorySample>> {
        for t in &self.tasks {
            if !t.is_plan_task() {
                return Err(Error::UnsupportedTask(t.name()));
            }
        }
        let jobs = self.plan();
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len().max(1));
        let mut out: Vec<Option<Result<TrajectorySample>>> = (0..jobs.len()).map(|_| None).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let jobs = &jobs;
                    s.spawn(move || {
                        (w..jobs.len())
                            .step_by(workers)
                            .map(|k| {
                                let (task, tier, i) = jobs[k];
                                let seed = derive_seed(self.seed, &[task.name(), "trajectory", &i.to_string()]);
                                let r = build_instance(registry.env(task), seed, tier)
                                    .and_then(|(inst, _)| pseudo_reasoning(registry, &inst, stored_solution(&inst)?));
                                (k, r)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (k, r) in h.join().expect("trajectory worker panicked") {
                    out[k] = Some(r);
                }
            }
        });
        out.into_iter().map(|r| r.expect("every job ran")).collect()
    }
}
