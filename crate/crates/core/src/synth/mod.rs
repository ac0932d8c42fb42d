//! Training-data synthesis: imagery samples from random-walk simulation,
//! narrated trajectories from ground-truth solutions, overlap filtering
//! against a benchmark, and chat-format emission.

pub mod imagery;
pub mod overlap;
pub mod sft;
pub mod trajectory;

use crate::tasks::TaskKind;
use serde::{Deserialize, Serialize};

pub use imagery::{random_walk_samples, ImageryProfile};
pub use overlap::{benchmark_fingerprints, filter_overlap, filter_trajectories, Fingerprint, Fingerprinted};
pub use sft::{emit_sft, read_sft, SftRecord};
pub use trajectory::{pseudo_reasoning, TrajectoryProfile};

/// Predict-the-next-state training item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagerySample {
    pub task: TaskKind,
    pub seed: u64,
    /// Structured initial state, enough to re-simulate the actions.
    pub initial_state: serde_json::Value,
    /// Symbolic rendition of the initial state.
    pub initial: String,
    pub actions: Vec<String>,
    /// Symbolic rendition of the state after all actions.
    pub target: String,
    pub question: String,
    /// Teacher-written reasoning, when one has been distilled.
    pub rationale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarratedStep {
    pub action: String,
    /// Symbolic rendition after the action.
    pub state: String,
}

/// A full solution narrated as state, action, state, ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub instance_id: String,
    pub task: TaskKind,
    pub prompt: String,
    pub initial: String,
    pub steps: Vec<NarratedStep>,
    /// Fenced answer block closing the narration.
    pub final_answer: String,
}

impl TrajectorySample {
    pub fn narration(&self) -> String {
        let mut out = format!("Initial state:\n{}\n", self.initial);
        if self.steps.is_empty() {
            out.push_str("\nThe goal is already satisfied; no moves are needed.\n");
        }
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("\nStep {}: {}\n{}\n", i + 1, s.action, s.state));
        }
        out.push_str(&format!("\n{}", self.final_answer));
        out
    }
}

/// Wraps an answer in the fenced block every prompt asks for.
pub fn fenced(answer: &str) -> String {
    format!("```\n{answer}\n```")
}
