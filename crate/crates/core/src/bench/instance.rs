use crate::error::Result;
use crate::rng::short_hash;
use crate::tasks::templates::{fill, modality_templates};
use crate::tasks::{Category, GroundTruth, PromptParts, SvgAsset, TaskEnv, TaskKind, TaskPayload, Tier};
use crate::GENERATOR_VERSION;
use serde::{Deserialize, Serialize};

/// Text and image forms of one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Renditions {
    /// Short prompt that leans on the images.
    pub terse: String,
    /// Symbolic description of the initial state.
    pub symbolic: String,
    /// Full text-only prompt: rules, symbolic state, question and format.
    pub detailed: String,
    /// Asset paths relative to the dataset root.
    pub images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuzzleInstance {
    pub id: String,
    pub task: TaskKind,
    pub category: Category,
    pub tier: Tier,
    pub complexity: f64,
    pub seed: u64,
    pub generator_version: String,
    pub renditions: Renditions,
    pub ground_truth: GroundTruth,
    /// Optimal solution length in moves, for plan tasks.
    pub optimal_len: Option<usize>,
    pub payload: TaskPayload,
}

/// Stable id from task, seed and generator version.
pub fn instance_id(task: TaskKind, seed: u64) -> String {
    short_hash(format!("{task}|{seed}|{GENERATOR_VERSION}").as_bytes(), 16)
}

pub fn asset_path(task: TaskKind, id: &str, suffix: &str) -> String {
    format!("assets/{task}/{id}_{suffix}.svg")
}

pub(crate) fn vqa_text(parts: &PromptParts) -> String {
    fill(
        &modality_templates().vqa,
        &[("terse", &parts.terse), ("question", &parts.question), ("format", &parts.format)],
    )
}

pub(crate) fn tqa_text(parts: &PromptParts) -> String {
    fill(
        &modality_templates().tqa,
        &[
            ("rules", &parts.rules),
            ("symbolic", &parts.symbolic),
            ("question", &parts.question),
            ("format", &parts.format),
        ],
    )
}

/// Generates one instance and its rendered assets.
pub fn build_instance(env: &dyn TaskEnv, seed: u64, tier: Tier) -> Result<(PuzzleInstance, Vec<SvgAsset>)> {
    let g = env.generate(seed, tier)?;
    let parts = env.prompt_parts(&g.payload)?;
    let assets = env.render_assets(&g.payload)?;
    let task = env.kind();
    let id = instance_id(task, seed);
    let images = assets.iter().map(|a| asset_path(task, &id, &a.suffix)).collect();
    let instance = PuzzleInstance {
        id,
        task,
        category: task.category(),
        tier,
        complexity: g.complexity,
        seed,
        generator_version: GENERATOR_VERSION.to_string(),
        renditions: Renditions {
            terse: vqa_text(&parts),
            symbolic: parts.symbolic.clone(),
            detailed: tqa_text(&parts),
            images,
        },
        ground_truth: g.ground_truth,
        optimal_len: g.optimal_len,
        payload: g.payload,
    };
    Ok((instance, assets))
}
