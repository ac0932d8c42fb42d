use super::instance::{build_instance, PuzzleInstance};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::tasks::templates::TEMPLATE_VERSION;
use crate::tasks::{TaskKind, TaskRegistry, Tier};
use crate::GENERATOR_VERSION;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.jsonl";
pub const METADATA: &str = "dataset.json";

/// Which instances a dataset holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetProfile {
    pub name: String,
    pub seed: u64,
    pub tasks: Vec<TaskKind>,
    /// Instances per tier, in easy, medium, hard order.
    pub per_tier: [usize; 3],
}

impl DatasetProfile {
    /// Every task, every tier, `count` instances each.
    pub fn standard(count: usize, seed: u64) -> Self {
        Self {
            name: "default".into(),
            seed,
            tasks: TaskKind::ALL.to_vec(),
            per_tier: [count; 3],
        }
    }

    /// Thirty questions per task, split evenly across tiers.
    pub fn human_baseline(seed: u64) -> Self {
        Self {
            name: "human-baseline".into(),
            seed,
            tasks: TaskKind::ALL.to_vec(),
            per_tier: [10, 10, 10],
        }
    }

    /// The stratified sample used for paired token comparisons.
    pub fn delta_token(seed: u64) -> Self {
        Self {
            name: "delta-token".into(),
            seed,
            tasks: TaskKind::ALL.to_vec(),
            per_tier: [100, 50, 50],
        }
    }

    pub fn count(&self, tier: Tier) -> usize {
        self.per_tier[tier as usize]
    }

    pub fn total(&self) -> usize {
        self.tasks.len() * self.per_tier.iter().sum::<usize>()
    }

    /// Per-instance seed.
    pub fn instance_seed(&self, task: TaskKind, tier: Tier, index: usize) -> u64 {
        derive_seed(self.seed, &[task.name(), tier.name(), &index.to_string()])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub generator_version: String,
    pub template_version: String,
    pub profile: DatasetProfile,
    /// Instance counts by task, then tier.
    pub counts: BTreeMap<TaskKind, BTreeMap<Tier, usize>>,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub instances: Vec<PuzzleInstance>,
    /// Rendered assets as (relative path, SVG text); empty after loading.
    pub assets: Vec<(String, String)>,
}

impl Dataset {
    pub fn get(&self, id: &str) -> Option<&PuzzleInstance> {
        self.instances.iter().find(|i| i.id == id)
    }
}

/// Checks that an instance is what its seed regenerates and that the stored
/// answer passes the environment's own grader.
pub fn validate_instance(registry: &TaskRegistry, instance: &PuzzleInstance) -> Result<()> {
    let env = registry.env(instance.task);
    let g = env.generate(instance.seed, instance.tier)?;
    if g.payload != instance.payload || g.ground_truth != instance.ground_truth || g.optimal_len != instance.optimal_len {
        return Err(Error::InvalidSolution(format!(
            "{} does not match what its seed regenerates",
            instance.id
        )));
    }
    if !env.grade(instance, &env.reference_answer(instance)) {
        return Err(Error::InvalidSolution(format!(
            "stored answer of {} does not grade as correct",
            instance.id
        )));
    }
    Ok(())
}

/// Generates every instance of a profile. Work is spread over threads; the
/// result order is fixed by (task, tier, index).
pub fn generate_dataset(registry: &TaskRegistry, profile: &DatasetProfile) -> Result<Dataset> {
    let mut jobs = Vec::new();
    for &task in &profile.tasks {
        for tier in Tier::ALL {
            for i in 0..profile.count(tier) {
                jobs.push((task, tier, profile.instance_seed(task, tier, i)));
            }
        }
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len().max(1));
    let mut results: Vec<Option<Result<_>>> = (0..jobs.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let jobs = &jobs;
                s.spawn(move || {
                    (w..jobs.len())
                        .step_by(workers)
                        .map(|k| {
                            let (task, tier, seed) = jobs[k];
                            (k, build_instance(registry.env(task), seed, tier))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("generation worker panicked") {
                results[k] = Some(r);
            }
        }
    });
    let mut instances = Vec::with_capacity(jobs.len());
    let mut assets = Vec::new();
    for r in results {
        let (inst, svgs) = r.expect("every job ran")?;
        for (path, a) in inst.renditions.images.iter().zip(svgs) {
            assets.push((path.clone(), a.svg));
        }
        instances.push(inst);
    }
    let mut counts: BTreeMap<TaskKind, BTreeMap<Tier, usize>> = BTreeMap::new();
    for i in &instances {
        *counts.entry(i.task).or_default().entry(i.tier).or_default() += 1;
    }
    Ok(Dataset {
        meta: DatasetMeta {
            generator_version: GENERATOR_VERSION.into(),
            template_version: TEMPLATE_VERSION.into(),
            profile: profile.clone(),
            counts,
            instances: instances.len(),
        },
        instances,
        assets,
    })
}

/// Serializes with keys in sorted order.
fn sorted_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(&serde_json::to_value(value)?)?)
}

/// Writes `manifest.jsonl`, `dataset.json` and `assets/` under `out_dir`.
/// Returns the manifest path.
pub fn emit_dataset(registry: &TaskRegistry, dataset: &Dataset, out_dir: &Path) -> Result<PathBuf> {
    let mut ids = HashSet::new();
    for inst in &dataset.instances {
        if !ids.insert(inst.id.as_str()) {
            return Err(Error::InvalidState(format!("duplicate instance id {}", inst.id)));
        }
        validate_instance(registry, inst)?;
    }
    fs::create_dir_all(out_dir)?;
    let manifest = out_dir.join(MANIFEST);
    let mut w = BufWriter::new(fs::File::create(&manifest)?);
    for inst in &dataset.instances {
        w.write_all(sorted_json(inst)?.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    let meta = serde_json::to_string_pretty(&serde_json::to_value(&dataset.meta)?)?;
    fs::write(out_dir.join(METADATA), meta + "\n")?;
    for (rel, svg) in &dataset.assets {
        let path = out_dir.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, svg)?;
    }
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Vec<PuzzleInstance>> {
    let r = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Reads a dataset directory written by [`emit_dataset`].
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let meta: DatasetMeta = serde_json::from_str(&fs::read_to_string(dir.join(METADATA))?)?;
    let instances = read_manifest(&dir.join(MANIFEST))?;
    Ok(Dataset {
        meta,
        instances,
        assets: Vec::new(),
    })
}
