//! Subcommand implementations. Each returns the lines it would print so
//! tests can inspect them.

use crate::config::{select_modalities, select_tasks, select_tiers, EvalConfig, GenConfig, SynthConfig};
use crate::CliError;
use spatial_bench::bench::{emit_dataset, generate_dataset, load_dataset, DatasetProfile, Modality};
use spatial_bench::eval::{
    aggregate, run_eval_modalities, write_report, GatewayContext, GatewayRegistry, ParserRegistry, Report,
};
use spatial_bench::synth::{
    benchmark_fingerprints, emit_sft, filter_overlap, filter_trajectories, Fingerprint, ImageryProfile, SftRecord,
    TrajectoryProfile,
};
use spatial_bench::tasks::{IntBand, TaskKind, TaskRegistry, Tier};
use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

/// Builds and writes a dataset; returns the manifest path.
pub fn gen(cfg: &GenConfig) -> Result<PathBuf, CliError> {
    let tasks = select_tasks(&cfg.tasks)?;
    let tiers = select_tiers(&cfg.tiers)?;
    let mut profile = match cfg.profile.as_str() {
        "standard" => DatasetProfile::standard(cfg.count, cfg.seed),
        "human-baseline" => DatasetProfile::human_baseline(cfg.seed),
        "delta-token" => DatasetProfile::delta_token(cfg.seed),
        other => return Err(CliError::Usage(format!("unknown profile `{other}`"))),
    };
    profile.tasks = tasks;
    for t in Tier::ALL {
        if !tiers.contains(&t) {
            profile.per_tier[t as usize] = 0;
        }
    }
    let registry = TaskRegistry::default();
    let dataset = generate_dataset(&registry, &profile)?;
    Ok(emit_dataset(&registry, &dataset, &cfg.out)?)
}

/// Evaluates a gateway over a dataset and writes the report under `cfg.out`.
pub async fn eval(cfg: &EvalConfig) -> Result<Report, CliError> {
    let modalities = select_modalities(&cfg.modalities)?;
    let dataset = load_dataset(&cfg.dataset)?;
    let registry = Arc::new(TaskRegistry::default());
    let ctx = GatewayContext {
        registry: registry.clone(),
        instances: Arc::new(dataset.instances.iter().map(|i| (i.id.clone(), i.clone())).collect::<HashMap<_, _>>()),
        seed: cfg.seed,
        http: cfg.http.clone(),
        asset_root: cfg.dataset.clone(),
    };
    let gateway = GatewayRegistry::default().build(&cfg.gateway, &ctx)?;
    let parsers = ParserRegistry::default().chain(&cfg.parsers, Some(gateway.clone()))?;
    let records =
        run_eval_modalities(gateway, &registry, &parsers, &dataset.instances, &modalities, &cfg.options()).await?;
    let report = aggregate(&records);
    write_report(&cfg.out, &records, &report)?;
    Ok(report)
}

/// One line per modality: pooled accuracy over all cells.
pub fn eval_summary(report: &Report) -> Vec<String> {
    Modality::ALL
        .iter()
        .filter_map(|&m| {
            let cells: Vec<_> = report.cells.iter().filter(|c| c.modality == m).collect();
            let n: usize = cells.iter().map(|c| c.n).sum();
            let correct: usize = cells.iter().map(|c| c.correct).sum();
            (n > 0).then(|| format!("{m}: {correct}/{n} correct ({:.2}%)", 100.0 * correct as f64 / n as f64))
        })
        .collect()
}

/// Counts for one synthesis stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub stage: u8,
    pub path: PathBuf,
    pub generated: usize,
    pub dropped: usize,
    pub written: usize,
}

impl std::fmt::Display for StageReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "stage {}: generated {}, dropped {} overlapping, wrote {} to {}",
            self.stage,
            self.generated,
            self.dropped,
            self.written,
            self.path.display()
        )
    }
}

/// Generates the selected stages, drops anything overlapping the benchmark
/// and writes chat-format JSONL.
pub fn synth(cfg: &SynthConfig) -> Result<Vec<StageReport>, CliError> {
    let stages: &[u8] = match cfg.stage.as_str() {
        "1" => &[1],
        "2" => &[2],
        "all" => &[1, 2],
        other => return Err(CliError::Usage(format!("unknown stage `{other}`"))),
    };
    let registry = TaskRegistry::default();
    let benchmark: HashSet<Fingerprint> = match &cfg.benchmark {
        Some(dir) => benchmark_fingerprints(&registry, &load_dataset(dir)?.instances),
        None => HashSet::new(),
    };
    std::fs::create_dir_all(&cfg.out)?;
    let mut out = Vec::new();
    for &stage in stages {
        let (records, generated): (Vec<SftRecord>, usize) = if stage == 1 {
            let profile = ImageryProfile {
                seed: cfg.seed,
                tasks: TaskKind::ALL.to_vec(),
                per_task: cfg.stage1_per_task,
                steps: IntBand::new(cfg.stage1_min_steps, cfg.stage1_max_steps),
            };
            let samples = profile.generate(&registry)?;
            let n = samples.len();
            let kept = filter_overlap(samples, &benchmark);
            (kept.iter().map(SftRecord::from_imagery).collect(), n)
        } else {
            let mut profile = TrajectoryProfile::standard(cfg.seed);
            profile.count = cfg.stage2_count;
            let samples = profile.generate(&registry)?;
            let n = samples.len();
            let kept = filter_trajectories(samples, &benchmark);
            (kept.iter().map(SftRecord::from_trajectory).collect(), n)
        };
        let path = cfg.out.join(format!("idf_stage{stage}.jsonl"));
        let written = emit_sft(&records, &path)?;
        out.push(StageReport {
            stage,
            path,
            generated,
            dropped: generated - records.len(),
            written,
        });
    }
    Ok(out)
}
