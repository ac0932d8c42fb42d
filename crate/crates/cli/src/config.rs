//! Run configuration: a TOML file whose sections mirror the subcommands.
//! Command-line flags override file values.

use crate::CliError;
use serde::{Deserialize, Serialize};
use spatial_bench::bench::Modality;
use spatial_bench::eval::{EvalOptions, HttpGatewayConfig};
use spatial_bench::tasks::{TaskKind, Tier};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gen: GenConfig,
    pub eval: EvalConfig,
    pub synth: SynthConfig,
    pub serve: ServeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub out: PathBuf,
    pub seed: u64,
    /// Task names, or `all`.
    pub tasks: Vec<String>,
    /// Tier names, or `all`.
    pub tiers: Vec<String>,
    /// Instances per selected tier.
    pub count: usize,
    /// `standard`, `human-baseline` or `delta-token`; the last two fix the
    /// counts.
    pub profile: String,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            out: "data/bench".into(),
            seed: 7,
            tasks: vec!["all".into()],
            tiers: vec!["all".into()],
            count: 50,
            profile: "standard".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub gateway: String,
    pub modalities: Vec<String>,
    pub parsers: Vec<String>,
    /// Seed for mock gateways.
    pub seed: u64,
    pub parallelism: usize,
    pub token_cap: u32,
    pub max_attempts: u32,
    pub backoff_ms: u64,
    pub http: Option<HttpGatewayConfig>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let o = EvalOptions::default();
        Self {
            dataset: "data/bench".into(),
            out: "runs/latest".into(),
            gateway: "mock:oracle".into(),
            modalities: Modality::ALL.iter().map(|m| m.name().to_string()).collect(),
            parsers: vec!["deterministic".into()],
            seed: 0,
            parallelism: o.parallelism,
            token_cap: o.token_cap,
            max_attempts: o.max_attempts,
            backoff_ms: o.backoff_ms,
            http: None,
        }
    }
}

impl EvalConfig {
    pub fn options(&self) -> EvalOptions {
        EvalOptions {
            parallelism: self.parallelism,
            token_cap: self.token_cap,
            max_attempts: self.max_attempts,
            backoff_ms: self.backoff_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub out: PathBuf,
    pub seed: u64,
    /// `1`, `2` or `all`.
    pub stage: String,
    pub stage1_per_task: usize,
    pub stage1_min_steps: usize,
    pub stage1_max_steps: usize,
    pub stage2_count: usize,
    /// Benchmark whose instances the samples must not overlap.
    pub benchmark: Option<PathBuf>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            out: "data/idf".into(),
            seed: 1,
            stage: "all".into(),
            stage1_per_task: 4000,
            stage1_min_steps: 1,
            stage1_max_steps: 8,
            stage2_count: 5000,
            benchmark: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub dataset: PathBuf,
    pub addr: String,
    /// Built web player, served at `/` when present.
    pub static_dir: Option<PathBuf>,
    pub session_log: PathBuf,
    pub time_limit_ms: u64,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            dataset: "data/bench".into(),
            addr: "127.0.0.1:8080".into(),
            static_dir: None,
            session_log: "sessions.jsonl".into(),
            time_limit_ms: 120_000,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Expands a list of names where `all` selects everything.
fn select<T: Copy + std::str::FromStr>(names: &[String], all: &[T], what: &str) -> Result<Vec<T>, CliError> {
    let mut out = Vec::new();
    for n in names.iter().flat_map(|n| n.split(',')).map(str::trim).filter(|n| !n.is_empty()) {
        if n.eq_ignore_ascii_case("all") {
            return Ok(all.to_vec());
        }
        out.push(n.parse().map_err(|_| CliError::Usage(format!("unknown {what} `{n}`")))?);
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!("no {what} selected")));
    }
    Ok(out)
}

pub fn select_tasks(names: &[String]) -> Result<Vec<TaskKind>, CliError> {
    select(names, &TaskKind::ALL, "task")
}

pub fn select_tiers(names: &[String]) -> Result<Vec<Tier>, CliError> {
    select(names, &Tier::ALL, "tier")
}

pub fn select_modalities(names: &[String]) -> Result<Vec<Modality>, CliError> {
    select(names, &Modality::ALL, "modality")
}
