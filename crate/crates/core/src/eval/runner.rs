//! Bounded-parallel evaluation of a gateway over a set of instances.

use super::gateway::{AgentGateway, ModelResponse};
use super::parse::ParseStatus;
use super::parser::ParserChain;
use crate::bench::{build_prompts, Modality, PuzzleInstance};
use crate::error::{Error, Result};
use crate::tasks::{Answer, TaskKind, TaskRegistry, Tier};
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// One graded response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub instance_id: String,
    pub task: TaskKind,
    pub tier: Tier,
    pub modality: Modality,
    pub parse_status: ParseStatus,
    pub answer: Option<Answer>,
    /// Always false when the response was unparseable.
    pub correct: bool,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: u64,
    pub attempts: u32,
    /// Last gateway error when every attempt failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalOptions {
    /// Maximum requests in flight.
    pub parallelism: usize,
    /// Maximum output tokens per request.
    pub token_cap: u32,
    /// Attempts per instance, including the first.
    pub max_attempts: u32,
    /// Delay before the first retry; doubles after each failure.
    pub backoff_ms: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            parallelism: 8,
            token_cap: 32_768,
            max_attempts: 3,
            backoff_ms: 500,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<()> {
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        if self.token_cap == 0 {
            return Err(Error::Config("token cap must be at least 1".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::Config("at least one attempt is required".into()));
        }
        Ok(())
    }
}

async fn send_with_retry(
    gateway: &dyn AgentGateway,
    bundle: &crate::bench::ModalityBundle,
    opts: &EvalOptions,
) -> (std::result::Result<ModelResponse, String>, u32) {
    let mut delay = opts.backoff_ms;
    let mut last = String::new();
    for attempt in 1..=opts.max_attempts {
        match gateway.send(bundle, opts.token_cap).await {
            Ok(r) => return (Ok(r), attempt),
            Err(e) => last = e.to_string(),
        }
        if attempt < opts.max_attempts && delay > 0 {
            tokio::time::sleep(Duration::from_millis(delay)).await;
            delay = delay.saturating_mul(2);
        }
    }
    (Err(last), opts.max_attempts)
}

async fn eval_one(
    gateway: &dyn AgentGateway,
    registry: &TaskRegistry,
    parsers: &ParserChain,
    instance: &PuzzleInstance,
    modality: Modality,
    opts: &EvalOptions,
) -> Result<EvalRecord> {
    let bundle = build_prompts(registry, instance, modality)?;
    let env = registry.env(instance.task);
    let start = Instant::now();
    let (resp, attempts) = send_with_retry(gateway, &bundle, opts).await;
    let latency_ms = start.elapsed().as_millis() as u64;
    let mut rec = EvalRecord {
        instance_id: instance.id.clone(),
        task: instance.task,
        tier: instance.tier,
        modality,
        parse_status: ParseStatus::Unparseable,
        answer: None,
        correct: false,
        prompt_tokens: 0,
        completion_tokens: 0,
        latency_ms,
        attempts,
        error: None,
    };
    match resp {
        Ok(r) => {
            let (status, answer) = parsers.parse(env, &instance.id, &r.text).await;
            rec.parse_status = status;
            rec.correct = answer.as_ref().is_some_and(|a| env.grade(instance, a));
            rec.answer = answer;
            rec.prompt_tokens = r.prompt_tokens;
            rec.completion_tokens = r.completion_tokens;
        }
        Err(e) => rec.error = Some(e),
    }
    Ok(rec)
}

/// Evaluates every instance whose task offers `modality`; other instances
/// are skipped. Records come back in input order whatever the completion
/// order.
pub async fn run_eval(
    gateway: Arc<dyn AgentGateway>,
    registry: &TaskRegistry,
    parsers: &ParserChain,
    instances: &[PuzzleInstance],
    modality: Modality,
    opts: &EvalOptions,
) -> Result<Vec<EvalRecord>> {
    opts.validate()?;
    let jobs = instances.iter().enumerate().filter(|(_, i)| modality.supports(i.task));
    let mut done: Vec<(usize, Result<EvalRecord>)> = stream::iter(jobs)
        .map(|(k, inst)| {
            let gw = gateway.clone();
            async move { (k, eval_one(gw.as_ref(), registry, parsers, inst, modality, opts).await) }
        })
        .buffer_unordered(opts.parallelism)
        .collect()
        .await;
    done.sort_by_key(|(k, _)| *k);
    done.into_iter().map(|(_, r)| r).collect()
}

/// Runs each modality in turn and concatenates the records.
pub async fn run_eval_modalities(
    gateway: Arc<dyn AgentGateway>,
    registry: &TaskRegistry,
    parsers: &ParserChain,
    instances: &[PuzzleInstance],
    modalities: &[Modality],
    opts: &EvalOptions,
) -> Result<Vec<EvalRecord>> {
    let mut out = Vec::new();
    for &m in modalities {
        out.extend(run_eval(gateway.clone(), registry, parsers, instances, m, opts).await?);
    }
    Ok(out)
}
