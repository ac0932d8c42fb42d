//! Parsing strategies: the deterministic grammar and an optional LLM fallback.

use super::gateway::AgentGateway;
use super::parse::{parse_answer, ParseStatus};
use crate::bench::{MessagePart, Modality, ModalityBundle};
use crate::error::{Error, Result};
use crate::tasks::templates::{fill, task_template};
use crate::tasks::{Answer, TaskEnv};
use async_trait::async_trait;
use std::collections::BTreeMap;
use std::sync::Arc;

#[async_trait]
pub trait AnswerParser: Send + Sync {
    fn name(&self) -> &str;

    /// Status recorded when this parser succeeds.
    fn status(&self) -> ParseStatus;

    async fn parse(&self, env: &dyn TaskEnv, instance_id: &str, response: &str) -> Option<Answer>;
}

pub struct DeterministicParser;

#[async_trait]
impl AnswerParser for DeterministicParser {
    fn name(&self) -> &str {
        "deterministic"
    }

    fn status(&self) -> ParseStatus {
        ParseStatus::ParsedDeterministic
    }

    async fn parse(&self, env: &dyn TaskEnv, _instance_id: &str, response: &str) -> Option<Answer> {
        parse_answer(env, response)
    }
}

pub const DEFAULT_LLM_PARSER_PROMPT: &str = "\
Below is a reply to a puzzle. Extract its final answer and restate it without commentary.

{format}

If the reply gives no answer, write NONE outside any code block.

Reply:
{response}";

/// Asks a model to restate the answer, then applies the deterministic
/// grammar to what it returns.
pub struct LlmParser {
    gateway: Arc<dyn AgentGateway>,
    prompt: String,
    max_output_tokens: u32,
}

impl LlmParser {
    pub fn new(gateway: Arc<dyn AgentGateway>, prompt: Option<String>, max_output_tokens: u32) -> Self {
        Self {
            gateway,
            prompt: prompt.unwrap_or_else(|| DEFAULT_LLM_PARSER_PROMPT.to_string()),
            max_output_tokens,
        }
    }
}

#[async_trait]
impl AnswerParser for LlmParser {
    fn name(&self) -> &str {
        "llm"
    }

    fn status(&self) -> ParseStatus {
        ParseStatus::ParsedLlm
    }

    async fn parse(&self, env: &dyn TaskEnv, instance_id: &str, response: &str) -> Option<Answer> {
        let text = fill(
            &self.prompt,
            &[("format", &task_template(env.kind()).format), ("response", response)],
        );
        let bundle = ModalityBundle {
            instance_id: instance_id.to_string(),
            task: env.kind(),
            mode: Modality::Tqa,
            messages: vec![MessagePart::Text { text }],
        };
        let reply = self.gateway.send(&bundle, self.max_output_tokens).await.ok()?;
        parse_answer(env, &reply.text)
    }
}

/// Parsers tried in order until one succeeds.
pub struct ParserChain {
    parsers: Vec<Arc<dyn AnswerParser>>,
}

impl ParserChain {
    pub fn new(parsers: Vec<Arc<dyn AnswerParser>>) -> Self {
        Self { parsers }
    }

    pub fn deterministic() -> Self {
        Self::new(vec![Arc::new(DeterministicParser)])
    }

    pub fn names(&self) -> Vec<&str> {
        self.parsers.iter().map(|p| p.name()).collect()
    }

    pub async fn parse(&self, env: &dyn TaskEnv, instance_id: &str, response: &str) -> (ParseStatus, Option<Answer>) {
        for p in &self.parsers {
            if let Some(a) = p.parse(env, instance_id, response).await {
                return (p.status(), Some(a));
            }
        }
        (ParseStatus::Unparseable, None)
    }
}

impl Default for ParserChain {
    fn default() -> Self {
        Self::deterministic()
    }
}

type ParserFactory = Box<dyn Fn(Option<Arc<dyn AgentGateway>>) -> Result<Arc<dyn AnswerParser>> + Send + Sync>;

/// Parsers by name: `deterministic`, `llm` (needs a gateway).
pub struct ParserRegistry {
    factories: BTreeMap<String, ParserFactory>,
}

impl ParserRegistry {
    pub fn register<F>(&mut self, name: &str, f: F)
    where
        F: Fn(Option<Arc<dyn AgentGateway>>) -> Result<Arc<dyn AnswerParser>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(f));
    }

    pub fn build(&self, name: &str, gateway: Option<Arc<dyn AgentGateway>>) -> Result<Arc<dyn AnswerParser>> {
        let f = self
            .factories
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown parser `{name}`")))?;
        f(gateway)
    }

    /// Builds a chain from names, in order.
    pub fn chain(&self, names: &[String], gateway: Option<Arc<dyn AgentGateway>>) -> Result<ParserChain> {
        let parsers = names
            .iter()
            .map(|n| self.build(n, gateway.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ParserChain::new(parsers))
    }
}

impl Default for ParserRegistry {
    fn default() -> Self {
        let mut r = Self {
            factories: BTreeMap::new(),
        };
        r.register("deterministic", |_| Ok(Arc::new(DeterministicParser) as Arc<dyn AnswerParser>));
        r.register("llm", |gw| {
            let gw = gw.ok_or_else(|| Error::Config("the llm parser needs a gateway".into()))?;
            Ok(Arc::new(LlmParser::new(gw, None, 512)) as Arc<dyn AnswerParser>)
        });
        r
    }
}
