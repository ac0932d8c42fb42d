//! Answer-producing agents behind one async interface.

use crate::bench::{MessagePart, ModalityBundle, PuzzleInstance};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};
use crate::synth::fenced;
use crate::tasks::TaskRegistry;
use async_trait::async_trait;
use base64::Engine;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Gateways hold no per-call state; a call depends only on its arguments.
#[async_trait]
pub trait AgentGateway: Send + Sync {
    fn name(&self) -> &str;

    async fn send(&self, bundle: &ModalityBundle, max_output_tokens: u32) -> Result<ModelResponse>;
}

/// Token estimate used by offline gateways.
pub fn approx_tokens(text: &str) -> u64 {
    text.chars().count().div_ceil(4) as u64
}

fn mock_response(bundle: &ModalityBundle, text: String) -> ModelResponse {
    ModelResponse {
        prompt_tokens: approx_tokens(&bundle.text()),
        completion_tokens: approx_tokens(&text),
        text,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockBehavior {
    /// Answers with the stored ground truth.
    Oracle,
    /// Answers uniformly at random, seeded per instance.
    Random,
    /// Replies with text that holds no answer.
    Garbage,
}

/// Offline gateway that looks instances up by id.
pub struct MockGateway {
    behavior: MockBehavior,
    seed: u64,
    registry: Arc<TaskRegistry>,
    instances: Arc<HashMap<String, PuzzleInstance>>,
}

impl MockGateway {
    pub fn new(
        behavior: MockBehavior,
        seed: u64,
        registry: Arc<TaskRegistry>,
        instances: Arc<HashMap<String, PuzzleInstance>>,
    ) -> Self {
        Self {
            behavior,
            seed,
            registry,
            instances,
        }
    }
}

#[async_trait]
impl AgentGateway for MockGateway {
    fn name(&self) -> &str {
        match self.behavior {
            MockBehavior::Oracle => "mock:oracle",
            MockBehavior::Random => "mock:random",
            MockBehavior::Garbage => "mock:garbage",
        }
    }

    async fn send(&self, bundle: &ModalityBundle, _max_output_tokens: u32) -> Result<ModelResponse> {
        if self.behavior == MockBehavior::Garbage {
            return Ok(mock_response(bundle, "I would rather not say.".into()));
        }
        let inst = self
            .instances
            .get(&bundle.instance_id)
            .ok_or_else(|| Error::Gateway(format!("unknown instance {}", bundle.instance_id)))?;
        let env = self.registry.env(inst.task);
        let answer = match self.behavior {
            MockBehavior::Oracle => env.reference_answer(inst),
            _ => {
                let mut rng = seeded(derive_seed(self.seed, &[&inst.id, bundle.mode.name()]));
                env.random_answer(inst, &mut rng)
            }
        };
        let text = format!("Working through the puzzle step by step.\n\n{}", fenced(&answer.to_string()));
        Ok(mock_response(bundle, text))
    }
}

/// Settings for an OpenAI-compatible chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpGatewayConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_key_env() -> String {
    "SPATIAL_BENCH_API_KEY".into()
}

fn default_timeout() -> u64 {
    600
}

pub struct HttpGateway {
    config: HttpGatewayConfig,
    api_key: String,
    /// Directory image paths in bundles are relative to.
    asset_root: PathBuf,
    client: reqwest::Client,
}

impl HttpGateway {
    /// Fails with a configuration error when the credential variable is unset.
    pub fn new(config: HttpGatewayConfig, asset_root: PathBuf) -> Result<Self> {
        let api_key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| Error::Config(format!("environment variable {} is not set", config.api_key_env)))?;
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::Gateway(e.to_string()))?;
        Ok(Self {
            config,
            api_key,
            asset_root,
            client,
        })
    }

    fn content(&self, bundle: &ModalityBundle) -> Result<Vec<serde_json::Value>> {
        bundle
            .messages
            .iter()
            .map(|m| match m {
                MessagePart::Text { text } => Ok(serde_json::json!({ "type": "text", "text": text })),
                MessagePart::Image { path } => {
                    let bytes = std::fs::read(self.asset_root.join(path))?;
                    let data = base64::engine::general_purpose::STANDARD.encode(bytes);
                    Ok(serde_json::json!({
                        "type": "image_url",
                        "image_url": { "url": format!("data:image/svg+xml;base64,{data}") }
                    }))
                }
            })
            .collect()
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<ChatUsage>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct ChatUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[async_trait]
impl AgentGateway for HttpGateway {
    fn name(&self) -> &str {
        "http"
    }

    async fn send(&self, bundle: &ModalityBundle, max_output_tokens: u32) -> Result<ModelResponse> {
        let body = serde_json::json!({
            "model": self.config.model,
            "max_tokens": max_output_tokens,
            "messages": [{ "role": "user", "content": self.content(bundle)? }],
        });
        let resp = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .await
            .map_err(|e| Error::Gateway(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let detail = resp.text().await.unwrap_or_default();
            return Err(Error::Gateway(format!("HTTP {status}: {detail}")));
        }
        let parsed: ChatResponse = resp.json().await.map_err(|e| Error::Gateway(e.to_string()))?;
        let text = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        let usage = parsed.usage.unwrap_or(ChatUsage {
            prompt_tokens: approx_tokens(&bundle.text()),
            completion_tokens: approx_tokens(&text),
        });
        Ok(ModelResponse {
            text,
            prompt_tokens: usage.prompt_tokens,
            completion_tokens: usage.completion_tokens,
        })
    }
}

/// Everything a gateway factory may need.
#[derive(Clone)]
pub struct GatewayContext {
    pub registry: Arc<TaskRegistry>,
    pub instances: Arc<HashMap<String, PuzzleInstance>>,
    pub seed: u64,
    pub http: Option<HttpGatewayConfig>,
    pub asset_root: PathBuf,
}

type GatewayFactory = Box<dyn Fn(&GatewayContext) -> Result<Arc<dyn AgentGateway>> + Send + Sync>;

/// Gateways by name: `mock:oracle`, `mock:random`, `mock:garbage`, `http`.
pub struct GatewayRegistry {
    factories: BTreeMap<String, GatewayFactory>,
}

impl GatewayRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&GatewayContext) -> Result<Arc<dyn AgentGateway>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, ctx: &GatewayContext) -> Result<Arc<dyn AgentGateway>> {
        let f = self
            .factories
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown gateway `{name}`")))?;
        f(ctx)
    }
}

impl Default for GatewayRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        for (name, b) in [
            ("mock:oracle", MockBehavior::Oracle),
            ("mock:random", MockBehavior::Random),
            ("mock:garbage", MockBehavior::Garbage),
        ] {
            r.register(name, move |ctx| {
                Ok(Arc::new(MockGateway::new(b, ctx.seed, ctx.registry.clone(), ctx.instances.clone())) as Arc<dyn AgentGateway>)
            });
        }
        r.register("http", |ctx| {
            let cfg = ctx
                .http
                .clone()
                .ok_or_else(|| Error::Config("the http gateway needs an endpoint and model".into()))?;
            Ok(Arc::new(HttpGateway::new(cfg, ctx.asset_root.clone())?) as Arc<dyn AgentGateway>)
        });
        r
    }
}
