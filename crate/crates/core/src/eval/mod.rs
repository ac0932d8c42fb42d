//! Evaluation: gateways produce responses, parsers turn them into answers,
//! environments grade them, and reports aggregate the records.

pub mod baseline;
pub mod gateway;
pub mod parse;
pub mod parser;
pub mod report;
pub mod runner;

pub use baseline::{baseline_frequency, baseline_random};
pub use gateway::{
    approx_tokens, AgentGateway, GatewayContext, GatewayRegistry, HttpGateway, HttpGatewayConfig, MockBehavior,
    MockGateway, ModelResponse,
};
pub use parse::{extract_segment, parse_answer, ParseStatus};
pub use parser::{AnswerParser, DeterministicParser, LlmParser, ParserChain, ParserRegistry};
pub use report::{aggregate, write_report, CellReport, DeltaReport, Report, Summary};
pub use runner::{run_eval, run_eval_modalities, EvalOptions, EvalRecord};
