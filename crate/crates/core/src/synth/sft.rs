//! Chat-format records for supervised fine-tuning.

use super::{fenced, ImagerySample, TrajectorySample};
use crate::error::Result;
use crate::eval::AgentGateway;
use crate::bench::{MessagePart, Modality, ModalityBundle};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub const SYSTEM_PROMPT: &str = "You are a careful spatial reasoner. Track the state after every action and give the final answer in a fenced code block.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub id: String,
    pub messages: Vec<ChatTurn>,
}

fn turn(role: &str, content: String) -> ChatTurn {
    ChatTurn {
        role: role.into(),
        content,
    }
}

impl SftRecord {
    pub fn from_imagery(s: &ImagerySample) -> Self {
        let user = format!("{}\n\nInitial state:\n{}", s.question, s.initial);
        let answer = fenced(&s.target);
        let assistant = match &s.rationale {
            Some(r) if !r.trim().is_empty() => format!("{}\n\n{answer}", r.trim()),
            _ => answer,
        };
        Self {
            id: format!("{}-{:016x}", s.task, s.seed),
            messages: vec![turn("system", SYSTEM_PROMPT.into()), turn("user", user), turn("assistant", assistant)],
        }
    }

    pub fn from_trajectory(s: &TrajectorySample) -> Self {
        Self {
            id: format!("{}-{}", s.task, s.instance_id),
            messages: vec![
                turn("system", SYSTEM_PROMPT.into()),
                turn("user", s.prompt.clone()),
                turn("assistant", s.narration()),
            ],
        }
    }
}

/// Writes one record per line and returns the count.
pub fn emit_sft(records: &[SftRecord], path: &Path) -> Result<usize> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    for r in records {
        w.write_all(serde_json::to_string(r)?.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(records.len())
}

pub fn read_sft(path: &Path) -> Result<Vec<SftRecord>> {
    let mut out = Vec::new();
    for line in BufReader::new(fs::File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Fills empty rationale slots from a teacher model. Failed requests leave
/// the slot empty.
pub async fn distill_rationales(gateway: &dyn AgentGateway, samples: &mut [ImagerySample], max_output_tokens: u32) {
    for s in samples.iter_mut().filter(|s| s.rationale.is_none()) {
        let bundle = ModalityBundle {
            instance_id: format!("{}-{:016x}", s.task, s.seed),
            task: s.task,
            mode: Modality::Tqa,
            messages: vec![MessagePart::Text {
                text: format!(
                    "{}\n\nInitial state:\n{}\n\nThe correct final state is:\n{}\n\nExplain step by step how the state evolves.",
                    s.question, s.initial, s.target
                ),
            }],
        };
        if let Ok(r) = gateway.send(&bundle, max_output_tokens).await {
            s.rationale = Some(r.text);
        }
    }
}
