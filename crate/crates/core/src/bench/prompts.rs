use super::instance::{tqa_text, vqa_text, PuzzleInstance};
use crate::error::{Error, Result};
use crate::tasks::templates::{fill, modality_templates};
use crate::tasks::{TaskKind, TaskRegistry};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modality {
    /// Symbolic text only.
    Tqa,
    /// Image plus a terse prompt.
    Vqa,
    /// Image plus the full symbolic prompt.
    Vtqa,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Tqa, Modality::Vqa, Modality::Vtqa];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Tqa => "TQA",
            Modality::Vqa => "VQA",
            Modality::Vtqa => "VTQA",
        }
    }

    /// Mental rotation is image-only: its symbolic description gives the
    /// answer away.
    pub fn supports(self, task: TaskKind) -> bool {
        task != TaskKind::MentalRotation || self == Modality::Vqa
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Modality::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown modality `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MessagePart {
    Text { text: String },
    /// Path relative to the dataset root.
    Image { path: String },
}

/// The ordered prompt parts sent to an agent for one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModalityBundle {
    pub instance_id: String,
    pub task: TaskKind,
    pub mode: Modality,
    pub messages: Vec<MessagePart>,
}

impl ModalityBundle {
    pub fn text(&self) -> String {
        self.messages
            .iter()
            .filter_map(|m| match m {
                MessagePart::Text { text } => Some(text.as_str()),
                MessagePart::Image { .. } => None,
            })
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    pub fn images(&self) -> impl Iterator<Item = &str> {
        self.messages.iter().filter_map(|m| match m {
            MessagePart::Image { path } => Some(path.as_str()),
            MessagePart::Text { .. } => None,
        })
    }
}

/// Builds the prompt for an instance under a modality from the frozen
/// templates. Images come first, then the text.
pub fn build_prompts(registry: &TaskRegistry, instance: &PuzzleInstance, mode: Modality) -> Result<ModalityBundle> {
    if !mode.supports(instance.task) {
        return Err(Error::UnsupportedModality {
            task: instance.task.name(),
            mode: mode.name(),
        });
    }
    let parts = registry.env(instance.task).prompt_parts(&instance.payload)?;
    let images = || {
        instance
            .renditions
            .images
            .iter()
            .map(|p| MessagePart::Image { path: p.clone() })
    };
    let messages: Vec<MessagePart> = match mode {
        Modality::Tqa => vec![MessagePart::Text { text: tqa_text(&parts) }],
        Modality::Vqa => images().chain([MessagePart::Text { text: vqa_text(&parts) }]).collect(),
        Modality::Vtqa => {
            let text = fill(&modality_templates().vtqa, &[("tqa", &tqa_text(&parts))]);
            images().chain([MessagePart::Text { text }]).collect()
        }
    };
    Ok(ModalityBundle {
        instance_id: instance.id.clone(),
        task: instance.task,
        mode,
        messages,
    })
}
