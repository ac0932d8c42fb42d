//! Frozen prompt templates shipped as text assets.
//!
//! Placeholders are written `{name}` and filled by [`fill`]. Editing a
//! template changes generated bytes, so bump `TEMPLATE_VERSION` with it.

use super::TaskKind;
use serde::Deserialize;
use std::sync::OnceLock;

pub const TEMPLATE_VERSION: &str = "1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplate {
    pub rules: String,
    pub terse: String,
    pub question: String,
    pub format: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalityTemplates {
    pub tqa: String,
    pub vqa: String,
    pub vtqa: String,
}

fn parse<T: for<'de> Deserialize<'de>>(name: &str, text: &str) -> T {
    toml::from_str(text).unwrap_or_else(|e| panic!("bundled template {name} is malformed: {e}"))
}

pub fn task_template(kind: TaskKind) -> &'static PromptTemplate {
    static CELLS: [OnceLock<PromptTemplate>; 5] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let (i, text) = match kind {
        TaskKind::MentalRotation => (0, include_str!("../../templates/mental_rotation.toml")),
        TaskKind::CubeRolling => (1, include_str!("../../templates/cube_rolling.toml")),
        TaskKind::RubiksCube => (2, include_str!("../../templates/rubiks_cube.toml")),
        TaskKind::MovingBox => (3, include_str!("../../templates/moving_box.toml")),
        TaskKind::WoodSlide => (4, include_str!("../../templates/wood_slide.toml")),
    };
    CELLS[i].get_or_init(|| parse(kind.name(), text))
}

pub fn modality_templates() -> &'static ModalityTemplates {
    static CELL: OnceLock<ModalityTemplates> = OnceLock::new();
    CELL.get_or_init(|| parse("modalities", include_str!("../../templates/modalities.toml")))
}

/// Replaces each `{key}` with its value. Unknown placeholders are left as is.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.trim_end().to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_templates_parse() {
        for k in TaskKind::ALL {
            let t = task_template(k);
            assert!(!t.rules.is_empty() && !t.format.is_empty());
        }
        let m = modality_templates();
        assert!(m.vtqa.contains("{tqa}"));
    }

    #[test]
    fn fill_replaces_placeholders() {
        assert_eq!(fill("a {x} b {y}", &[("x", "1"), ("y", "2")]), "a 1 b 2");
    }
}
