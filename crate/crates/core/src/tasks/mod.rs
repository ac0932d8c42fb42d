//! Task environments and the registry that selects them by name.

pub mod cube_roll;
pub mod klotski;
pub mod mental_rotation;
pub mod rubiks;
pub mod sokoban;
pub mod templates;

use crate::bench::instance::PuzzleInstance;
use crate::error::{Error, Result};
use crate::geometry::{CardinalDirection, Color, ColorGrid};
use crate::rng::Rng;
use crate::synth::{ImagerySample, TrajectorySample};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use templates::PromptTemplate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Easy,
    Medium,
    Hard,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Easy, Tier::Medium, Tier::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Tier::Easy => "easy",
            Tier::Medium => "medium",
            Tier::Hard => "hard",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tier::ALL
            .into_iter()
            .find(|t| t.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown tier `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    MentalRotation,
    CubeRolling,
    RubiksCube,
    MovingBox,
    WoodSlide,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::MentalRotation,
        TaskKind::CubeRolling,
        TaskKind::RubiksCube,
        TaskKind::MovingBox,
        TaskKind::WoodSlide,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::MentalRotation => "mental_rotation",
            TaskKind::CubeRolling => "cube_rolling",
            TaskKind::RubiksCube => "rubiks_cube",
            TaskKind::MovingBox => "moving_box",
            TaskKind::WoodSlide => "wood_slide",
        }
    }

    pub fn category(self) -> Category {
        match self {
            TaskKind::MentalRotation => Category::VisualCentric,
            TaskKind::CubeRolling | TaskKind::RubiksCube => Category::LinguisticCentric,
            TaskKind::MovingBox | TaskKind::WoodSlide => Category::Collaborative,
        }
    }

    /// Plan tasks are graded by replaying the answer in the simulator.
    pub fn is_plan_task(self) -> bool {
        matches!(self, TaskKind::MovingBox | TaskKind::WoodSlide)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        TaskKind::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    VisualCentric,
    LinguisticCentric,
    Collaborative,
}

/// A push-puzzle or slide-puzzle step named by its block letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LetterMove {
    pub letter: char,
    pub direction: CardinalDirection,
}

impl fmt::Display for LetterMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter, self.direction.screen_letter())
    }
}

/// A structured answer extracted from a response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Answer {
    Color(Color),
    Grid(ColorGrid),
    Moves(Vec<CardinalDirection>),
    Slides(Vec<LetterMove>),
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Color(c) => write!(f, "{c}"),
            Answer::Grid(g) => write!(f, "{g}"),
            Answer::Moves(ms) => {
                let s: Vec<String> = ms.iter().map(|m| m.screen_letter().to_string()).collect();
                f.write_str(&s.join(" "))
            }
            Answer::Slides(ms) => {
                let s: Vec<String> = ms.iter().map(ToString::to_string).collect();
                f.write_str(&s.join(" "))
            }
        }
    }
}

/// Task-specific ground truth stored with each instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    Color { color: Color },
    Grid { grid: ColorGrid },
    /// A validated solution in serialized move notation.
    Plan { solution: Vec<String> },
}

/// Task-specific state needed to pose, render and grade an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskPayload {
    CubeRolling(cube_roll::CubeRollPayload),
    RubiksCube(rubiks::RubiksPayload),
    MentalRotation(mental_rotation::MentalRotationPayload),
    MovingBox(sokoban::SokobanPayload),
    WoodSlide(klotski::KlotskiPayload),
}

/// What an environment's generator produces; the dataset layer adds ids and
/// renditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub complexity: f64,
    pub payload: TaskPayload,
    pub ground_truth: GroundTruth,
    pub optimal_len: Option<usize>,
}

/// Text fragments an environment contributes to prompts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptParts {
    /// Task rules and conventions.
    pub rules: String,
    /// Full symbolic description of the state.
    pub symbolic: String,
    /// Short description that leans on the image.
    pub terse: String,
    pub question: String,
    /// The answer mini-grammar.
    pub format: String,
}

/// A rendered asset; `suffix` is appended to the instance id to form the
/// file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvgAsset {
    pub suffix: String,
    pub svg: String,
}

/// One interchangeable task environment.
pub trait TaskEnv: Send + Sync {
    fn kind(&self) -> TaskKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    /// Deterministic in `(seed, tier)`.
    fn generate(&self, seed: u64, tier: Tier) -> Result<Generated>;

    fn prompt_parts(&self, payload: &TaskPayload) -> Result<PromptParts>;

    fn render_assets(&self, payload: &TaskPayload) -> Result<Vec<SvgAsset>>;

    /// Applies the task's answer grammar to an already isolated segment.
    fn parse_segment(&self, segment: &str) -> Option<Answer>;

    fn grade(&self, instance: &PuzzleInstance, answer: &Answer) -> bool;

    /// The answer implied by the stored ground truth.
    fn reference_answer(&self, instance: &PuzzleInstance) -> Answer;

    /// A uniformly drawn answer of the right shape.
    fn random_answer(&self, instance: &PuzzleInstance, rng: &mut Rng) -> Answer;

    /// Canonical initial state used for overlap fingerprints.
    fn canonical_state(&self, payload: &TaskPayload) -> String;

    /// The action sequence the instance is built around (scramble, rolls or
    /// solution), used for overlap fingerprints.
    fn canonical_actions(&self, instance: &PuzzleInstance) -> Vec<String>;

    /// A random initial state followed by `steps` uniformly chosen legal moves.
    fn random_walk(&self, rng: &mut Rng, steps: usize) -> Result<ImagerySample>;

    /// Re-simulates a sample and checks its target rendition.
    fn verify_imagery(&self, sample: &ImagerySample) -> Result<()>;

    /// Narrates a validated solution step by step.
    fn narrate(&self, instance: &PuzzleInstance, solution: &[String]) -> Result<TrajectorySample>;

    /// Re-simulates a trajectory and checks it ends at the instance's goal.
    fn verify_trajectory(&self, instance: &PuzzleInstance, sample: &TrajectorySample) -> Result<()>;
}

/// Task environments keyed by name.
pub struct TaskRegistry {
    entries: BTreeMap<&'static str, Box<dyn TaskEnv>>,
}

impl TaskRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, env: Box<dyn TaskEnv>) {
        self.entries.insert(env.name(), env);
    }

    pub fn get(&self, name: &str) -> Option<&dyn TaskEnv> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn env(&self, kind: TaskKind) -> &dyn TaskEnv {
        self.get(kind.name())
            .unwrap_or_else(|| panic!("task `{kind}` is not registered"))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn TaskEnv> {
        self.entries.values().map(|b| b.as_ref())
    }
}

impl Default for TaskRegistry {
    /// All five environments with default configuration.
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(cube_roll::CubeRollEnv::default()));
        r.register(Box::new(rubiks::RubiksEnv::default()));
        r.register(Box::new(mental_rotation::MentalRotationEnv::default()));
        r.register(Box::new(sokoban::SokobanEnv::default()));
        r.register(Box::new(klotski::KlotskiEnv::default()));
        r
    }
}

/// Closed `[lo, hi]` integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntBand {
    pub lo: usize,
    pub hi: usize,
}

impl IntBand {
    pub const fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Half-open `[lo, hi)` real range; `hi = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealBand {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl RealBand {
    pub const fn new(lo: f64, hi: Option<f64>) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && self.hi.is_none_or(|h| x < h)
    }
}

pub(crate) fn payload_mismatch(task: TaskKind) -> Error {
    Error::InvalidState(format!("payload does not belong to {task}"))
}
