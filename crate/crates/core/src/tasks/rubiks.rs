//! 3×3 Rubik's cube as a 54-sticker permutation machine.
//!
//! Canonical orientation: U white on top, F green toward the viewer, R red,
//! L orange, B blue, D yellow. Sticker `(face, row, col)` is stored at
//! `face * 9 + row * 3 + col` with faces in `U D L R F B` order and rows and
//! columns read while looking straight at the face: F, R, B, L with U on top;
//! U with F at the bottom of the view; D with F at the top.
//!
//! Move tables are derived once from sticker geometry: each sticker gets a
//! position in `{-1, 0, 1}³` plus an outward normal, and a clockwise quarter
//! turn rotates the layer by -90° about the face's outward axis.

use super::templates::{fill, task_template};
use super::{
    payload_mismatch, Answer, Generated, GroundTruth, IntBand, PromptParts, SvgAsset, TaskEnv,
    TaskKind, TaskPayload, Tier,
};
use crate::bench::instance::PuzzleInstance;
use crate::error::{Error, Result};
use crate::geometry::Color;
use crate::render::Svg;
use crate::rng::{seeded, Rng};
use crate::synth::{fenced, ImagerySample, NarratedStep, TrajectorySample};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Face {
    U,
    D,
    L,
    R,
    F,
    B,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::U, Face::D, Face::L, Face::R, Face::F, Face::B];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        ['U', 'D', 'L', 'R', 'F', 'B'][self.index()]
    }

    pub fn from_letter(c: char) -> Option<Face> {
        Face::ALL.into_iter().find(|f| f.letter() == c)
    }

    fn normal(self) -> V3 {
        match self {
            Face::U => [0, 1, 0],
            Face::D => [0, -1, 0],
            Face::L => [-1, 0, 0],
            Face::R => [1, 0, 0],
            Face::F => [0, 0, 1],
            Face::B => [0, 0, -1],
        }
    }

    /// `(right, down)` axes of the face as read by a viewer.
    fn frame(self) -> (V3, V3) {
        match self {
            Face::U => ([1, 0, 0], [0, 0, 1]),
            Face::D => ([1, 0, 0], [0, 0, -1]),
            Face::F => ([1, 0, 0], [0, -1, 0]),
            Face::B => ([-1, 0, 0], [0, -1, 0]),
            Face::R => ([0, 0, -1], [0, -1, 0]),
            Face::L => ([0, 0, 1], [0, -1, 0]),
        }
    }

    fn solved_color(self) -> Color {
        match self {
            Face::U => Color::White,
            Face::D => Color::Yellow,
            Face::L => Color::Orange,
            Face::R => Color::Red,
            Face::F => Color::Green,
            Face::B => Color::Blue,
        }
    }

    fn from_normal(n: V3) -> Face {
        Face::ALL
            .into_iter()
            .find(|f| f.normal() == n)
            .expect("normal is an axis direction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Turn {
    Clockwise,
    CounterClockwise,
    Half,
}

impl Turn {
    pub const ALL: [Turn; 3] = [Turn::Clockwise, Turn::CounterClockwise, Turn::Half];

    fn quarters(self) -> usize {
        match self {
            Turn::Clockwise => 1,
            Turn::Half => 2,
            Turn::CounterClockwise => 3,
        }
    }

    pub fn inverse(self) -> Turn {
        match self {
            Turn::Clockwise => Turn::CounterClockwise,
            Turn::CounterClockwise => Turn::Clockwise,
            Turn::Half => Turn::Half,
        }
    }
}

/// A face turn written in standard notation: `R`, `R'` or `R2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct FaceMove {
    pub face: Face,
    pub turn: Turn,
}

impl FaceMove {
    pub const fn new(face: Face, turn: Turn) -> Self {
        Self { face, turn }
    }

    pub fn inverse(self) -> Self {
        Self::new(self.face, self.turn.inverse())
    }

    /// All 18 moves.
    pub fn all() -> impl Iterator<Item = FaceMove> {
        Face::ALL
            .into_iter()
            .flat_map(|f| Turn::ALL.into_iter().map(move |t| FaceMove::new(f, t)))
    }
}

impl fmt::Display for FaceMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = match self.turn {
            Turn::Clockwise => "",
            Turn::CounterClockwise => "'",
            Turn::Half => "2",
        };
        write!(f, "{}{}", self.face.letter(), suffix)
    }
}

impl FromStr for FaceMove {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let mut chars = t.chars();
        let face = chars
            .next()
            .and_then(Face::from_letter)
            .ok_or_else(|| Error::Parse(format!("bad move `{t}`")))?;
        let rest: String = chars.collect();
        let turn = match rest.as_str() {
            "" => Turn::Clockwise,
            "'" | "’" | "i" => Turn::CounterClockwise,
            "2" | "2'" | "2’" => Turn::Half,
            _ => return Err(Error::Parse(format!("bad move `{t}`"))),
        };
        Ok(FaceMove::new(face, turn))
    }
}

impl From<FaceMove> for String {
    fn from(m: FaceMove) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for FaceMove {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

pub fn parse_sequence(s: &str) -> Result<Vec<FaceMove>> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

pub fn format_sequence(seq: &[FaceMove]) -> String {
    seq.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn inverse_sequence(seq: &[FaceMove]) -> Vec<FaceMove> {
    seq.iter().rev().map(|m| m.inverse()).collect()
}

type V3 = [i32; 3];

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: V3, b: V3) -> i32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sticker_geometry(index: usize) -> (V3, V3) {
    let face = Face::ALL[index / 9];
    let (row, col) = ((index % 9) / 3, index % 3);
    let n = face.normal();
    let (right, down) = face.frame();
    let (c, r) = (col as i32 - 1, row as i32 - 1);
    let pos = [0, 1, 2].map(|i| n[i] + c * right[i] + r * down[i]);
    (pos, n)
}

fn sticker_index(pos: V3, normal: V3) -> usize {
    let face = Face::from_normal(normal);
    let (right, down) = face.frame();
    let rel = [0, 1, 2].map(|i| pos[i] - normal[i]);
    let col = (dot(rel, right) + 1) as usize;
    let row = (dot(rel, down) + 1) as usize;
    face.index() * 9 + row * 3 + col
}

/// `perm[dest] = src`: after the move, sticker `dest` holds what was at `src`.
pub type StickerPermutation = [u8; 54];

fn quarter_turn_table(face: Face) -> StickerPermutation {
    let n = face.normal();
    let rotate = |v: V3| {
        let nxv = cross(n, v);
        let along = dot(n, v);
        [0, 1, 2].map(|i| n[i] * along - nxv[i])
    };
    let mut perm = [0u8; 54];
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i as u8;
    }
    for src in 0..54 {
        let (pos, nor) = sticker_geometry(src);
        if dot(pos, n) == 1 {
            let dest = sticker_index(rotate(pos), rotate(nor));
            perm[dest] = src as u8;
        }
    }
    perm
}

pub fn compose_permutations(first: &StickerPermutation, second: &StickerPermutation) -> StickerPermutation {
    let mut out = [0u8; 54];
    for (dest, o) in out.iter_mut().enumerate() {
        *o = first[second[dest] as usize];
    }
    out
}

/// Sticker permutation of a move.
pub fn move_permutation(m: FaceMove) -> &'static StickerPermutation {
    static TABLES: OnceLock<Vec<StickerPermutation>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        let mut out = Vec::with_capacity(18);
        for face in Face::ALL {
            let q = quarter_turn_table(face);
            let h = compose_permutations(&q, &q);
            let t = compose_permutations(&h, &q);
            out.extend([q, t, h]);
        }
        out
    });
    let turn = match m.turn {
        Turn::Clockwise => 0,
        Turn::CounterClockwise => 1,
        Turn::Half => 2,
    };
    debug_assert!(!m.turn.quarters().is_multiple_of(4));
    &tables[m.face.index() * 3 + turn]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CubeState {
    stickers: [Color; 54],
}

impl Default for CubeState {
    fn default() -> Self {
        Self::solved()
    }
}

impl CubeState {
    pub fn solved() -> Self {
        let mut stickers = [Color::White; 54];
        for (i, s) in stickers.iter_mut().enumerate() {
            *s = Face::ALL[i / 9].solved_color();
        }
        Self { stickers }
    }

    pub fn stickers(&self) -> &[Color; 54] {
        &self.stickers
    }

    /// Zero-based row and column.
    pub fn sticker(&self, face: Face, row: usize, col: usize) -> Color {
        self.stickers[face.index() * 9 + row * 3 + col]
    }

    pub fn center(&self, face: Face) -> Color {
        self.sticker(face, 1, 1)
    }

    pub fn is_solved(&self) -> bool {
        *self == Self::solved()
    }

    pub fn apply_move(&self, m: FaceMove) -> Self {
        let perm = move_permutation(m);
        let mut stickers = self.stickers;
        for (dest, s) in stickers.iter_mut().enumerate() {
            *s = self.stickers[perm[dest] as usize];
        }
        Self { stickers }
    }

    pub fn apply_sequence(&self, seq: &[FaceMove]) -> Self {
        seq.iter().fold(*self, |s, &m| s.apply_move(m))
    }

    pub fn color_counts(&self) -> [usize; 8] {
        let mut counts = [0; 8];
        for c in &self.stickers {
            counts[Color::ALL.iter().position(|x| x == c).unwrap()] += 1;
        }
        counts
    }

    /// 54 color codes, faces in `U D L R F B` order.
    pub fn code_string(&self) -> String {
        self.stickers.iter().map(|c| c.code()).collect()
    }

    pub fn from_code_string(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 54 {
            return Err(Error::Parse(format!("cube state needs 54 stickers, got {}", chars.len())));
        }
        let mut stickers = [Color::White; 54];
        for (slot, c) in stickers.iter_mut().zip(chars) {
            *slot = Color::from_code(c).ok_or_else(|| Error::Parse(format!("bad sticker `{c}`")))?;
        }
        Ok(Self { stickers })
    }

    /// One line per face, rows separated by `/`.
    pub fn describe(&self) -> String {
        Face::ALL
            .iter()
            .map(|&f| {
                let rows: Vec<String> = (0..3)
                    .map(|r| {
                        (0..3)
                            .map(|c| self.sticker(f, r, c).name())
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                format!("{}: {}", f.letter(), rows.join(" / "))
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Parities of the corner and edge cubie permutations, `true` for odd.
    pub fn cubie_parities(&self) -> (bool, bool) {
        let solved = Self::solved();
        let slots = cubie_slots();
        let parity_of = |group: &[Vec<usize>]| {
            let home: Vec<Vec<Color>> = group
                .iter()
                .map(|st| sorted_colors(&solved, st))
                .collect();
            let perm: Vec<usize> = group
                .iter()
                .map(|st| {
                    let key = sorted_colors(self, st);
                    home.iter().position(|h| *h == key).expect("cubie colors form a solved cubie")
                })
                .collect();
            permutation_is_odd(&perm)
        };
        (parity_of(&slots.0), parity_of(&slots.1))
    }
}

fn sorted_colors(state: &CubeState, stickers: &[usize]) -> Vec<Color> {
    let mut v: Vec<Color> = stickers.iter().map(|&i| state.stickers[i]).collect();
    v.sort();
    v
}

/// Sticker indices of each corner and each edge cubie.
fn cubie_slots() -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut corners = Vec::new();
    let mut edges = Vec::new();
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                let pos = [x, y, z];
                let stickers: Vec<usize> = (0..3)
                    .filter(|&i| pos[i] != 0)
                    .map(|i| {
                        let mut n = [0; 3];
                        n[i] = pos[i];
                        sticker_index(pos, n)
                    })
                    .collect();
                match stickers.len() {
                    3 => corners.push(stickers),
                    2 => edges.push(stickers),
                    _ => {}
                }
            }
        }
    }
    (corners, edges)
}

fn permutation_is_odd(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut transpositions = 0;
    for start in 0..perm.len() {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len > 0 {
            transpositions += len - 1;
        }
    }
    transpositions % 2 == 1
}

/// One-based sticker address used in prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StickerRef {
    pub face: Face,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubiksConfig {
    pub easy: IntBand,
    pub medium: IntBand,
    pub hard: IntBand,
}

impl Default for RubiksConfig {
    fn default() -> Self {
        Self {
            easy: IntBand::new(2, 5),
            medium: IntBand::new(6, 10),
            hard: IntBand::new(11, 18),
        }
    }
}

impl RubiksConfig {
    pub fn band(&self, tier: Tier) -> IntBand {
        match tier {
            Tier::Easy => self.easy,
            Tier::Medium => self.medium,
            Tier::Hard => self.hard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubiksPayload {
    pub scramble: Vec<FaceMove>,
    pub query: StickerRef,
    /// Full final state as 54 color codes, kept for diagnostics.
    pub final_state: String,
}

/// Random sequence with no two consecutive moves on the same face.
pub fn random_scramble(rng: &mut Rng, len: usize) -> Vec<FaceMove> {
    let mut seq: Vec<FaceMove> = Vec::with_capacity(len);
    while seq.len() < len {
        let face = Face::ALL[rng.gen_range(0..6)];
        if seq.last().is_some_and(|m| m.face == face) {
            continue;
        }
        seq.push(FaceMove::new(face, Turn::ALL[rng.gen_range(0..3)]));
    }
    seq
}

#[derive(Debug, Clone, Default)]
pub struct RubiksEnv {
    pub config: RubiksConfig,
}

impl RubiksEnv {
    pub fn generate_instance(&self, seed: u64, tier: Tier) -> (RubiksPayload, Color) {
        let mut rng = seeded(seed);
        let band = self.config.band(tier);
        let len = rng.gen_range(band.lo..=band.hi);
        let scramble = random_scramble(&mut rng, len);
        let state = CubeState::solved().apply_sequence(&scramble);
        // 48 non-center stickers.
        let k = rng.gen_range(0..48);
        let face = Face::ALL[k / 8];
        let cell = [0, 1, 2, 3, 5, 6, 7, 8][k % 8];
        let (row, col) = (cell / 3, cell % 3);
        let color = state.sticker(face, row, col);
        (
            RubiksPayload {
                scramble,
                query: StickerRef {
                    face,
                    row: row + 1,
                    col: col + 1,
                },
                final_state: state.code_string(),
            },
            color,
        )
    }
}

fn payload(p: &TaskPayload) -> Result<&RubiksPayload> {
    match p {
        TaskPayload::RubiksCube(r) => Ok(r),
        _ => Err(payload_mismatch(TaskKind::RubiksCube)),
    }
}

fn render_net(state: &CubeState) -> String {
    let s = 22.0;
    let margin = 16.0;
    let mut svg = Svg::new(12.0 * s + 2.0 * margin, 9.0 * s + 2.0 * margin + 16.0);
    // Net: U above F; L F R B across; D below F.
    let origins = [
        (Face::U, 3.0, 0.0),
        (Face::L, 0.0, 3.0),
        (Face::F, 3.0, 3.0),
        (Face::R, 6.0, 3.0),
        (Face::B, 9.0, 3.0),
        (Face::D, 3.0, 6.0),
    ];
    for (face, ox, oy) in origins {
        for r in 0..3 {
            for c in 0..3 {
                svg.rect(
                    margin + (ox + c as f64) * s,
                    margin + (oy + r as f64) * s,
                    s,
                    s,
                    state.sticker(face, r, c).hex(),
                    "#111111",
                );
            }
        }
        svg.text(
            margin + (ox + 1.5) * s,
            margin + (oy + 1.5) * s + 4.0,
            11.0,
            &face.letter().to_string(),
        );
    }
    svg.finish()
}

impl TaskEnv for RubiksEnv {
    fn kind(&self) -> TaskKind {
        TaskKind::RubiksCube
    }

    fn generate(&self, seed: u64, tier: Tier) -> Result<Generated> {
        let (p, color) = self.generate_instance(seed, tier);
        Ok(Generated {
            complexity: p.scramble.len() as f64,
            payload: TaskPayload::RubiksCube(p),
            ground_truth: GroundTruth::Color { color },
            optimal_len: None,
        })
    }

    fn prompt_parts(&self, p: &TaskPayload) -> Result<PromptParts> {
        let p = payload(p)?;
        let t = task_template(TaskKind::RubiksCube);
        let moves = format_sequence(&p.scramble);
        let face = p.query.face.letter().to_string();
        let (row, col) = (p.query.row.to_string(), p.query.col.to_string());
        let vars = [
            ("moves", moves.as_str()),
            ("face", face.as_str()),
            ("row", row.as_str()),
            ("col", col.as_str()),
        ];
        Ok(PromptParts {
            rules: fill(&t.rules, &vars),
            symbolic: format!(
                "Starting state (face: row 1 / row 2 / row 3):\n{}\nMoves: {}",
                CubeState::solved().describe(),
                moves
            ),
            terse: fill(&t.terse, &vars),
            question: fill(&t.question, &vars),
            format: fill(&t.format, &vars),
        })
    }

    fn render_assets(&self, p: &TaskPayload) -> Result<Vec<SvgAsset>> {
        payload(p)?;
        Ok(vec![SvgAsset {
            suffix: "cube".into(),
            svg: render_net(&CubeState::solved()),
        }])
    }

    fn parse_segment(&self, segment: &str) -> Option<Answer> {
        crate::eval::parse::parse_color(segment).map(Answer::Color)
    }

    fn grade(&self, instance: &PuzzleInstance, answer: &Answer) -> bool {
        match (&instance.ground_truth, answer) {
            (GroundTruth::Color { color }, Answer::Color(a)) => color == a,
            _ => false,
        }
    }

    fn reference_answer(&self, instance: &PuzzleInstance) -> Answer {
        match &instance.ground_truth {
            GroundTruth::Color { color } => Answer::Color(*color),
            other => panic!("rubik's instance with ground truth {other:?}"),
        }
    }

    fn random_answer(&self, _instance: &PuzzleInstance, rng: &mut Rng) -> Answer {
        Answer::Color(Color::CUBE[rng.gen_range(0..6)])
    }

    fn canonical_state(&self, p: &TaskPayload) -> String {
        payload(p)
            .map(|_| CubeState::solved().describe())
            .unwrap_or_default()
    }

    fn canonical_actions(&self, instance: &PuzzleInstance) -> Vec<String> {
        payload(&instance.payload)
            .map(|p| p.scramble.iter().map(ToString::to_string).collect())
            .unwrap_or_default()
    }

    fn random_walk(&self, rng: &mut Rng, steps: usize) -> Result<ImagerySample> {
        let pre = rng.gen_range(0..=10);
        let start = CubeState::solved().apply_sequence(&random_scramble(rng, pre));
        let all: Vec<FaceMove> = FaceMove::all().collect();
        let moves: Vec<FaceMove> = (0..steps).map(|_| all[rng.gen_range(0..all.len())]).collect();
        let end = start.apply_sequence(&moves);
        Ok(ImagerySample {
            task: TaskKind::RubiksCube,
            seed: 0,
            initial_state: serde_json::Value::String(start.code_string()),
            initial: start.describe(),
            question: format!(
                "Apply {} to the cube above. What are the colors on every face afterwards?",
                format_sequence(&moves)
            ),
            actions: moves.iter().map(ToString::to_string).collect(),
            target: end.describe(),
            rationale: None,
        })
    }

    fn verify_imagery(&self, sample: &ImagerySample) -> Result<()> {
        let code = sample
            .initial_state
            .as_str()
            .ok_or_else(|| Error::Parse("cube state must be a string".into()))?;
        let start = CubeState::from_code_string(code)?;
        let moves = sample
            .actions
            .iter()
            .map(|a| a.parse())
            .collect::<Result<Vec<FaceMove>>>()?;
        if start.apply_sequence(&moves).describe() != sample.target {
            return Err(Error::InvalidSolution("target state does not match simulation".into()));
        }
        Ok(())
    }

    fn narrate(&self, instance: &PuzzleInstance, solution: &[String]) -> Result<TrajectorySample> {
        let p = payload(&instance.payload)?;
        let moves = solution
            .iter()
            .map(|a| a.parse())
            .collect::<Result<Vec<FaceMove>>>()?;
        let mut s = CubeState::solved();
        let mut steps = Vec::new();
        for m in moves {
            s = s.apply_move(m);
            steps.push(NarratedStep {
                action: format!("turn {m}"),
                state: s.describe(),
            });
        }
        let answer = s.sticker(p.query.face, p.query.row - 1, p.query.col - 1);
        if (GroundTruth::Color { color: answer }) != instance.ground_truth {
            return Err(Error::InvalidSolution("moves do not reproduce the ground truth".into()));
        }
        Ok(TrajectorySample {
            instance_id: instance.id.clone(),
            task: TaskKind::RubiksCube,
            prompt: instance.renditions.detailed.clone(),
            initial: CubeState::solved().describe(),
            steps,
            final_answer: fenced(answer.name()),
        })
    }

    fn verify_trajectory(&self, instance: &PuzzleInstance, sample: &TrajectorySample) -> Result<()> {
        let regenerated = self.narrate(instance, &self.canonical_actions(instance))?;
        if &regenerated != sample {
            return Err(Error::InvalidSolution("narration does not replay".into()));
        }
        Ok(())
    }
}
