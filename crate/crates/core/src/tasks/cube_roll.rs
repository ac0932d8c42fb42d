//! Cube rolling: a colored cube tips along a self-avoiding path on a board;
//! the question asks which color ends up facing a given world direction.

use super::templates::{fill, task_template};
use super::{
    payload_mismatch, Answer, Generated, GroundTruth, IntBand, PromptParts, RealBand, SvgAsset,
    TaskEnv, TaskKind, TaskPayload, Tier,
};
use crate::bench::instance::PuzzleInstance;
use crate::error::{Error, Result};
use crate::geometry::{CardinalDirection, Color, Dir3, Orientation};
use crate::render::Svg;
use crate::rng::{seeded, Rng};
use crate::synth::{fenced, ImagerySample, NarratedStep, TrajectorySample};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Color of each body face, named by the direction it points at the start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceColoring {
    pub up: Color,
    pub down: Color,
    pub north: Color,
    pub south: Color,
    pub east: Color,
    pub west: Color,
}

impl FaceColoring {
    pub fn from_array(c: [Color; 6]) -> Self {
        Self {
            up: c[0],
            down: c[1],
            north: c[2],
            south: c[3],
            east: c[4],
            west: c[5],
        }
    }

    pub fn to_array(self) -> [Color; 6] {
        [self.up, self.down, self.north, self.south, self.east, self.west]
    }

    pub fn get(&self, body: Dir3) -> Color {
        self.to_array()[body.index()]
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().collect::<BTreeSet<_>>().len() == 6
    }

    /// The usual die reference: white up, green north, red east.
    pub fn standard() -> Self {
        Self::from_array([Color::White, Color::Yellow, Color::Green, Color::Blue, Color::Red, Color::Orange])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Board {
    pub width: i32,
    pub height: i32,
}

impl Default for Board {
    fn default() -> Self {
        Self { width: 8, height: 8 }
    }
}

impl Board {
    pub fn contains(&self, [x, y]: [i32; 2]) -> bool {
        (0..self.width).contains(&x) && (0..self.height).contains(&y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingCubeState {
    pub orientation: Orientation,
    pub position: [i32; 2],
    pub coloring: FaceColoring,
    pub board: Board,
}

impl RollingCubeState {
    pub fn new(position: [i32; 2], coloring: FaceColoring, board: Board) -> Self {
        Self {
            orientation: Orientation::IDENTITY,
            position,
            coloring,
            board,
        }
    }

    /// Color of the face currently pointing in `world`.
    pub fn facing(&self, world: Dir3) -> Color {
        self.coloring.get(self.orientation.body_at(world))
    }

    pub fn roll(&self, d: CardinalDirection) -> Option<Self> {
        let (dx, dy) = d.delta();
        let next = [self.position[0] + dx, self.position[1] + dy];
        self.board.contains(next).then(|| Self {
            orientation: self.orientation.roll(d),
            position: next,
            ..*self
        })
    }

    pub fn legal_rolls(&self) -> Vec<CardinalDirection> {
        CardinalDirection::ALL
            .into_iter()
            .filter(|&d| self.roll(d).is_some())
            .collect()
    }

    pub fn describe(&self) -> String {
        let faces: Vec<String> = Dir3::ALL
            .iter()
            .map(|&d| format!("{d}={}", self.facing(d)))
            .collect();
        format!("position ({}, {}); {}", self.position[0], self.position[1], faces.join(", "))
    }
}

/// A start cell and a sequence of single-cell rolls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollPath {
    pub start: [i32; 2],
    pub moves: Vec<CardinalDirection>,
}

impl RollPath {
    /// Visited cells, including the start.
    pub fn cells(&self) -> Vec<[i32; 2]> {
        let mut at = self.start;
        let mut out = vec![at];
        for m in &self.moves {
            let (dx, dy) = m.delta();
            at = [at[0] + dx, at[1] + dy];
            out.push(at);
        }
        out
    }

    pub fn end(&self) -> [i32; 2] {
        *self.cells().last().expect("cells include the start")
    }

    pub fn is_self_avoiding(&self) -> bool {
        let cells = self.cells();
        cells.iter().collect::<BTreeSet<_>>().len() == cells.len()
    }

    pub fn fits(&self, board: &Board) -> bool {
        self.cells().iter().all(|&c| board.contains(c))
    }

    /// The path walked backwards: reversed moves, each inverted.
    pub fn reversed(&self) -> RollPath {
        RollPath {
            start: self.end(),
            moves: self.moves.iter().rev().map(|m| m.opposite()).collect(),
        }
    }

    pub fn letters(&self) -> String {
        move_letters(&self.moves)
    }
}

fn move_letters(moves: &[CardinalDirection]) -> String {
    moves
        .iter()
        .map(|m| m.compass_letter().to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_moves(actions: &[String]) -> Result<Vec<CardinalDirection>> {
    actions
        .iter()
        .map(|a| {
            let mut chars = a.chars();
            match (chars.next().and_then(CardinalDirection::from_compass_letter), chars.next()) {
                (Some(d), None) => Ok(d),
                _ => Err(Error::Parse(format!("bad roll `{a}`"))),
            }
        })
        .collect()
}

/// Rolls the cube along `path`, which must start at the cube's position.
pub fn apply_roll_sequence(state: &RollingCubeState, path: &RollPath) -> Result<RollingCubeState> {
    if path.start != state.position {
        return Err(Error::InvalidState(format!(
            "path starts at {:?} but the cube is at {:?}",
            path.start, state.position
        )));
    }
    let mut s = *state;
    for (step, &m) in path.moves.iter().enumerate() {
        s = s.roll(m).ok_or(Error::OutOfBounds { step })?;
    }
    Ok(s)
}

/// Fraction of consecutive move pairs that change direction.
pub fn tortuosity(moves: &[CardinalDirection]) -> Result<f64> {
    if moves.len() < 2 {
        return Err(Error::PathTooShort(moves.len()));
    }
    let turns = moves.windows(2).filter(|w| w[0] != w[1]).count();
    Ok(turns as f64 / (moves.len() - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathBand {
    pub length: IntBand,
    pub tortuosity: RealBand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRollConfig {
    pub board: Board,
    pub easy: PathBand,
    pub medium: PathBand,
    pub hard: PathBand,
    pub max_attempts: usize,
}

impl Default for CubeRollConfig {
    fn default() -> Self {
        Self {
            board: Board::default(),
            easy: PathBand {
                length: IntBand::new(4, 8),
                tortuosity: RealBand::new(0.0, Some(0.34)),
            },
            medium: PathBand {
                length: IntBand::new(8, 14),
                tortuosity: RealBand::new(0.34, Some(0.67)),
            },
            hard: PathBand {
                length: IntBand::new(14, 24),
                tortuosity: RealBand::new(0.5, None),
            },
            max_attempts: 20_000,
        }
    }
}

impl CubeRollConfig {
    pub fn band(&self, tier: Tier) -> PathBand {
        match tier {
            Tier::Easy => self.easy,
            Tier::Medium => self.medium,
            Tier::Hard => self.hard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRollPayload {
    pub board: Board,
    pub coloring: FaceColoring,
    pub path: RollPath,
    /// World direction whose face color is asked for.
    pub query: Dir3,
}

impl CubeRollPayload {
    pub fn initial_state(&self) -> RollingCubeState {
        RollingCubeState::new(self.path.start, self.coloring, self.board)
    }

    pub fn final_state(&self) -> Result<RollingCubeState> {
        apply_roll_sequence(&self.initial_state(), &self.path)
    }
}

/// Draws a self-avoiding path whose length and turn ratio fall in `band`.
fn sample_path(rng: &mut Rng, band: &PathBand, board: &Board) -> Option<RollPath> {
    let len = rng.gen_range(band.length.lo..=band.length.hi);
    let transitions = len - 1;
    let turn_counts: Vec<usize> = (0..=transitions)
        .filter(|&k| band.tortuosity.contains(k as f64 / transitions as f64))
        .collect();
    let &turns = turn_counts.choose(rng)?;
    let turn_at: BTreeSet<usize> = rand::seq::index::sample(rng, transitions, turns).into_iter().collect();
    let mut d = *CardinalDirection::ALL.choose(rng)?;
    let mut moves = vec![d];
    for i in 0..transitions {
        if turn_at.contains(&i) {
            d = if rng.gen_bool(0.5) { d.turn_left() } else { d.turn_right() };
        }
        moves.push(d);
    }
    let rel = RollPath { start: [0, 0], moves };
    if !rel.is_self_avoiding() {
        return None;
    }
    let cells = rel.cells();
    let (min_x, max_x) = (cells.iter().map(|c| c[0]).min()?, cells.iter().map(|c| c[0]).max()?);
    let (min_y, max_y) = (cells.iter().map(|c| c[1]).min()?, cells.iter().map(|c| c[1]).max()?);
    let slack_x = board.width - (max_x - min_x + 1);
    let slack_y = board.height - (max_y - min_y + 1);
    if slack_x < 0 || slack_y < 0 {
        return None;
    }
    let start = [
        rng.gen_range(0..=slack_x) - min_x,
        rng.gen_range(0..=slack_y) - min_y,
    ];
    Some(RollPath { start, moves: rel.moves })
}

#[derive(Debug, Clone, Default)]
pub struct CubeRollEnv {
    pub config: CubeRollConfig,
}

impl CubeRollEnv {
    pub fn new(config: CubeRollConfig) -> Self {
        Self { config }
    }

    pub fn generate_instance(&self, seed: u64, tier: Tier) -> Result<(CubeRollPayload, Color, f64)> {
        let mut rng = seeded(seed);
        let band = self.config.band(tier);
        for _ in 0..self.config.max_attempts {
            let Some(path) = sample_path(&mut rng, &band, &self.config.board) else {
                continue;
            };
            let mut colors = Color::CUBE;
            colors.shuffle(&mut rng);
            let query = Dir3::ALL[rng.gen_range(0..6)];
            let payload = CubeRollPayload {
                board: self.config.board,
                coloring: FaceColoring::from_array(colors),
                path,
                query,
            };
            let answer = payload.final_state()?.facing(query);
            let t = tortuosity(&payload.path.moves)?;
            return Ok((payload, answer, t));
        }
        Err(Error::GenerationBudgetExceeded {
            task: "cube_rolling",
            attempts: self.config.max_attempts,
        })
    }
}

fn payload(p: &TaskPayload) -> Result<&CubeRollPayload> {
    match p {
        TaskPayload::CubeRolling(c) => Ok(c),
        _ => Err(payload_mismatch(TaskKind::CubeRolling)),
    }
}

fn describe_setup(board: &Board, state: &RollingCubeState) -> String {
    let faces: Vec<String> = Dir3::ALL
        .iter()
        .map(|&d| format!("{d}={}", state.facing(d)))
        .collect();
    format!(
        "Board: {} columns (x = 0..{}, west to east) by {} rows (y = 0..{}, south to north).\n\
         Start cell: ({}, {}).\nFace colors at the start: {}.",
        board.width,
        board.width - 1,
        board.height,
        board.height - 1,
        state.position[0],
        state.position[1],
        faces.join(", ")
    )
}

const CELL_PX: f64 = 40.0;
const MARGIN: f64 = 20.0;

fn render_board(p: &CubeRollPayload) -> String {
    let w = p.board.width as f64 * CELL_PX;
    let h = p.board.height as f64 * CELL_PX;
    let mut svg = Svg::new(w + 2.0 * MARGIN + 200.0, h + 2.0 * MARGIN);
    let center = |c: [i32; 2]| {
        (
            MARGIN + (c[0] as f64 + 0.5) * CELL_PX,
            MARGIN + ((p.board.height - 1 - c[1]) as f64 + 0.5) * CELL_PX,
        )
    };
    for y in 0..p.board.height {
        for x in 0..p.board.width {
            let fill = if (x + y) % 2 == 0 { "#eeeeee" } else { "#dddddd" };
            svg.rect(
                MARGIN + x as f64 * CELL_PX,
                MARGIN + (p.board.height - 1 - y) as f64 * CELL_PX,
                CELL_PX,
                CELL_PX,
                fill,
                "#999999",
            );
        }
    }
    let pts: Vec<(f64, f64)> = p.path.cells().into_iter().map(center).collect();
    svg.polyline(&pts, "#333333", 4.0);
    let (sx, sy) = center(p.path.start);
    svg.circle(sx, sy, 9.0, "#2e7d32");
    let (ex, ey) = center(p.path.end());
    svg.circle(ex, ey, 9.0, "#c62828");
    svg.text(sx, sy - 12.0, 11.0, "start");
    svg.text(ex, ey - 12.0, 11.0, "end");
    // Cube net seen from above: up in the middle, side faces around it.
    let s = 40.0;
    let ox = w + 2.0 * MARGIN + 60.0;
    let oy = MARGIN + 60.0;
    let state = p.initial_state();
    let mut face = |dx: f64, dy: f64, d: Dir3| {
        svg.rect(ox + dx * s, oy + dy * s, s, s, state.facing(d).hex(), "#222222");
        svg.text(ox + (dx + 0.5) * s, oy + (dy + 0.6) * s, 10.0, d.name());
    };
    face(0.0, 0.0, Dir3::Up);
    face(0.0, -1.0, Dir3::North);
    face(0.0, 1.0, Dir3::South);
    face(-1.0, 0.0, Dir3::West);
    face(1.0, 0.0, Dir3::East);
    face(0.0, 2.5, Dir3::Down);
    svg.finish()
}

impl TaskEnv for CubeRollEnv {
    fn kind(&self) -> TaskKind {
        TaskKind::CubeRolling
    }

    fn generate(&self, seed: u64, tier: Tier) -> Result<Generated> {
        let (p, color, t) = self.generate_instance(seed, tier)?;
        Ok(Generated {
            complexity: t,
            payload: TaskPayload::CubeRolling(p),
            ground_truth: GroundTruth::Color { color },
            optimal_len: None,
        })
    }

    fn prompt_parts(&self, p: &TaskPayload) -> Result<PromptParts> {
        let p = payload(p)?;
        let t = task_template(TaskKind::CubeRolling);
        let query = p.query.name();
        let rolls = p.path.letters();
        let vars = [("query", query), ("rolls", rolls.as_str())];
        Ok(PromptParts {
            rules: fill(&t.rules, &vars),
            symbolic: format!("{}\nRolls: {}", describe_setup(&p.board, &p.initial_state()), rolls),
            terse: fill(&t.terse, &vars),
            question: fill(&t.question, &vars),
            format: fill(&t.format, &vars),
        })
    }

    fn render_assets(&self, p: &TaskPayload) -> Result<Vec<SvgAsset>> {
        Ok(vec![SvgAsset {
            suffix: "board".into(),
            svg: render_board(payload(p)?),
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
            other => panic!("cube rolling instance with ground truth {other:?}"),
        }
    }

    fn random_answer(&self, _instance: &PuzzleInstance, rng: &mut Rng) -> Answer {
        Answer::Color(Color::CUBE[rng.gen_range(0..6)])
    }

    fn canonical_state(&self, p: &TaskPayload) -> String {
        payload(p)
            .map(|p| describe_setup(&p.board, &p.initial_state()))
            .unwrap_or_default()
    }

    fn canonical_actions(&self, instance: &PuzzleInstance) -> Vec<String> {
        payload(&instance.payload)
            .map(|p| p.path.moves.iter().map(|m| m.compass_letter().to_string()).collect())
            .unwrap_or_default()
    }

    fn random_walk(&self, rng: &mut Rng, steps: usize) -> Result<ImagerySample> {
        let board = self.config.board;
        let mut colors = Color::CUBE;
        colors.shuffle(rng);
        let start = [rng.gen_range(0..board.width), rng.gen_range(0..board.height)];
        let initial = RollingCubeState::new(start, FaceColoring::from_array(colors), board);
        let mut s = initial;
        let mut moves = Vec::with_capacity(steps);
        for _ in 0..steps {
            let legal = s.legal_rolls();
            let &d = legal.choose(rng).expect("a board cell always has a neighbor");
            s = s.roll(d).expect("chosen roll is legal");
            moves.push(d);
        }
        let actions: Vec<String> = moves.iter().map(|m| m.compass_letter().to_string()).collect();
        Ok(ImagerySample {
            task: TaskKind::CubeRolling,
            seed: 0,
            initial_state: serde_json::to_value(initial)?,
            initial: describe_setup(&board, &initial),
            question: format!(
                "Roll the cube {} (N/S/E/W, one cell each). Where does it end and which color faces each direction?",
                move_letters(&moves)
            ),
            actions,
            target: s.describe(),
            rationale: None,
        })
    }

    fn verify_imagery(&self, sample: &ImagerySample) -> Result<()> {
        let initial: RollingCubeState = serde_json::from_value(sample.initial_state.clone())?;
        let moves = parse_moves(&sample.actions)?;
        let end = apply_roll_sequence(&initial, &RollPath { start: initial.position, moves })?;
        if end.describe() != sample.target {
            return Err(Error::InvalidSolution("target state does not match simulation".into()));
        }
        Ok(())
    }

    fn narrate(&self, instance: &PuzzleInstance, solution: &[String]) -> Result<TrajectorySample> {
        let p = payload(&instance.payload)?;
        let moves = parse_moves(solution)?;
        let mut s = p.initial_state();
        let mut steps = Vec::new();
        for (i, &m) in moves.iter().enumerate() {
            s = s.roll(m).ok_or(Error::OutOfBounds { step: i })?;
            steps.push(NarratedStep {
                action: format!("roll {}", m.name()),
                state: s.describe(),
            });
        }
        let answer = s.facing(p.query);
        if (GroundTruth::Color { color: answer }) != instance.ground_truth {
            return Err(Error::InvalidSolution("rolls do not reproduce the ground truth".into()));
        }
        Ok(TrajectorySample {
            instance_id: instance.id.clone(),
            task: TaskKind::CubeRolling,
            prompt: instance.renditions.detailed.clone(),
            initial: p.initial_state().describe(),
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
