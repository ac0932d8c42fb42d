//! Moving Box (Sokoban): push mechanics, deadlock tests, an optimal solver and
//! solver-in-the-loop level generation.
//!
//! Levels are written one character per cell: `#` wall, `.` floor, `G` goal,
//! `B` box, `*` box on goal, `P` player, `+` player on goal. Moves use the
//! screen letters U, D, L, R (up is north).

use super::templates::{fill, task_template};
use super::{
    payload_mismatch, Answer, Generated, GroundTruth, IntBand, PromptParts, RealBand, SvgAsset,
    TaskEnv, TaskKind, TaskPayload, Tier,
};
use crate::bench::instance::PuzzleInstance;
use crate::error::{Error, Result};
use crate::geometry::CardinalDirection;
use crate::render::Svg;
use crate::rng::{seeded, Rng};
use crate::synth::{fenced, ImagerySample, NarratedStep, TrajectorySample};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

const DIRS: [CardinalDirection; 4] = CardinalDirection::ALL;

/// A level: static walls and goals plus the dynamic box and player cells.
///
/// Cells are indexed `row * cols + col` with row 0 at the top (north).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct SokobanLevel {
    rows: usize,
    cols: usize,
    walls: Vec<bool>,
    goals: Vec<bool>,
    /// Sorted.
    boxes: Vec<usize>,
    player: usize,
}

impl SokobanLevel {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn boxes(&self) -> &[usize] {
        &self.boxes
    }

    pub fn is_wall(&self, cell: usize) -> bool {
        self.walls[cell]
    }

    pub fn is_goal(&self, cell: usize) -> bool {
        self.goals[cell]
    }

    pub fn goals(&self) -> Vec<usize> {
        (0..self.walls.len()).filter(|&c| self.goals[c]).collect()
    }

    pub fn floor_cells(&self) -> Vec<usize> {
        (0..self.walls.len()).filter(|&c| !self.walls[c]).collect()
    }

    pub fn row_col(&self, cell: usize) -> (usize, usize) {
        (cell / self.cols, cell % self.cols)
    }

    fn step(&self, cell: usize, d: CardinalDirection) -> Option<usize> {
        let (r, c) = self.row_col(cell);
        let (dr, dc) = d.grid_delta();
        let (nr, nc) = (r as i32 + dr, c as i32 + dc);
        (nr >= 0 && nc >= 0 && (nr as usize) < self.rows && (nc as usize) < self.cols)
            .then(|| nr as usize * self.cols + nc as usize)
    }

    pub fn is_solved(&self) -> bool {
        self.boxes.iter().all(|&b| self.goals[b])
    }

    /// Moves the player one cell, pushing a box if one is in the way.
    pub fn apply_move(&self, d: CardinalDirection) -> Result<SokobanLevel> {
        let target = self
            .step(self.player, d)
            .filter(|&t| !self.walls[t])
            .ok_or_else(|| Error::IllegalMove(format!("{} walks into a wall", d.screen_letter())))?;
        let mut next = self.clone();
        if let Ok(pos) = self.boxes.binary_search(&target) {
            let beyond = self
                .step(target, d)
                .filter(|&b| !self.walls[b] && self.boxes.binary_search(&b).is_err())
                .ok_or_else(|| {
                    Error::IllegalMove(format!("{} pushes a box into an obstacle", d.screen_letter()))
                })?;
            next.boxes[pos] = beyond;
            next.boxes.sort_unstable();
        }
        next.player = target;
        Ok(next)
    }

    pub fn apply_moves(&self, moves: &[CardinalDirection]) -> Result<SokobanLevel> {
        moves.iter().try_fold(self.clone(), |s, &m| s.apply_move(m))
    }

    pub fn legal_moves(&self) -> Vec<CardinalDirection> {
        DIRS.into_iter().filter(|&d| self.apply_move(d).is_ok()).collect()
    }

    pub fn to_text(&self) -> String {
        self.lines().join("\n")
    }

    fn lines(&self) -> Vec<String> {
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| {
                        let i = r * self.cols + c;
                        let boxed = self.boxes.binary_search(&i).is_ok();
                        match (self.walls[i], self.goals[i], boxed, self.player == i) {
                            (true, ..) => '#',
                            (_, true, true, _) => '*',
                            (_, false, true, _) => 'B',
                            (_, true, _, true) => '+',
                            (_, false, _, true) => 'P',
                            (_, true, ..) => 'G',
                            _ => '.',
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidState(m.to_string()));
        if !(6..=7).contains(&self.rows) || !(6..=7).contains(&self.cols) {
            return bad("level must be 6 or 7 cells on each side");
        }
        for r in 0..self.rows {
            for c in 0..self.cols {
                let edge = r == 0 || c == 0 || r + 1 == self.rows || c + 1 == self.cols;
                if edge && !self.walls[r * self.cols + c] {
                    return bad("outer boundary must be wall");
                }
            }
        }
        if self.boxes.len() != self.goals().len() || self.boxes.is_empty() {
            return bad("box count must equal goal count");
        }
        if self.boxes.iter().any(|&b| self.walls[b]) || self.walls[self.player] {
            return bad("boxes and player must stand on floor");
        }
        if self.boxes.binary_search(&self.player).is_ok() {
            return bad("player stands on a box");
        }
        Ok(())
    }
}

impl fmt::Display for SokobanLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for SokobanLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lines: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        SokobanLevel::try_from(lines.iter().map(|l| l.to_string()).collect::<Vec<_>>())
    }
}

impl TryFrom<Vec<String>> for SokobanLevel {
    type Error = Error;

    fn try_from(lines: Vec<String>) -> Result<Self> {
        let rows = lines.len();
        let cols = lines.first().map_or(0, |l| l.chars().count());
        if lines.iter().any(|l| l.chars().count() != cols) {
            return Err(Error::Parse("ragged level".into()));
        }
        let mut walls = Vec::new();
        let mut goals = Vec::new();
        let mut boxes = Vec::new();
        let mut player = None;
        for (i, ch) in lines.iter().flat_map(|l| l.chars()).enumerate() {
            let (wall, goal, boxed, here) = match ch {
                '#' => (true, false, false, false),
                '.' | ' ' => (false, false, false, false),
                'G' => (false, true, false, false),
                'B' => (false, false, true, false),
                '*' => (false, true, true, false),
                'P' => (false, false, false, true),
                '+' => (false, true, false, true),
                other => return Err(Error::Parse(format!("bad level character `{other}`"))),
            };
            walls.push(wall);
            goals.push(goal);
            if boxed {
                boxes.push(i);
            }
            if here {
                if player.is_some() {
                    return Err(Error::Parse("more than one player".into()));
                }
                player = Some(i);
            }
        }
        let level = SokobanLevel {
            rows,
            cols,
            walls,
            goals,
            boxes,
            player: player.ok_or_else(|| Error::Parse("no player".into()))?,
        };
        level.validate()?;
        Ok(level)
    }
}

impl From<SokobanLevel> for Vec<String> {
    fn from(l: SokobanLevel) -> Self {
        l.lines()
    }
}

/// Static analysis shared by the deadlock test and the solver.
pub struct Analysis {
    /// Pushes needed to bring a box from each cell to its nearest goal,
    /// ignoring other boxes; `None` marks a dead square.
    pub push_distance: Vec<Option<u32>>,
}

impl Analysis {
    /// Reverse-pull breadth-first search from every goal.
    pub fn new(level: &SokobanLevel) -> Self {
        let n = level.walls.len();
        let mut dist = vec![None; n];
        let mut queue = VecDeque::new();
        for g in level.goals() {
            dist[g] = Some(0);
            queue.push_back(g);
        }
        while let Some(y) = queue.pop_front() {
            let d = dist[y].unwrap();
            for dir in DIRS {
                // A box at `x = y + dir` pushed against `dir` lands on `y`;
                // the player stands at `x + dir`.
                let Some(x) = level.step(y, dir) else { continue };
                let Some(p) = level.step(x, dir) else { continue };
                if level.walls[x] || level.walls[p] || dist[x].is_some() {
                    continue;
                }
                dist[x] = Some(d + 1);
                queue.push_back(x);
            }
        }
        Self { push_distance: dist }
    }

    pub fn is_dead_square(&self, level: &SokobanLevel, cell: usize) -> bool {
        !level.walls[cell] && self.push_distance[cell].is_none()
    }

    fn lower_bound(&self, boxes: &[usize]) -> Option<u32> {
        boxes.iter().map(|&b| self.push_distance[b]).sum()
    }
}

/// True if a 2×2 square made only of walls and boxes holds an off-goal box.
fn frozen_square(level: &SokobanLevel, boxes: &[usize]) -> bool {
    let blocked = |i: usize| level.walls[i] || boxes.binary_search(&i).is_ok();
    for r in 0..level.rows - 1 {
        for c in 0..level.cols - 1 {
            let cells = [
                r * level.cols + c,
                r * level.cols + c + 1,
                (r + 1) * level.cols + c,
                (r + 1) * level.cols + c + 1,
            ];
            if cells.iter().all(|&i| blocked(i))
                && cells
                    .iter()
                    .any(|&i| boxes.binary_search(&i).is_ok() && !level.goals[i])
            {
                return true;
            }
        }
    }
    false
}

fn deadlocked(level: &SokobanLevel, analysis: &Analysis, boxes: &[usize]) -> bool {
    boxes
        .iter()
        .any(|&b| !level.goals[b] && analysis.push_distance[b].is_none())
        || frozen_square(level, boxes)
}

/// Cheap sufficient test for an unsolvable position: an off-goal box on a
/// dead square, or a frozen 2×2 block.
pub fn is_simple_deadlock(level: &SokobanLevel) -> bool {
    deadlocked(level, &Analysis::new(level), &level.boxes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Vec<CardinalDirection>),
    Unsolvable,
    BudgetExceeded,
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&[CardinalDirection]> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

type Key = (u64, u8);

fn encode(boxes: &[usize], player: usize) -> Key {
    (boxes.iter().fold(0u64, |m, &b| m | 1 << b), player as u8)
}

fn decode(key: Key) -> (Vec<usize>, usize) {
    let boxes = (0..64).filter(|b| key.0 >> b & 1 == 1).collect();
    (boxes, key.1 as usize)
}

/// A* over exact (player, boxes) positions with unit cost per player move.
///
/// The heuristic (sum of push distances) is consistent, so the first time the
/// goal is popped its path is a shortest one. Positions with a simple
/// deadlock are pruned. `node_budget` caps expanded nodes.
pub fn solve(level: &SokobanLevel, node_budget: usize) -> SolveOutcome {
    let analysis = Analysis::new(level);
    if level.is_solved() {
        return SolveOutcome::Solved(Vec::new());
    }
    if deadlocked(level, &analysis, &level.boxes) {
        return SolveOutcome::Unsolvable;
    }
    let start = encode(&level.boxes, level.player);
    let mut best: HashMap<Key, u32> = HashMap::from([(start, 0)]);
    let mut parent: HashMap<Key, (Key, CardinalDirection)> = HashMap::new();
    let mut open = BinaryHeap::new();
    let h0 = analysis.lower_bound(&level.boxes).unwrap_or(0);
    open.push(Reverse((h0, 0u32, start)));
    let mut expanded = 0;
    while let Some(Reverse((_, g, key))) = open.pop() {
        if best.get(&key).is_some_and(|&b| b < g) {
            continue;
        }
        let (boxes, player) = decode(key);
        if boxes.iter().all(|&b| level.goals[b]) {
            let mut path = Vec::new();
            let mut k = key;
            while let Some(&(prev, d)) = parent.get(&k) {
                path.push(d);
                k = prev;
            }
            path.reverse();
            return SolveOutcome::Solved(path);
        }
        expanded += 1;
        if expanded > node_budget {
            return SolveOutcome::BudgetExceeded;
        }
        for d in DIRS {
            let Some(t) = level.step(player, d).filter(|&t| !level.walls[t]) else {
                continue;
            };
            let mut nb = boxes.clone();
            if let Ok(pos) = nb.binary_search(&t) {
                let Some(beyond) = level
                    .step(t, d)
                    .filter(|&b| !level.walls[b] && boxes.binary_search(&b).is_err())
                else {
                    continue;
                };
                nb[pos] = beyond;
                nb.sort_unstable();
                if deadlocked(level, &analysis, &nb) {
                    continue;
                }
            }
            let nk = encode(&nb, t);
            let ng = g + 1;
            if best.get(&nk).is_some_and(|&b| b <= ng) {
                continue;
            }
            let Some(h) = analysis.lower_bound(&nb) else { continue };
            best.insert(nk, ng);
            parent.insert(nk, (key, d));
            open.push(Reverse((ng + h, ng, nk)));
        }
    }
    SolveOutcome::Unsolvable
}

/// Sub-scores of [`difficulty_score`], each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyTerms {
    /// Non-goal floor cells with a wall on a vertical and a horizontal side,
    /// over floor cells.
    pub dead_corners: f64,
    /// Floor cells walled on two opposite sides, over floor cells.
    pub narrow_passages: f64,
    /// Interior walls over interior cells.
    pub obstacle_density: f64,
}

impl DifficultyTerms {
    pub fn of(level: &SokobanLevel) -> Self {
        let floor = level.floor_cells();
        let wall = |cell: usize, d: CardinalDirection| level.step(cell, d).is_none_or(|n| level.walls[n]);
        use CardinalDirection::*;
        let corners = floor
            .iter()
            .filter(|&&c| {
                !level.goals[c] && (wall(c, North) || wall(c, South)) && (wall(c, East) || wall(c, West))
            })
            .count();
        let narrow = floor
            .iter()
            .filter(|&&c| (wall(c, North) && wall(c, South)) || (wall(c, East) && wall(c, West)))
            .count();
        let interior_cells = (level.rows - 2) * (level.cols - 2);
        let interior_walls = (1..level.rows - 1)
            .flat_map(|r| (1..level.cols - 1).map(move |c| (r, c)))
            .filter(|&(r, c)| level.walls[r * level.cols + c])
            .count();
        let n = floor.len().max(1) as f64;
        Self {
            dead_corners: corners as f64 / n,
            narrow_passages: narrow as f64 / n,
            obstacle_density: interior_walls as f64 / interior_cells as f64,
        }
    }
}

/// Weighted sum of the three structural terms.
pub fn difficulty_score(level: &SokobanLevel, weights: [f64; 3]) -> f64 {
    let t = DifficultyTerms::of(level);
    weights[0] * t.dead_corners + weights[1] * t.narrow_passages + weights[2] * t.obstacle_density
}

pub const DEFAULT_WEIGHTS: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SokobanTier {
    pub size: usize,
    pub boxes: usize,
    pub interior_walls: IntBand,
    pub score: RealBand,
    /// Accepted optimal lengths in player moves.
    pub optimal: IntBand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SokobanConfig {
    pub easy: SokobanTier,
    pub medium: SokobanTier,
    pub hard: SokobanTier,
    pub weights: [f64; 3],
    pub node_budget: usize,
    pub max_attempts: usize,
}

impl Default for SokobanConfig {
    fn default() -> Self {
        Self {
            easy: SokobanTier {
                size: 6,
                boxes: 1,
                interior_walls: IntBand::new(0, 3),
                score: RealBand::new(0.0, Some(0.45)),
                optimal: IntBand::new(2, 12),
            },
            medium: SokobanTier {
                size: 6,
                boxes: 2,
                interior_walls: IntBand::new(1, 4),
                score: RealBand::new(0.05, Some(0.6)),
                optimal: IntBand::new(13, 30),
            },
            hard: SokobanTier {
                size: 7,
                boxes: 3,
                interior_walls: IntBand::new(2, 6),
                score: RealBand::new(0.1, None),
                optimal: IntBand::new(31, 90),
            },
            weights: DEFAULT_WEIGHTS,
            node_budget: 300_000,
            max_attempts: 2_000,
        }
    }
}

impl SokobanConfig {
    pub fn tier(&self, tier: Tier) -> &SokobanTier {
        match tier {
            Tier::Easy => &self.easy,
            Tier::Medium => &self.medium,
            Tier::Hard => &self.hard,
        }
    }
}

/// A generated level and its checked annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedLevel {
    pub level: SokobanLevel,
    pub solution: Vec<CardinalDirection>,
    pub score: f64,
}

fn random_room(rng: &mut Rng, size: usize, walls: usize) -> Option<(Vec<bool>, Vec<usize>)> {
    let mut wall = vec![false; size * size];
    for r in 0..size {
        for c in 0..size {
            if r == 0 || c == 0 || r + 1 == size || c + 1 == size {
                wall[r * size + c] = true;
            }
        }
    }
    let interior: Vec<usize> = (0..size * size).filter(|&i| !wall[i]).collect();
    let mut placed = 0;
    let mut tries = 0;
    while placed < walls && tries < 100 {
        tries += 1;
        let i = interior[rng.gen_range(0..interior.len())];
        if !wall[i] {
            wall[i] = true;
            placed += 1;
        }
    }
    let floor: Vec<usize> = (0..size * size).filter(|&i| !wall[i]).collect();
    // Floor must be one connected region.
    let mut seen = vec![false; size * size];
    let mut queue = VecDeque::from([floor[0]]);
    seen[floor[0]] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for n in [i - 1, i + 1, i - size, i + size] {
            if !wall[n] && !seen[n] {
                seen[n] = true;
                count += 1;
                queue.push_back(n);
            }
        }
    }
    (count == floor.len()).then_some((wall, floor))
}

/// Exact distances to the solved arrangement by breadth-first search over
/// pulls from it. A pull undoes a push and a plain step undoes a step, so the
/// depth of a state is its optimal forward solution length. Returns the
/// states whose depth lies in `band` as (box mask, player).
fn reverse_states(solved: &SokobanLevel, band: IntBand) -> Vec<(u64, usize)> {
    let goal_mask = solved.boxes.iter().fold(0u64, |m, &b| m | 1 << b);
    let mut depth: HashMap<(u64, usize), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for p in solved.floor_cells() {
        if goal_mask & 1 << p == 0 {
            depth.insert((goal_mask, p), 0);
            queue.push_back((goal_mask, p));
        }
    }
    let mut out = Vec::new();
    while let Some((boxes, player)) = queue.pop_front() {
        let d0 = depth[&(boxes, player)];
        if band.contains(d0) {
            out.push((boxes, player));
        }
        if d0 >= band.hi {
            continue;
        }
        for d in DIRS {
            let Some(t) = solved.step(player, d) else { continue };
            if solved.walls[t] || boxes & 1 << t != 0 {
                continue;
            }
            let mut next = vec![(boxes, t)];
            if let Some(b) = solved.step(player, d.opposite()) {
                if boxes & 1 << b != 0 {
                    next.push((boxes & !(1 << b) | 1 << player, t));
                }
            }
            for s in next {
                if let std::collections::hash_map::Entry::Vacant(e) = depth.entry(s) {
                    e.insert(d0 + 1);
                    queue.push_back(s);
                }
            }
        }
    }
    out
}

/// Builds a solved room, picks a start state at an optimal distance inside
/// the tier band by reverse search, then solves forward and keeps the level
/// only if the solver agrees and the structure score fits the tier.
pub fn generate_level(seed: u64, tier: Tier, config: &SokobanConfig) -> Result<GeneratedLevel> {
    let mut rng = seeded(seed);
    let t = config.tier(tier);
    for _ in 0..config.max_attempts {
        let n_walls = rng.gen_range(t.interior_walls.lo..=t.interior_walls.hi);
        let Some((walls, floor)) = random_room(&mut rng, t.size, n_walls) else {
            continue;
        };
        if floor.len() < t.boxes + 2 {
            continue;
        }
        let mut cells = floor.clone();
        let mut picks = Vec::new();
        for _ in 0..=t.boxes {
            picks.push(cells.swap_remove(rng.gen_range(0..cells.len())));
        }
        let player = picks.pop().unwrap();
        let mut goals = vec![false; walls.len()];
        for &g in &picks {
            goals[g] = true;
        }
        picks.sort_unstable();
        let solved = SokobanLevel {
            rows: t.size,
            cols: t.size,
            walls,
            goals,
            boxes: picks,
            player,
        };
        let score = difficulty_score(&solved, config.weights);
        if !t.score.contains(score) {
            continue;
        }
        let candidates = reverse_states(&solved, t.optimal);
        if candidates.is_empty() {
            continue;
        }
        let (mask, player) = candidates[rng.gen_range(0..candidates.len())];
        let level = SokobanLevel {
            boxes: (0..64).filter(|b| mask & 1 << b != 0).collect(),
            player,
            ..solved
        };
        let SolveOutcome::Solved(solution) = solve(&level, config.node_budget) else {
            continue;
        };
        if !t.optimal.contains(solution.len()) {
            continue;
        }
        return Ok(GeneratedLevel {
            level,
            solution,
            score,
        });
    }
    Err(Error::GenerationBudgetExceeded {
        task: "moving_box",
        attempts: config.max_attempts,
    })
}

pub fn format_moves(moves: &[CardinalDirection]) -> String {
    moves
        .iter()
        .map(|m| m.screen_letter().to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_moves(s: &str) -> Result<Vec<CardinalDirection>> {
    crate::eval::parse::parse_moves(s).ok_or_else(|| Error::Parse(format!("bad move list `{s}`")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SokobanPayload {
    pub level: SokobanLevel,
    pub difficulty: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SokobanEnv {
    pub config: SokobanConfig,
}

fn payload(p: &TaskPayload) -> Result<&SokobanPayload> {
    match p {
        TaskPayload::MovingBox(s) => Ok(s),
        _ => Err(payload_mismatch(TaskKind::MovingBox)),
    }
}

/// Replays a plan; `Ok(true)` when every box ends on a goal.
pub fn replay(level: &SokobanLevel, moves: &[CardinalDirection]) -> Result<bool> {
    Ok(level.apply_moves(moves)?.is_solved())
}

pub fn render_level(level: &SokobanLevel) -> String {
    let s = 36.0;
    let m = 12.0;
    let mut svg = Svg::new(level.cols as f64 * s + 2.0 * m, level.rows as f64 * s + 2.0 * m);
    for i in 0..level.walls.len() {
        let (r, c) = level.row_col(i);
        let (x, y) = (m + c as f64 * s, m + r as f64 * s);
        let fill = if level.walls[i] { "#4a4a4a" } else { "#ece6d6" };
        svg.rect(x, y, s, s, fill, "#9a9a9a");
        if level.goals[i] {
            svg.circle(x + s / 2.0, y + s / 2.0, s * 0.3, "#e06666");
        }
        if level.boxes.binary_search(&i).is_ok() {
            svg.rect(x + 5.0, y + 5.0, s - 10.0, s - 10.0, "#a0522d", "#5c2e0e");
        }
        if level.player == i {
            svg.circle(x + s / 2.0, y + s / 2.0, s * 0.28, "#1f5fd1");
        }
    }
    svg.finish()
}

impl TaskEnv for SokobanEnv {
    fn kind(&self) -> TaskKind {
        TaskKind::MovingBox
    }

    fn generate(&self, seed: u64, tier: Tier) -> Result<Generated> {
        let g = generate_level(seed, tier, &self.config)?;
        Ok(Generated {
            complexity: g.score,
            optimal_len: Some(g.solution.len()),
            ground_truth: GroundTruth::Plan {
                solution: g.solution.iter().map(|d| d.screen_letter().to_string()).collect(),
            },
            payload: TaskPayload::MovingBox(SokobanPayload {
                level: g.level,
                difficulty: g.score,
            }),
        })
    }

    fn prompt_parts(&self, p: &TaskPayload) -> Result<PromptParts> {
        let p = payload(p)?;
        let t = task_template(TaskKind::MovingBox);
        let vars: [(&str, &str); 0] = [];
        Ok(PromptParts {
            rules: fill(&t.rules, &vars),
            symbolic: format!(
                "Level ({} rows by {} columns, row 1 at the top):\n{}",
                p.level.rows,
                p.level.cols,
                p.level.to_text()
            ),
            terse: fill(&t.terse, &vars),
            question: fill(&t.question, &vars),
            format: fill(&t.format, &vars),
        })
    }

    fn render_assets(&self, p: &TaskPayload) -> Result<Vec<SvgAsset>> {
        Ok(vec![SvgAsset {
            suffix: "board".into(),
            svg: render_level(&payload(p)?.level),
        }])
    }

    fn parse_segment(&self, segment: &str) -> Option<Answer> {
        crate::eval::parse::parse_moves(segment).map(Answer::Moves)
    }

    fn grade(&self, instance: &PuzzleInstance, answer: &Answer) -> bool {
        let (Ok(p), Answer::Moves(moves)) = (payload(&instance.payload), answer) else {
            return false;
        };
        replay(&p.level, moves).unwrap_or(false)
    }

    fn reference_answer(&self, instance: &PuzzleInstance) -> Answer {
        Answer::Moves(
            parse_moves(&self.canonical_actions(instance).join(" ")).expect("stored solution parses"),
        )
    }

    fn random_answer(&self, instance: &PuzzleInstance, rng: &mut Rng) -> Answer {
        let n = instance.optimal_len.unwrap_or(8).max(1);
        Answer::Moves((0..n).map(|_| DIRS[rng.gen_range(0..4)]).collect())
    }

    fn canonical_state(&self, p: &TaskPayload) -> String {
        payload(p).map(|p| p.level.to_text()).unwrap_or_default()
    }

    fn canonical_actions(&self, instance: &PuzzleInstance) -> Vec<String> {
        match &instance.ground_truth {
            GroundTruth::Plan { solution } => solution.clone(),
            _ => Vec::new(),
        }
    }

    fn random_walk(&self, rng: &mut Rng, steps: usize) -> Result<ImagerySample> {
        let seed = rng.gen();
        let tier = Tier::ALL[rng.gen_range(0..2)];
        let start = generate_level(seed, tier, &self.config)?.level;
        let mut cur = start.clone();
        let mut moves = Vec::new();
        for _ in 0..steps {
            let legal = cur.legal_moves();
            if legal.is_empty() {
                break;
            }
            let d = legal[rng.gen_range(0..legal.len())];
            cur = cur.apply_move(d)?;
            moves.push(d);
        }
        Ok(ImagerySample {
            task: TaskKind::MovingBox,
            seed,
            initial_state: serde_json::to_value(&start)?,
            initial: start.to_text(),
            question: format!(
                "The player makes the moves {}. Draw the level afterwards.",
                format_moves(&moves)
            ),
            actions: moves.iter().map(|d| d.screen_letter().to_string()).collect(),
            target: cur.to_text(),
            rationale: None,
        })
    }

    fn verify_imagery(&self, sample: &ImagerySample) -> Result<()> {
        let start: SokobanLevel = serde_json::from_value(sample.initial_state.clone())?;
        let end = start.apply_moves(&parse_moves(&sample.actions.join(" ")).or_else(|e| {
            if sample.actions.is_empty() {
                Ok(Vec::new())
            } else {
                Err(e)
            }
        })?)?;
        if end.to_text() != sample.target {
            return Err(Error::InvalidSolution("target level does not match".into()));
        }
        Ok(())
    }

    fn narrate(&self, instance: &PuzzleInstance, solution: &[String]) -> Result<TrajectorySample> {
        let p = payload(&instance.payload)?;
        let moves = if solution.is_empty() {
            Vec::new()
        } else {
            parse_moves(&solution.join(" "))?
        };
        let mut cur = p.level.clone();
        let mut steps = Vec::new();
        for d in &moves {
            cur = cur
                .apply_move(*d)
                .map_err(|e| Error::InvalidSolution(e.to_string()))?;
            steps.push(NarratedStep {
                action: format!("move {}", d.screen_letter()),
                state: cur.to_text(),
            });
        }
        if !cur.is_solved() {
            return Err(Error::InvalidSolution("plan does not put every box on a goal".into()));
        }
        Ok(TrajectorySample {
            instance_id: instance.id.clone(),
            task: TaskKind::MovingBox,
            prompt: instance.renditions.detailed.clone(),
            initial: p.level.to_text(),
            steps,
            final_answer: fenced(&format_moves(&moves)),
        })
    }

    fn verify_trajectory(&self, instance: &PuzzleInstance, sample: &TrajectorySample) -> Result<()> {
        let p = payload(&instance.payload)?;
        let mut cur = p.level.clone();
        for s in &sample.steps {
            let letter = s.action.trim_start_matches("move ").trim();
            cur = cur
                .apply_move(parse_moves(letter)?[0])
                .map_err(|e| Error::InvalidSolution(e.to_string()))?;
            if cur.to_text() != s.state {
                return Err(Error::InvalidSolution("narrated state does not match".into()));
            }
        }
        if !cur.is_solved() {
            return Err(Error::InvalidSolution("narration does not end solved".into()));
        }
        Ok(())
    }
}

/// Plain breadth-first search over (player, boxes) without pruning; the
/// reference the solver is checked against.
pub fn brute_force_optimal_len(level: &SokobanLevel, max_states: usize) -> Option<usize> {
    let start = encode(&level.boxes, level.player);
    let mut seen: HashSet<Key> = HashSet::from([start]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((key, d)) = queue.pop_front() {
        let (boxes, player) = decode(key);
        if boxes.iter().all(|&b| level.goals[b]) {
            return Some(d);
        }
        let here = SokobanLevel {
            boxes,
            player,
            ..level.clone()
        };
        for dir in DIRS {
            if let Ok(next) = here.apply_move(dir) {
                let k = encode(&next.boxes, next.player);
                if seen.insert(k) {
                    if seen.len() > max_states {
                        return None;
                    }
                    queue.push_back((k, d + 1));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use CardinalDirection::*;

    fn level(s: &str) -> SokobanLevel {
        s.parse().unwrap()
    }

    const ONE_PUSH: &str = "######\n#....#\n#PBG.#\n#....#\n#....#\n######";

    #[test]
    fn one_push_solves() {
        let l = level(ONE_PUSH);
        assert!(l.apply_move(East).unwrap().is_solved());
        assert_eq!(solve(&l, 1000), SolveOutcome::Solved(vec![East]));
        assert_eq!(brute_force_optimal_len(&l, 10_000), Some(1));
    }

    #[test]
    fn solved_level_needs_no_moves() {
        let l = level("######\n#....#\n#P*..#\n#....#\n#....#\n######");
        assert_eq!(solve(&l, 10), SolveOutcome::Solved(vec![]));
        assert!(!is_simple_deadlock(&l));
    }

    #[test]
    fn illegal_moves() {
        let l = level(ONE_PUSH);
        assert!(matches!(l.apply_move(West), Err(Error::IllegalMove(_))));
        let blocked = level("######\n#....#\n#PB#.#\n#..G.#\n#....#\n######");
        assert!(matches!(blocked.apply_move(East), Err(Error::IllegalMove(_))));
        let two = level("######\n#...G#\n#PBBG#\n#....#\n#....#\n######");
        assert!(matches!(two.apply_move(East), Err(Error::IllegalMove(_))));
    }

    #[test]
    fn corner_box_is_deadlocked() {
        let l = level("######\n#B...#\n#..P.#\n#..G.#\n#....#\n######");
        assert!(is_simple_deadlock(&l));
        assert_eq!(solve(&l, 10_000), SolveOutcome::Unsolvable);
    }

    #[test]
    fn text_round_trip() {
        let s = "######\n#+..B#\n#.*..#\n#.#..#\n#....#\n######";
        let l = level(s);
        assert_eq!(l.to_text().replace('\n', ""), s.replace('\n', ""));
        let json = serde_json::to_string(&l).unwrap();
        assert_eq!(serde_json::from_str::<SokobanLevel>(&json).unwrap(), l);
        assert!("#####\n#P*.#\n#####".parse::<SokobanLevel>().is_err());
    }

    #[test]
    fn open_room_has_no_passages_or_obstacles() {
        let t = DifficultyTerms::of(&level(ONE_PUSH));
        assert_eq!(t.narrow_passages, 0.0);
        assert_eq!(t.obstacle_density, 0.0);
        // The four interior corners.
        assert!((t.dead_corners - 4.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn solver_matches_bfs_and_generation_is_deterministic() {
        let cfg = SokobanConfig::default();
        for seed in 0..20 {
            for tier in [Tier::Easy, Tier::Medium] {
                let g = generate_level(seed, tier, &cfg).unwrap();
                assert_eq!(g, generate_level(seed, tier, &cfg).unwrap());
                assert!(replay(&g.level, &g.solution).unwrap());
                assert_eq!(Some(g.solution.len()), brute_force_optimal_len(&g.level, 2_000_000));
                assert!(!is_simple_deadlock(&g.level));
            }
        }
    }
}
