//! Wood Slide (Huarong Dao / Klotski) on a 4-wide, 5-tall board.
//!
//! Blocks are 1×1, 2×1 (wide), 1×2 (tall) or the single 2×2 block that must
//! reach the exit: the bottom two rows of the two middle columns. A move is a
//! single-cell slide. The solver runs breadth-first search over a canonical
//! code in which blocks of the same shape are interchangeable.

use super::templates::{fill, task_template};
use super::{
    payload_mismatch, Answer, Generated, GroundTruth, IntBand, LetterMove, PromptParts, SvgAsset,
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
use rustc_hash::{FxHashMap, FxHashSet};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

pub const WIDTH: usize = 4;
pub const HEIGHT: usize = 5;
const CELLS: usize = WIDTH * HEIGHT;
/// Anchor (top-left cell) of the 2×2 block when it sits on the exit.
pub const EXIT_ANCHOR: (usize, usize) = (3, 1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Shape {
    Single,
    /// Two cells side by side.
    Wide,
    /// Two cells stacked.
    Tall,
    Big,
}

impl Shape {
    pub fn size(self) -> (usize, usize) {
        match self {
            Shape::Single => (1, 1),
            Shape::Wide => (1, 2),
            Shape::Tall => (2, 1),
            Shape::Big => (2, 2),
        }
    }

    fn code(self) -> u64 {
        match self {
            Shape::Single => 1,
            Shape::Wide => 2,
            Shape::Tall => 3,
            Shape::Big => 4,
        }
    }

    fn from_code(c: u64) -> Option<Shape> {
        match c {
            1 => Some(Shape::Single),
            2 => Some(Shape::Wide),
            3 => Some(Shape::Tall),
            4 => Some(Shape::Big),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub letter: char,
    pub shape: Shape,
    /// Top-left cell.
    pub row: usize,
    pub col: usize,
}

impl Block {
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> {
        let (h, w) = self.shape.size();
        let (r0, c0) = (self.row, self.col);
        (0..h).flat_map(move |r| (0..w).map(move |c| (r0 + r, c0 + c)))
    }

    fn shifted(&self, d: CardinalDirection) -> Option<Block> {
        let (dr, dc) = d.grid_delta();
        let (r, c) = (self.row as i32 + dr, self.col as i32 + dc);
        let (h, w) = self.shape.size();
        (r >= 0 && c >= 0 && r as usize + h <= HEIGHT && c as usize + w <= WIDTH).then_some(Block {
            row: r as usize,
            col: c as usize,
            ..*self
        })
    }
}

/// One single-cell slide of a block, addressed by index into the block list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlideMove {
    pub block: usize,
    pub direction: CardinalDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct KlotskiBoard {
    blocks: Vec<Block>,
}

impl KlotskiBoard {
    /// Checks the layout: blocks in bounds and disjoint, exactly one 2×2
    /// block, distinct letters, at least two empty cells.
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidState(m.to_string()));
        let mut occupied = [false; CELLS];
        for b in &blocks {
            let (h, w) = b.shape.size();
            if b.row + h > HEIGHT || b.col + w > WIDTH {
                return bad("block out of bounds");
            }
            for (r, c) in b.cells() {
                if std::mem::replace(&mut occupied[r * WIDTH + c], true) {
                    return bad("blocks overlap");
                }
            }
        }
        if blocks.iter().filter(|b| b.shape == Shape::Big).count() != 1 {
            return bad("exactly one 2x2 block required");
        }
        let letters: HashSet<char> = blocks.iter().map(|b| b.letter).collect();
        if letters.len() != blocks.len() || blocks.iter().any(|b| !b.letter.is_ascii_uppercase()) {
            return bad("block letters must be distinct capitals");
        }
        if occupied.iter().filter(|o| !**o).count() < 2 {
            return bad("board needs at least two empty cells");
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn empty_cells(&self) -> usize {
        CELLS - self.blocks.iter().map(|b| b.cells().count()).sum::<usize>()
    }

    /// The classic full board: exactly two empty cells.
    pub fn is_standard(&self) -> bool {
        self.empty_cells() == 2
    }

    pub fn big(&self) -> &Block {
        self.blocks.iter().find(|b| b.shape == Shape::Big).expect("validated")
    }

    pub fn is_solved(&self) -> bool {
        let b = self.big();
        (b.row, b.col) == EXIT_ANCHOR
    }

    pub fn index_of(&self, letter: char) -> Option<usize> {
        self.blocks.iter().position(|b| b.letter == letter)
    }

    fn occupancy(&self) -> [Option<usize>; CELLS] {
        let mut occ = [None; CELLS];
        for (i, b) in self.blocks.iter().enumerate() {
            for (r, c) in b.cells() {
                occ[r * WIDTH + c] = Some(i);
            }
        }
        occ
    }

    pub fn apply_move(&self, m: SlideMove) -> Result<KlotskiBoard> {
        let b = self
            .blocks
            .get(m.block)
            .ok_or_else(|| Error::IllegalMove(format!("no block {}", m.block)))?;
        let name = || format!("{}{}", b.letter, m.direction.screen_letter());
        let moved = b
            .shifted(m.direction)
            .ok_or_else(|| Error::IllegalMove(format!("{} leaves the board", name())))?;
        let occ = self.occupancy();
        if moved
            .cells()
            .any(|(r, c)| occ[r * WIDTH + c].is_some_and(|o| o != m.block))
        {
            return Err(Error::IllegalMove(format!("{} runs into another block", name())));
        }
        let mut next = self.clone();
        next.blocks[m.block] = moved;
        Ok(next)
    }

    pub fn apply_letter_move(&self, m: LetterMove) -> Result<KlotskiBoard> {
        let block = self
            .index_of(m.letter)
            .ok_or_else(|| Error::IllegalMove(format!("no block {}", m.letter)))?;
        self.apply_move(SlideMove {
            block,
            direction: m.direction,
        })
    }

    pub fn apply_letter_moves(&self, moves: &[LetterMove]) -> Result<KlotskiBoard> {
        moves.iter().try_fold(self.clone(), |b, &m| b.apply_letter_move(m))
    }

    pub fn legal_moves(&self) -> Vec<SlideMove> {
        let mut out = Vec::new();
        for block in 0..self.blocks.len() {
            for direction in CardinalDirection::ALL {
                let m = SlideMove { block, direction };
                if self.apply_move(m).is_ok() {
                    out.push(m);
                }
            }
        }
        out
    }

    pub fn letter_move(&self, m: SlideMove) -> LetterMove {
        LetterMove {
            letter: self.blocks[m.block].letter,
            direction: m.direction,
        }
    }

    /// Shape code for each cell: the anchor cell holds the shape, the other
    /// cells of a block are marked covered. Same-shape blocks are thus
    /// indistinguishable.
    pub fn canonical(&self) -> u64 {
        let mut code = 0u64;
        for b in &self.blocks {
            for (r, c) in b.cells() {
                let i = r * WIDTH + c;
                let v = if (r, c) == (b.row, b.col) { b.shape.code() } else { COVERED };
                code |= v << (3 * i);
            }
        }
        code
    }

    pub fn to_text(&self) -> String {
        self.lines().join("\n")
    }

    fn lines(&self) -> Vec<String> {
        let occ = self.occupancy();
        (0..HEIGHT)
            .map(|r| {
                (0..WIDTH)
                    .map(|c| occ[r * WIDTH + c].map_or('.', |i| self.blocks[i].letter))
                    .collect()
            })
            .collect()
    }
}

const COVERED: u64 = 5;

impl fmt::Display for KlotskiBoard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for KlotskiBoard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lines: Vec<String> = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        KlotskiBoard::try_from(lines)
    }
}

impl TryFrom<Vec<String>> for KlotskiBoard {
    type Error = Error;

    fn try_from(lines: Vec<String>) -> Result<Self> {
        if lines.len() != HEIGHT || lines.iter().any(|l| l.chars().count() != WIDTH) {
            return Err(Error::Parse(format!("board must be {HEIGHT} lines of {WIDTH} cells")));
        }
        let grid: Vec<Vec<char>> = lines.iter().map(|l| l.chars().collect()).collect();
        let mut cells: HashMap<char, Vec<(usize, usize)>> = HashMap::new();
        for (r, row) in grid.iter().enumerate() {
            for (c, &ch) in row.iter().enumerate() {
                if ch != '.' {
                    cells.entry(ch).or_default().push((r, c));
                }
            }
        }
        let mut blocks = Vec::new();
        for (letter, cs) in cells {
            let (r0, c0) = cs[0];
            let shape = [Shape::Single, Shape::Wide, Shape::Tall, Shape::Big]
                .into_iter()
                .find(|s| {
                    let b = Block { letter, shape: *s, row: r0, col: c0 };
                    let mut want: Vec<_> = b.cells().collect();
                    want.sort_unstable();
                    want == cs
                })
                .ok_or_else(|| Error::Parse(format!("block `{letter}` has no valid shape")))?;
            blocks.push(Block { letter, shape, row: r0, col: c0 });
        }
        blocks.sort_by_key(|b| b.letter);
        KlotskiBoard::new(blocks)
    }
}

impl From<KlotskiBoard> for Vec<String> {
    fn from(b: KlotskiBoard) -> Self {
        b.lines()
    }
}

/// Anchors `(cell index, shape)` of a canonical code.
fn decode(code: u64) -> (Vec<(usize, Shape)>, [bool; CELLS]) {
    let mut anchors = Vec::new();
    let mut occupied = [false; CELLS];
    for (i, slot) in occupied.iter_mut().enumerate() {
        let v = code >> (3 * i) & 7;
        *slot = v != 0;
        if let Some(s) = Shape::from_code(v) {
            anchors.push((i, s));
        }
    }
    (anchors, occupied)
}

/// Cell mask of a block of `shape` anchored at `row, col`, if it fits.
fn shape_mask(shape: Shape, row: i32, col: i32) -> Option<u32> {
    let (h, w) = shape.size();
    if row < 0 || col < 0 || row as usize + h > HEIGHT || col as usize + w > WIDTH {
        return None;
    }
    let mut m = 0;
    for r in 0..h {
        for c in 0..w {
            m |= 1 << ((row as usize + r) * WIDTH + col as usize + c);
        }
    }
    Some(m)
}

/// Writes the canonical cell values of a block with mask `mask` anchored at
/// `anchor` into `code`, after clearing those cells.
fn place(code: u64, mask: u32, anchor: usize, shape: Shape) -> u64 {
    let mut next = code;
    for i in 0..CELLS {
        if mask >> i & 1 == 1 {
            next &= !(7 << (3 * i));
            let v = if i == anchor { shape.code() } else { COVERED };
            next |= v << (3 * i);
        }
    }
    next
}

fn canonical_successors(code: u64, out: &mut Vec<(u64, usize, CardinalDirection)>) {
    out.clear();
    let mut occupied = 0u32;
    for i in 0..CELLS {
        if code >> (3 * i) & 7 != 0 {
            occupied |= 1 << i;
        }
    }
    for anchor in 0..CELLS {
        let Some(shape) = Shape::from_code(code >> (3 * anchor) & 7) else { continue };
        let (r, c) = ((anchor / WIDTH) as i32, (anchor % WIDTH) as i32);
        let mine = shape_mask(shape, r, c).expect("anchored blocks fit");
        let others = occupied & !mine;
        for d in CardinalDirection::ALL {
            let (dr, dc) = d.grid_delta();
            let Some(moved) = shape_mask(shape, r + dr, c + dc) else { continue };
            if moved & others != 0 {
                continue;
            }
            let new_anchor = ((r + dr) as usize) * WIDTH + (c + dc) as usize;
            let cleared = (0..CELLS)
                .filter(|i| mine >> i & 1 == 1)
                .fold(code, |acc, i| acc & !(7 << (3 * i)));
            out.push((place(cleared, moved, new_anchor, shape), anchor, d));
        }
    }
}

fn canonical_solved(code: u64) -> bool {
    let (r, c) = EXIT_ANCHOR;
    code >> (3 * (r * WIDTH + c)) & 7 == Shape::Big.code()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Vec<LetterMove>),
    Unsolvable,
    BudgetExceeded,
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&[LetterMove]> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

/// Shortest single-cell-move solution, by breadth-first search over
/// canonical codes. `node_budget` caps visited states.
pub fn solve(board: &KlotskiBoard, node_budget: usize) -> SolveOutcome {
    let start = board.canonical();
    if canonical_solved(start) {
        return SolveOutcome::Solved(Vec::new());
    }
    // Parent code plus the moved block's anchor and direction.
    let mut parent: FxHashMap<u64, (u64, usize, CardinalDirection)> = FxHashMap::default();
    parent.insert(start, (start, 0, CardinalDirection::North));
    let mut queue = VecDeque::from([start]);
    let mut succ = Vec::new();
    while let Some(code) = queue.pop_front() {
        canonical_successors(code, &mut succ);
        for &(next, anchor, d) in &succ {
            let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) else {
                continue;
            };
            e.insert((code, anchor, d));
            if canonical_solved(next) {
                return SolveOutcome::Solved(relabel(board, start, next, &parent));
            }
            if parent.len() > node_budget {
                return SolveOutcome::BudgetExceeded;
            }
            queue.push_back(next);
        }
    }
    SolveOutcome::Unsolvable
}

/// Turns a canonical path back into moves of the labelled board.
fn relabel(
    board: &KlotskiBoard,
    start: u64,
    end: u64,
    parent: &FxHashMap<u64, (u64, usize, CardinalDirection)>,
) -> Vec<LetterMove> {
    let mut steps = Vec::new();
    let mut code = end;
    while code != start {
        let (prev, anchor, d) = parent[&code];
        steps.push((anchor, d));
        code = prev;
    }
    steps.reverse();
    let mut cur = board.clone();
    steps
        .into_iter()
        .map(|(anchor, direction)| {
            let block = cur
                .blocks
                .iter()
                .position(|b| b.row * WIDTH + b.col == anchor)
                .expect("canonical anchor belongs to a block");
            let m = SlideMove { block, direction };
            let lm = cur.letter_move(m);
            cur = cur.apply_move(m).expect("canonical move is legal");
            lm
        })
        .collect()
}

/// Breadth-first search over labelled positions (every block distinct);
/// the reference for the canonical solver.
pub fn brute_force_optimal_len(board: &KlotskiBoard) -> Option<usize> {
    let key = |b: &KlotskiBoard| {
        b.blocks
            .iter()
            .fold(0u128, |k, x| k << 5 | (x.row * WIDTH + x.col) as u128)
    };
    if board.is_solved() {
        return Some(0);
    }
    let mut seen: HashSet<u128> = HashSet::from([key(board)]);
    let mut frontier = vec![board.clone()];
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for b in &frontier {
            for m in b.legal_moves() {
                let nb = b.apply_move(m).expect("legal");
                if seen.insert(key(&nb)) {
                    if nb.is_solved() {
                        return Some(depth);
                    }
                    next.push(nb);
                }
            }
        }
        frontier = next;
    }
    None
}

/// The classic "Heng Dao Li Ma" opening.
pub fn heng_dao_li_ma() -> KlotskiBoard {
    "ABBC\nABBC\nDEEF\nDGHF\nI..J".parse().expect("valid layout")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlotskiConfig {
    pub easy: IntBand,
    pub medium: IntBand,
    pub hard: IntBand,
    pub node_budget: usize,
    pub max_attempts: usize,
}

impl Default for KlotskiConfig {
    fn default() -> Self {
        Self {
            easy: IntBand::new(1, 15),
            medium: IntBand::new(16, 45),
            hard: IntBand::new(46, usize::MAX),
            node_budget: 2_000_000,
            max_attempts: 2_000,
        }
    }
}

impl KlotskiConfig {
    pub fn band(&self, tier: Tier) -> IntBand {
        match tier {
            Tier::Easy => self.easy,
            Tier::Medium => self.medium,
            Tier::Hard => self.hard,
        }
    }
}

/// A random standard layout with the 2×2 block already on the exit.
fn random_solved_layout(rng: &mut Rng) -> KlotskiBoard {
    loop {
        let mut occ = [false; CELLS];
        let (er, ec) = EXIT_ANCHOR;
        let mut blocks = vec![Block { letter: 'A', shape: Shape::Big, row: er, col: ec }];
        for (r, c) in blocks[0].cells() {
            occ[r * WIDTH + c] = true;
        }
        let mut empties = 0;
        for i in 0..CELLS {
            if occ[i] {
                continue;
            }
            let (r, c) = (i / WIDTH, i % WIDTH);
            let free = |r: usize, c: usize| r < HEIGHT && c < WIDTH && !occ[r * WIDTH + c];
            let mut options = vec![(Shape::Single, 3)];
            if free(r, c + 1) {
                options.push((Shape::Wide, 2));
            }
            if free(r + 1, c) {
                options.push((Shape::Tall, 4));
            }
            let total: u32 = options.iter().map(|o| o.1).sum::<u32>() + if empties < 2 { 1 } else { 0 };
            let mut pick = rng.gen_range(0..total);
            let mut chosen = None;
            for (s, w) in &options {
                if pick < *w {
                    chosen = Some(*s);
                    break;
                }
                pick -= w;
            }
            match chosen {
                None => empties += 1,
                Some(shape) => {
                    let b = Block { letter: 'A', shape, row: r, col: c };
                    for (rr, cc) in b.cells() {
                        occ[rr * WIDTH + cc] = true;
                    }
                    blocks.push(b);
                }
            }
        }
        if empties != 2 {
            continue;
        }
        blocks.sort_by_key(|b| (b.row, b.col));
        for (i, b) in blocks.iter_mut().enumerate() {
            b.letter = (b'A' + i as u8) as char;
        }
        return KlotskiBoard::new(blocks).expect("tiling is valid");
    }
}

/// Relabels blocks `A, B, ...` in reading order so prompts read naturally.
fn reletter(board: &KlotskiBoard) -> KlotskiBoard {
    let mut blocks = board.blocks.clone();
    blocks.sort_by_key(|b| (b.row, b.col));
    for (i, b) in blocks.iter_mut().enumerate() {
        b.letter = (b'A' + i as u8) as char;
    }
    KlotskiBoard::new(blocks).expect("relettering keeps the layout")
}

fn random_shuffle(board: &KlotskiBoard, rng: &mut Rng, steps: usize) -> KlotskiBoard {
    let mut cur = board.clone();
    for _ in 0..steps {
        let moves = cur.legal_moves();
        cur = cur.apply_move(moves[rng.gen_range(0..moves.len())]).expect("legal");
    }
    cur
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedBoard {
    pub board: KlotskiBoard,
    pub solution: Vec<LetterMove>,
}

fn board_from_code(code: u64) -> KlotskiBoard {
    let (anchors, _) = decode(code);
    let blocks = anchors
        .into_iter()
        .enumerate()
        .map(|(i, (a, shape))| Block {
            letter: (b'A' + i as u8) as char,
            shape,
            row: a / WIDTH,
            col: a % WIDTH,
        })
        .collect();
    KlotskiBoard::new(blocks).expect("codes come from valid boards")
}

/// Positions reachable from the solved `start` within `max_depth` slides,
/// paired with their breadth-first depth from it, in visiting order. The
/// depth bounds the true distance to the goal from above. `None` if more
/// than `node_budget` positions are visited.
fn reachable_within(start: u64, max_depth: usize, node_budget: usize) -> Option<Vec<(u64, usize)>> {
    let mut seen: FxHashSet<u64> = FxHashSet::default();
    seen.insert(start);
    let mut out = vec![(start, 0)];
    let mut succ = Vec::new();
    let mut k = 0;
    while k < out.len() {
        let (code, d) = out[k];
        k += 1;
        if d >= max_depth {
            continue;
        }
        canonical_successors(code, &mut succ);
        for &(next, _, _) in &succ {
            if seen.insert(next) {
                out.push((next, d + 1));
                if out.len() > node_budget {
                    return None;
                }
            }
        }
    }
    Some(out)
}

/// Candidates tried per explored layout.
const PICKS_PER_LAYOUT: usize = 8;

/// Explores positions around a random solved layout, picks one whose depth
/// lies in the tier band, then solves it forward and keeps it if the optimal
/// length also lies in the band.
pub fn generate_board(seed: u64, tier: Tier, config: &KlotskiConfig) -> Result<GeneratedBoard> {
    let mut rng = seeded(seed);
    let band = config.band(tier);
    for _ in 0..config.max_attempts {
        let solved = random_solved_layout(&mut rng);
        let Some(states) = reachable_within(solved.canonical(), band.hi, config.node_budget) else {
            continue;
        };
        let candidates: Vec<u64> = states
            .iter()
            .filter(|&&(c, d)| band.contains(d) && !canonical_solved(c))
            .map(|&(c, _)| c)
            .collect();
        if candidates.is_empty() {
            continue;
        }
        for _ in 0..PICKS_PER_LAYOUT {
            let board = board_from_code(candidates[rng.gen_range(0..candidates.len())]);
            if let SolveOutcome::Solved(solution) = solve(&board, config.node_budget) {
                if band.contains(solution.len()) {
                    return Ok(GeneratedBoard { board, solution });
                }
            }
        }
    }
    Err(Error::GenerationBudgetExceeded {
        task: "wood_slide",
        attempts: config.max_attempts,
    })
}

pub fn format_moves(moves: &[LetterMove]) -> String {
    moves.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn parse_moves(s: &str) -> Result<Vec<LetterMove>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    crate::eval::parse::parse_slides(s).ok_or_else(|| Error::Parse(format!("bad slide list `{s}`")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlotskiPayload {
    pub board: KlotskiBoard,
}

#[derive(Debug, Clone, Default)]
pub struct KlotskiEnv {
    pub config: KlotskiConfig,
}

fn payload(p: &TaskPayload) -> Result<&KlotskiPayload> {
    match p {
        TaskPayload::WoodSlide(k) => Ok(k),
        _ => Err(payload_mismatch(TaskKind::WoodSlide)),
    }
}

pub fn render_board(board: &KlotskiBoard) -> String {
    let s = 48.0;
    let m = 14.0;
    let mut svg = Svg::new(WIDTH as f64 * s + 2.0 * m, HEIGHT as f64 * s + 2.0 * m + 10.0);
    svg.rect(m, m, WIDTH as f64 * s, HEIGHT as f64 * s, "#f3ead8", "#6b4f2a");
    let exit_y = m + HEIGHT as f64 * s + 4.0;
    svg.rect(m + s, exit_y, 2.0 * s, 4.0, "#c8102e", "#c8102e");
    for b in &board.blocks {
        let (h, w) = b.shape.size();
        let fill = if b.shape == Shape::Big { "#b5542c" } else { "#d9a760" };
        svg.rect(
            m + b.col as f64 * s + 3.0,
            m + b.row as f64 * s + 3.0,
            w as f64 * s - 6.0,
            h as f64 * s - 6.0,
            fill,
            "#5a3b17",
        );
        svg.text(
            m + (b.col as f64 + w as f64 / 2.0) * s,
            m + (b.row as f64 + h as f64 / 2.0) * s + 6.0,
            18.0,
            &b.letter.to_string(),
        );
    }
    svg.finish()
}

impl TaskEnv for KlotskiEnv {
    fn kind(&self) -> TaskKind {
        TaskKind::WoodSlide
    }

    fn generate(&self, seed: u64, tier: Tier) -> Result<Generated> {
        let g = generate_board(seed, tier, &self.config)?;
        Ok(Generated {
            complexity: g.solution.len() as f64,
            optimal_len: Some(g.solution.len()),
            ground_truth: GroundTruth::Plan {
                solution: g.solution.iter().map(ToString::to_string).collect(),
            },
            payload: TaskPayload::WoodSlide(KlotskiPayload { board: g.board }),
        })
    }

    fn prompt_parts(&self, p: &TaskPayload) -> Result<PromptParts> {
        let p = payload(p)?;
        let t = task_template(TaskKind::WoodSlide);
        let main = p.board.big().letter.to_string();
        let vars = [("main", main.as_str())];
        Ok(PromptParts {
            rules: fill(&t.rules, &vars),
            symbolic: format!("Board (top row first):\n{}", p.board.to_text()),
            terse: fill(&t.terse, &vars),
            question: fill(&t.question, &vars),
            format: fill(&t.format, &vars),
        })
    }

    fn render_assets(&self, p: &TaskPayload) -> Result<Vec<SvgAsset>> {
        Ok(vec![SvgAsset {
            suffix: "board".into(),
            svg: render_board(&payload(p)?.board),
        }])
    }

    fn parse_segment(&self, segment: &str) -> Option<Answer> {
        crate::eval::parse::parse_slides(segment).map(Answer::Slides)
    }

    fn grade(&self, instance: &PuzzleInstance, answer: &Answer) -> bool {
        let (Ok(p), Answer::Slides(moves)) = (payload(&instance.payload), answer) else {
            return false;
        };
        p.board
            .apply_letter_moves(moves)
            .is_ok_and(|b| b.is_solved())
    }

    fn reference_answer(&self, instance: &PuzzleInstance) -> Answer {
        Answer::Slides(
            parse_moves(&self.canonical_actions(instance).join(" ")).expect("stored solution parses"),
        )
    }

    fn random_answer(&self, instance: &PuzzleInstance, rng: &mut Rng) -> Answer {
        let letters: Vec<char> = payload(&instance.payload)
            .map(|p| p.board.blocks.iter().map(|b| b.letter).collect())
            .unwrap_or_else(|_| vec!['A']);
        let n = instance.optimal_len.unwrap_or(8).max(1);
        Answer::Slides(
            (0..n)
                .map(|_| LetterMove {
                    letter: letters[rng.gen_range(0..letters.len())],
                    direction: CardinalDirection::ALL[rng.gen_range(0..4)],
                })
                .collect(),
        )
    }

    fn canonical_state(&self, p: &TaskPayload) -> String {
        payload(p).map(|p| p.board.to_text()).unwrap_or_default()
    }

    fn canonical_actions(&self, instance: &PuzzleInstance) -> Vec<String> {
        match &instance.ground_truth {
            GroundTruth::Plan { solution } => solution.clone(),
            _ => Vec::new(),
        }
    }

    fn random_walk(&self, rng: &mut Rng, steps: usize) -> Result<ImagerySample> {
        let seed: u64 = rng.gen();
        let mut local = seeded(seed);
        let shuffles = local.gen_range(0..60);
        let start = reletter(&random_shuffle(&random_solved_layout(&mut local), &mut local, shuffles));
        let mut cur = start.clone();
        let mut moves = Vec::new();
        for _ in 0..steps {
            let legal = cur.legal_moves();
            let m = legal[rng.gen_range(0..legal.len())];
            moves.push(cur.letter_move(m));
            cur = cur.apply_move(m)?;
        }
        Ok(ImagerySample {
            task: TaskKind::WoodSlide,
            seed,
            initial_state: serde_json::to_value(&start)?,
            initial: start.to_text(),
            question: format!(
                "Apply the slides {} to the board. Draw the board afterwards.",
                format_moves(&moves)
            ),
            actions: moves.iter().map(ToString::to_string).collect(),
            target: cur.to_text(),
            rationale: None,
        })
    }

    fn verify_imagery(&self, sample: &ImagerySample) -> Result<()> {
        let start: KlotskiBoard = serde_json::from_value(sample.initial_state.clone())?;
        let end = start.apply_letter_moves(&parse_moves(&sample.actions.join(" "))?)?;
        if end.to_text() != sample.target {
            return Err(Error::InvalidSolution("target board does not match".into()));
        }
        Ok(())
    }

    fn narrate(&self, instance: &PuzzleInstance, solution: &[String]) -> Result<TrajectorySample> {
        let p = payload(&instance.payload)?;
        let moves = parse_moves(&solution.join(" "))?;
        let mut cur = p.board.clone();
        let mut steps = Vec::new();
        for m in &moves {
            cur = cur
                .apply_letter_move(*m)
                .map_err(|e| Error::InvalidSolution(e.to_string()))?;
            steps.push(NarratedStep {
                action: format!("slide {} {}", m.letter, m.direction.name()),
                state: cur.to_text(),
            });
        }
        if !cur.is_solved() {
            return Err(Error::InvalidSolution("plan does not reach the exit".into()));
        }
        Ok(TrajectorySample {
            instance_id: instance.id.clone(),
            task: TaskKind::WoodSlide,
            prompt: instance.renditions.detailed.clone(),
            initial: p.board.to_text(),
            steps,
            final_answer: fenced(&format_moves(&moves)),
        })
    }

    fn verify_trajectory(&self, instance: &PuzzleInstance, sample: &TrajectorySample) -> Result<()> {
        let p = payload(&instance.payload)?;
        let mut cur = p.board.clone();
        for s in &sample.steps {
            let mut parts = s.action.split_whitespace().skip(1);
            let letter = parts.next().and_then(|l| l.chars().next());
            let dir = parts.next().and_then(|d| d.parse::<CardinalDirection>().ok());
            let (Some(letter), Some(direction)) = (letter, dir) else {
                return Err(Error::InvalidSolution(format!("bad step `{}`", s.action)));
            };
            cur = cur
                .apply_letter_move(LetterMove { letter, direction })
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

#[cfg(test)]
mod tests {
    use super::*;
    use CardinalDirection::*;

    fn board(s: &str) -> KlotskiBoard {
        s.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        let b = heng_dao_li_ma();
        assert_eq!(b.to_text(), "ABBC\nABBC\nDEEF\nDGHF\nI..J");
        assert!(b.is_standard());
        assert_eq!(board(&b.to_text()), b);
        assert!("AAB.\nAAB.\n....\n....\n.CC.".parse::<KlotskiBoard>().is_ok());
        assert!("AAA.\n....\n....\n....\n....".parse::<KlotskiBoard>().is_err());
    }

    #[test]
    fn single_block_moves() {
        let b = heng_dao_li_ma();
        let g = b.index_of('G').unwrap();
        let legal: Vec<_> = b.legal_moves().into_iter().filter(|m| m.block == g).collect();
        assert_eq!(legal.len(), 1);
        let i = b.index_of('I').unwrap();
        assert!(b.apply_move(SlideMove { block: i, direction: North }).is_err());
        let moved = b.apply_move(SlideMove { block: i, direction: East }).unwrap();
        assert_eq!(moved.empty_cells(), 2);
        let back = moved.apply_move(SlideMove { block: i, direction: West }).unwrap();
        assert_eq!(back, b);
        // A single with both empties beside it has two or more moves.
        let open = board("ABBC\nABBC\nDEEF\nD.HF\nIG.J");
        let g = open.index_of('G').unwrap();
        assert!(open.legal_moves().iter().filter(|m| m.block == g).count() >= 2);
    }

    #[test]
    fn straight_run_to_exit() {
        let b = board(".AA.\n.AA.\n....\n....\nB..C");
        assert_eq!(solve(&b, 1000).solution().unwrap().len(), 3);
        let done = board("B..C\n....\n....\n.AA.\n.AA.");
        assert_eq!(solve(&done, 10), SolveOutcome::Solved(vec![]));
    }

    #[test]
    fn canonical_solver_matches_labelled_bfs_on_sparse_boards() {
        let mut rng = seeded(11);
        for _ in 0..30 {
            let solved = random_solved_layout(&mut rng);
            // Keep at most six blocks by dropping the rest.
            let mut blocks: Vec<Block> = solved.blocks().to_vec();
            while blocks.len() > 6 {
                let i = rng.gen_range(0..blocks.len());
                if blocks[i].shape != Shape::Big {
                    blocks.remove(i);
                }
            }
            let sparse = KlotskiBoard::new(blocks).unwrap();
            let b = random_shuffle(&sparse, &mut rng, 200);
            let fast = solve(&b, 10_000_000);
            let sol = fast.solution().unwrap();
            assert_eq!(Some(sol.len()), brute_force_optimal_len(&b));
            assert!(b.apply_letter_moves(sol).unwrap().is_solved());
        }
    }

    #[test]
    fn generated_boards_replay_and_are_deterministic() {
        let cfg = KlotskiConfig::default();
        for tier in [Tier::Easy, Tier::Medium] {
            for seed in 0..5 {
                let g = generate_board(seed, tier, &cfg).unwrap();
                assert_eq!(g, generate_board(seed, tier, &cfg).unwrap());
                assert!(g.board.is_standard());
                assert!(cfg.band(tier).contains(g.solution.len()));
                assert!(g.board.apply_letter_moves(&g.solution).unwrap().is_solved());
            }
        }
    }
}
