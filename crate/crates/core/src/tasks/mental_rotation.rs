//! Mental rotation: a colored polycube shown from the eight isometric corners;
//! the answer is one orthographic view.
//!
//! Instances are kept only when the eight views pin down the queried view.
//! [`uniqueness_check`] searches every face-connected occupancy of the
//! bounding box that reproduces the observed images and compares the query
//! projections of all consistent assemblies.

use super::templates::{fill, task_template};
use super::{
    payload_mismatch, Answer, Generated, GroundTruth, IntBand, PromptParts, SvgAsset, TaskEnv,
    TaskKind, TaskPayload, Tier,
};
use crate::bench::instance::PuzzleInstance;
use crate::error::{Error, Result};
use crate::geometry::projection::{
    face_triangles, ortho_frame, ortho_view_name, view_image, TriKey, ViewImage,
};
use crate::geometry::voxel::cells_face_connected;
use crate::geometry::{
    isometric_project, orthographic_project, CardinalDirection, Cell3, Color, ColorGrid, Dir3,
    FaceList, IsoCorner, Orientation, Viewpoint, VoxelSet,
};
use crate::render::{shade, Svg};
use crate::rng::{seeded, Rng};
use crate::synth::{ImagerySample, TrajectorySample};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

/// Grows a face-connected assembly by uniform accretion: each new cube is
/// drawn uniformly from the empty cells adjacent to the current assembly.
pub fn generate_assembly(seed: u64, n_cubes: usize, palette: &[Color]) -> VoxelSet {
    let mut rng = seeded(seed);
    grow_assembly(&mut rng, n_cubes, palette)
}

fn grow_assembly(rng: &mut Rng, n_cubes: usize, palette: &[Color]) -> VoxelSet {
    assert!(!palette.is_empty(), "palette must not be empty");
    let mut v = VoxelSet::new();
    v.insert([0, 0, 0], *palette.choose(rng).unwrap());
    while v.len() < n_cubes {
        let frontier: BTreeSet<Cell3> = v
            .iter()
            .flat_map(|(&c, _)| VoxelSet::neighbors(c))
            .filter(|c| !v.contains(c))
            .collect();
        let frontier: Vec<Cell3> = frontier.into_iter().collect();
        let cell = frontier[rng.gen_range(0..frontier.len())];
        v.insert(cell, *palette.choose(rng).unwrap());
    }
    v.normalized()
}

fn face_fill(normal: Dir3, color: Color) -> String {
    let factor = match normal {
        Dir3::Up | Dir3::Down => 1.0,
        Dir3::East | Dir3::West => 0.82,
        Dir3::North | Dir3::South => 0.66,
    };
    shade(color.hex(), factor)
}

/// One SVG per isometric corner, with the corner label on top.
pub fn render_views(a: &VoxelSet) -> Vec<String> {
    IsoCorner::all().map(|c| render_view(a, c)).collect()
}

pub fn render_view(a: &VoxelSet, corner: IsoCorner) -> String {
    let faces = isometric_project(a, Viewpoint::Isometric(corner));
    let scale = 12.0;
    let margin = 16.0;
    let header = 22.0;
    let pts: Vec<(i32, i32)> = faces.iter().flat_map(|f| f.polygon).collect();
    let (hmin, hmax) = min_max(pts.iter().map(|p| p.0));
    let (vmin, vmax) = min_max(pts.iter().map(|p| p.1));
    let width = ((hmax - hmin) as f64 * scale + 2.0 * margin).max(160.0);
    let height = (vmax - vmin) as f64 * scale + 2.0 * margin + header;
    let x0 = (width - (hmax - hmin) as f64 * scale) / 2.0;
    let mut svg = Svg::new(width, height);
    svg.text(width / 2.0, 16.0, 12.0, &corner.label());
    for f in &faces {
        let poly: Vec<(f64, f64)> = f
            .polygon
            .iter()
            .map(|&(h, v)| {
                (
                    x0 + (h - hmin) as f64 * scale,
                    header + margin + (vmax - v) as f64 * scale,
                )
            })
            .collect();
        svg.polygon(&poly, &face_fill(f.normal, f.color), "#222222");
    }
    svg.finish()
}

fn min_max(it: impl Iterator<Item = i32>) -> (i32, i32) {
    it.fold((i32::MAX, i32::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// What one image shows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    Isometric { corner: IsoCorner, image: ViewImage },
    Orthographic { side: Dir3, grid: ColorGrid },
}

impl Observation {
    pub fn of(a: &VoxelSet, view: Viewpoint) -> Self {
        match view {
            Viewpoint::Isometric(corner) => Self::from_faces(corner, &isometric_project(a, view)),
            Viewpoint::Orthographic(side) => Observation::Orthographic {
                side,
                grid: orthographic_project(a, view),
            },
        }
    }

    pub fn from_faces(corner: IsoCorner, faces: &FaceList) -> Self {
        Observation::Isometric {
            corner,
            image: view_image(faces, corner),
        }
    }
}

/// The eight isometric observations of an assembly.
pub fn eight_views(a: &VoxelSet) -> Vec<Observation> {
    Viewpoint::isometric_corners()
        .into_iter()
        .map(|v| Observation::of(a, v))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Uniqueness {
    Unique,
    Ambiguous,
    Timeout,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Occ {
    Unknown,
    Empty,
    Full,
}

/// Cells a line of sight passes through, nearest first, with the face each
/// would show, and what the image shows there.
struct Ray {
    cells: Vec<(usize, Dir3)>,
    seen: Option<(Dir3, Color)>,
}

struct Domain {
    dims: [i32; 3],
}

impl Domain {
    fn len(&self) -> usize {
        (self.dims[0] * self.dims[1] * self.dims[2]) as usize
    }

    fn cell(&self, i: usize) -> Cell3 {
        let i = i as i32;
        let [dx, dy, _] = self.dims;
        [i % dx, (i / dx) % dy, i / (dx * dy)]
    }

    /// Image placement of the domain box for an orthographic side:
    /// `(right_min, up_max, rows, cols)`.
    fn ortho_extent(&self, side: Dir3) -> (i32, i32, usize, usize) {
        let (right, up) = ortho_frame(side);
        let hi = [self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1];
        let corner = |i: usize| [if i & 1 == 0 { 0 } else { hi[0] }, if i & 2 == 0 { 0 } else { hi[1] }, if i & 4 == 0 { 0 } else { hi[2] }];
        let (rmin, rmax) = min_max((0..8).map(|i| dot(corner(i), right)));
        let (umin, umax) = min_max((0..8).map(|i| dot(corner(i), up)));
        (rmin, umax, (umax - umin + 1) as usize, (rmax - rmin + 1) as usize)
    }

    fn rays(&self, obs: &Observation) -> Option<Vec<Ray>> {
        match obs {
            Observation::Isometric { corner, image } => {
                let mut by_tri: BTreeMap<TriKey, Vec<(i32, usize, Dir3)>> = BTreeMap::new();
                for i in 0..self.len() {
                    let c = self.cell(i);
                    for n in corner.facing_normals() {
                        for t in face_triangles(c, n, *corner) {
                            by_tri.entry(t).or_default().push((corner.depth(c), i, n));
                        }
                    }
                }
                if image.keys().any(|t| !by_tri.contains_key(t)) {
                    return None;
                }
                Some(
                    by_tri
                        .into_iter()
                        .map(|(t, mut v)| {
                            v.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                            Ray {
                                cells: v.into_iter().map(|(_, i, n)| (i, n)).collect(),
                                seen: image.get(&t).copied(),
                            }
                        })
                        .collect(),
                )
            }
            Observation::Orthographic { side, grid } => {
                let (rmin, umax, rows, cols) = self.ortho_extent(*side);
                if grid.n_rows() != rows || grid.n_cols() != cols {
                    return None;
                }
                let (right, up) = ortho_frame(*side);
                let toward = side.vector();
                let mut columns: Vec<Vec<(i32, usize)>> = vec![Vec::new(); rows * cols];
                for i in 0..self.len() {
                    let c = self.cell(i);
                    let col = (dot(c, right) - rmin) as usize;
                    let row = (umax - dot(c, up)) as usize;
                    columns[row * cols + col].push((dot(c, toward), i));
                }
                Some(
                    columns
                        .into_iter()
                        .enumerate()
                        .map(|(k, mut v)| {
                            v.sort_by_key(|e| std::cmp::Reverse(e.0));
                            Ray {
                                cells: v.into_iter().map(|(_, i)| (i, *side)).collect(),
                                seen: grid.rows[k / cols][k % cols].map(|c| (*side, c)),
                            }
                        })
                        .collect(),
                )
            }
        }
    }

    fn project(&self, cells: &[Occ], colors: &[Option<Color>], side: Dir3) -> Option<ColorGrid> {
        let (rmin, umax, rows, cols) = self.ortho_extent(side);
        let (right, up) = ortho_frame(side);
        let toward = side.vector();
        let mut best: Vec<Option<(i32, usize)>> = vec![None; rows * cols];
        for (i, occ) in cells.iter().enumerate() {
            if *occ != Occ::Full {
                continue;
            }
            let c = self.cell(i);
            let k = (umax - dot(c, up)) as usize * cols + (dot(c, right) - rmin) as usize;
            let d = dot(c, toward);
            if best[k].is_none_or(|(bd, _)| d > bd) {
                best[k] = Some((d, i));
            }
        }
        let mut grid = vec![vec![None; cols]; rows];
        for (k, b) in best.into_iter().enumerate() {
            if let Some((_, i)) = b {
                // A visible cube whose color no image fixes: ambiguous.
                grid[k / cols][k % cols] = Some(colors[i]?);
            }
        }
        Some(ColorGrid { rows: grid })
    }
}

fn dot(a: [i32; 3], b: [i32; 3]) -> i32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

struct Search<'a> {
    domain: &'a Domain,
    rays: Vec<Ray>,
    observations: &'a [Observation],
    query: Dir3,
    budget: usize,
    nodes: usize,
    answer: Option<ColorGrid>,
}

enum Verdict {
    Continue,
    Ambiguous,
    Timeout,
}

impl Search<'_> {
    /// Unit propagation to a fixpoint. Returns `false` on contradiction.
    fn propagate(&self, occ: &mut [Occ]) -> bool {
        loop {
            let mut changed = false;
            let mut want: Vec<Option<Color>> = vec![None; occ.len()];
            for ray in &self.rays {
                match ray.seen {
                    None => {
                        for &(i, _) in &ray.cells {
                            match occ[i] {
                                Occ::Full => return false,
                                Occ::Unknown => {
                                    occ[i] = Occ::Empty;
                                    changed = true;
                                }
                                Occ::Empty => {}
                            }
                        }
                    }
                    Some((normal, color)) => {
                        let mut front = None;
                        for &(i, n) in &ray.cells {
                            match occ[i] {
                                Occ::Empty => continue,
                                Occ::Full if n != normal => return false,
                                Occ::Unknown if n != normal => {
                                    occ[i] = Occ::Empty;
                                    changed = true;
                                }
                                _ => {
                                    front = Some(i);
                                    break;
                                }
                            }
                        }
                        let Some(i) = front else {
                            return false;
                        };
                        match want[i] {
                            Some(c) if c != color => {
                                // Two images need different colors on it.
                                if occ[i] == Occ::Full {
                                    return false;
                                }
                                occ[i] = Occ::Empty;
                                changed = true;
                            }
                            _ => want[i] = Some(color),
                        }
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn branch_cell(&self, occ: &[Occ]) -> Option<usize> {
        for ray in &self.rays {
            if ray.seen.is_some() {
                if let Some(&(i, _)) = ray.cells.iter().find(|(i, _)| occ[*i] != Occ::Empty) {
                    if occ[i] == Occ::Unknown {
                        return Some(i);
                    }
                }
            }
        }
        occ.iter().position(|o| *o == Occ::Unknown)
    }

    fn run(&mut self, mut occ: Vec<Occ>) -> Verdict {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Verdict::Timeout;
        }
        if !self.propagate(&mut occ) {
            return Verdict::Continue;
        }
        match self.branch_cell(&occ) {
            Some(i) => {
                for choice in [Occ::Full, Occ::Empty] {
                    let mut next = occ.clone();
                    next[i] = choice;
                    match self.run(next) {
                        Verdict::Continue => {}
                        other => return other,
                    }
                }
                Verdict::Continue
            }
            None => self.leaf(&occ),
        }
    }

    fn leaf(&mut self, occ: &[Occ]) -> Verdict {
        let full: Vec<usize> = (0..occ.len()).filter(|&i| occ[i] == Occ::Full).collect();
        if full.is_empty() || !cells_face_connected(full.iter().map(|&i| self.domain.cell(i))) {
            return Verdict::Continue;
        }
        let mut colors: Vec<Option<Color>> = vec![None; occ.len()];
        for ray in &self.rays {
            if let Some((_, color)) = ray.seen {
                if let Some(&(i, _)) = ray.cells.iter().find(|(i, _)| occ[*i] == Occ::Full) {
                    colors[i] = Some(color);
                }
            }
        }
        // Re-render with a placeholder on unconstrained cubes; propagation
        // guarantees they are hidden, this checks it.
        let assembly = VoxelSet::from_cells(
            full.iter()
                .map(|&i| (self.domain.cell(i), colors[i].unwrap_or(Color::Gray))),
        );
        for obs in self.observations {
            let rendered = match obs {
                Observation::Isometric { corner, .. } => {
                    Observation::of(&assembly, Viewpoint::Isometric(*corner))
                }
                Observation::Orthographic { side, .. } => Observation::Orthographic {
                    side: *side,
                    grid: self.domain.project(occ, &colors, *side).unwrap_or_default(),
                },
            };
            if &rendered != obs {
                return Verdict::Continue;
            }
        }
        let Some(grid) = self.domain.project(occ, &colors, self.query) else {
            return Verdict::Ambiguous;
        };
        match &self.answer {
            None => {
                self.answer = Some(grid);
                Verdict::Continue
            }
            Some(g) if *g == grid => Verdict::Continue,
            Some(_) => Verdict::Ambiguous,
        }
    }
}

/// Decides whether every face-connected assembly inside a `dims` box that
/// reproduces `observations` has the same `query` view.
///
/// Colors of cubes hidden in every image are free, so one that would show in
/// the query view makes the instance ambiguous. More than `node_budget`
/// search nodes yields [`Uniqueness::Timeout`].
pub fn uniqueness_check(
    observations: &[Observation],
    dims: [i32; 3],
    query: Dir3,
    node_budget: usize,
) -> Uniqueness {
    let domain = Domain { dims };
    let mut rays = Vec::new();
    for obs in observations {
        match domain.rays(obs) {
            Some(r) => rays.extend(r),
            // The image does not fit the box; nothing is consistent.
            None => return Uniqueness::Unique,
        }
    }
    let mut search = Search {
        domain: &domain,
        rays,
        observations,
        query,
        budget: node_budget,
        nodes: 0,
        answer: None,
    };
    match search.run(vec![Occ::Unknown; domain.len()]) {
        Verdict::Continue => Uniqueness::Unique,
        Verdict::Ambiguous => Uniqueness::Ambiguous,
        Verdict::Timeout => Uniqueness::Timeout,
    }
}

/// [`uniqueness_check`] on the eight isometric views of `a`.
pub fn check_assembly(a: &VoxelSet, query: Dir3, node_budget: usize) -> Uniqueness {
    uniqueness_check(&eight_views(a), a.dims(), query, node_budget)
}

/// A 90° rotation of the whole object, used by imagery samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectTurn {
    /// Tips the object over its bottom edge toward a direction.
    Roll(CardinalDirection),
    /// Quarter turn about the vertical axis, counterclockwise from above.
    TurnLeft,
    TurnRight,
}

impl ObjectTurn {
    pub fn all() -> [ObjectTurn; 6] {
        [
            ObjectTurn::Roll(CardinalDirection::North),
            ObjectTurn::Roll(CardinalDirection::East),
            ObjectTurn::Roll(CardinalDirection::South),
            ObjectTurn::Roll(CardinalDirection::West),
            ObjectTurn::TurnLeft,
            ObjectTurn::TurnRight,
        ]
    }

    pub fn orientation(self) -> Orientation {
        use Dir3::*;
        match self {
            ObjectTurn::Roll(d) => Orientation::roll_of(d),
            ObjectTurn::TurnLeft => Orientation::from_faces([Up, Down, West, East, North, South])
                .expect("yaw is a rotation"),
            ObjectTurn::TurnRight => ObjectTurn::TurnLeft.orientation().inverse(),
        }
    }
}

impl fmt::Display for ObjectTurn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectTurn::Roll(d) => write!(f, "roll {}", d.name()),
            ObjectTurn::TurnLeft => f.write_str("turn left"),
            ObjectTurn::TurnRight => f.write_str("turn right"),
        }
    }
}

impl FromStr for ObjectTurn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "turn left" => Ok(ObjectTurn::TurnLeft),
            "turn right" => Ok(ObjectTurn::TurnRight),
            _ => s
                .strip_prefix("roll ")
                .and_then(|d| d.parse::<CardinalDirection>().ok())
                .map(ObjectTurn::Roll)
                .ok_or_else(|| Error::Parse(format!("bad object turn `{s}`"))),
        }
    }
}

pub fn describe_assembly(a: &VoxelSet) -> String {
    let cubes: Vec<String> = a
        .iter()
        .map(|(c, col)| format!("({}, {}, {}) {}", c[0], c[1], c[2], col))
        .collect();
    format!(
        "{} cubes at (x east, y north, z up): {}",
        a.len(),
        cubes.join("; ")
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentalRotationConfig {
    pub easy: IntBand,
    pub medium: IntBand,
    pub hard: IntBand,
    pub node_budget: usize,
    pub max_attempts: usize,
}

impl Default for MentalRotationConfig {
    fn default() -> Self {
        Self {
            easy: IntBand::new(4, 6),
            medium: IntBand::new(7, 9),
            hard: IntBand::new(10, 13),
            node_budget: 20_000,
            max_attempts: 500,
        }
    }
}

impl MentalRotationConfig {
    pub fn band(&self, tier: Tier) -> IntBand {
        match tier {
            Tier::Easy => self.easy,
            Tier::Medium => self.medium,
            Tier::Hard => self.hard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentalRotationPayload {
    pub assembly: VoxelSet,
    pub query: Dir3,
}

#[derive(Debug, Clone, Default)]
pub struct MentalRotationEnv {
    pub config: MentalRotationConfig,
}

impl MentalRotationEnv {
    pub fn generate_instance(&self, seed: u64, tier: Tier) -> Result<(MentalRotationPayload, ColorGrid)> {
        let mut rng = seeded(seed);
        let band = self.config.band(tier);
        for _ in 0..self.config.max_attempts {
            let n = rng.gen_range(band.lo..=band.hi);
            let assembly = grow_assembly(&mut rng, n, &Color::ALL);
            let query = Dir3::ALL[rng.gen_range(0..6)];
            if check_assembly(&assembly, query, self.config.node_budget) == Uniqueness::Unique {
                let grid = orthographic_project(&assembly, Viewpoint::Orthographic(query));
                return Ok((MentalRotationPayload { assembly, query }, grid));
            }
        }
        Err(Error::GenerationBudgetExceeded {
            task: "mental_rotation",
            attempts: self.config.max_attempts,
        })
    }
}

fn payload(p: &TaskPayload) -> Result<&MentalRotationPayload> {
    match p {
        TaskPayload::MentalRotation(m) => Ok(m),
        _ => Err(payload_mismatch(TaskKind::MentalRotation)),
    }
}

fn viewing_phrase(side: Dir3) -> &'static str {
    match side {
        Dir3::Up => "looking down from above",
        Dir3::Down => "looking up from below",
        Dir3::North => "looking south from the north side",
        Dir3::South => "looking north from the south side",
        Dir3::East => "looking west from the east side",
        Dir3::West => "looking east from the west side",
    }
}

fn orientation_phrase(side: Dir3) -> String {
    let (right, up) = ortho_frame(side);
    let name = |v: [i32; 3]| {
        let d = Dir3::from_vector(v).expect("axis vector");
        match d {
            Dir3::Up => "top",
            Dir3::Down => "bottom",
            other => other.name(),
        }
    };
    let left = [-right[0], -right[1], -right[2]];
    format!(
        "The top row of the grid is the {} side of the object and the first column is its {} side.",
        name(up),
        name(left)
    )
}

impl TaskEnv for MentalRotationEnv {
    fn kind(&self) -> TaskKind {
        TaskKind::MentalRotation
    }

    fn generate(&self, seed: u64, tier: Tier) -> Result<Generated> {
        let (p, grid) = self.generate_instance(seed, tier)?;
        Ok(Generated {
            complexity: p.assembly.len() as f64,
            payload: TaskPayload::MentalRotation(p),
            ground_truth: GroundTruth::Grid { grid },
            optimal_len: None,
        })
    }

    fn prompt_parts(&self, p: &TaskPayload) -> Result<PromptParts> {
        let p = payload(p)?;
        let t = task_template(TaskKind::MentalRotation);
        let grid = orthographic_project(&p.assembly, Viewpoint::Orthographic(p.query));
        let (rows, cols) = (grid.n_rows().to_string(), grid.n_cols().to_string());
        let orientation = orientation_phrase(p.query);
        let vars = [
            ("view", ortho_view_name(p.query)),
            ("direction", viewing_phrase(p.query)),
            ("rows", rows.as_str()),
            ("cols", cols.as_str()),
            ("orientation", orientation.as_str()),
        ];
        Ok(PromptParts {
            rules: fill(&t.rules, &vars),
            symbolic: describe_assembly(&p.assembly),
            terse: fill(&t.terse, &vars),
            question: fill(&t.question, &vars),
            format: fill(&t.format, &vars),
        })
    }

    fn render_assets(&self, p: &TaskPayload) -> Result<Vec<SvgAsset>> {
        let p = payload(p)?;
        Ok(render_views(&p.assembly)
            .into_iter()
            .enumerate()
            .map(|(i, svg)| SvgAsset {
                suffix: format!("view{i}"),
                svg,
            })
            .collect())
    }

    fn parse_segment(&self, segment: &str) -> Option<Answer> {
        segment.parse::<ColorGrid>().ok().map(Answer::Grid)
    }

    fn grade(&self, instance: &PuzzleInstance, answer: &Answer) -> bool {
        match (&instance.ground_truth, answer) {
            (GroundTruth::Grid { grid }, Answer::Grid(a)) => grid == a,
            _ => false,
        }
    }

    fn reference_answer(&self, instance: &PuzzleInstance) -> Answer {
        match &instance.ground_truth {
            GroundTruth::Grid { grid } => Answer::Grid(grid.clone()),
            other => panic!("mental rotation instance with ground truth {other:?}"),
        }
    }

    fn random_answer(&self, instance: &PuzzleInstance, rng: &mut Rng) -> Answer {
        let (rows, cols) = match &instance.ground_truth {
            GroundTruth::Grid { grid } => (grid.n_rows(), grid.n_cols()),
            _ => (1, 1),
        };
        let cell = |rng: &mut Rng| {
            let k = rng.gen_range(0..=Color::ALL.len());
            Color::ALL.get(k).copied()
        };
        Answer::Grid(ColorGrid {
            rows: (0..rows).map(|_| (0..cols).map(|_| cell(rng)).collect()).collect(),
        })
    }

    fn canonical_state(&self, p: &TaskPayload) -> String {
        payload(p)
            .map(|p| describe_assembly(&p.assembly))
            .unwrap_or_default()
    }

    fn canonical_actions(&self, _instance: &PuzzleInstance) -> Vec<String> {
        Vec::new()
    }

    fn random_walk(&self, rng: &mut Rng, steps: usize) -> Result<ImagerySample> {
        let n = rng.gen_range(4..=8);
        let start = grow_assembly(rng, n, &Color::ALL);
        let turns: Vec<ObjectTurn> = (0..steps)
            .map(|_| ObjectTurn::all()[rng.gen_range(0..6)])
            .collect();
        let end = turns
            .iter()
            .fold(start.clone(), |a, t| a.rotated(&t.orientation()));
        let actions: Vec<String> = turns.iter().map(ToString::to_string).collect();
        Ok(ImagerySample {
            task: TaskKind::MentalRotation,
            seed: 0,
            initial_state: serde_json::to_value(&start)?,
            initial: describe_assembly(&start),
            question: format!(
                "Rotate the object as follows: {}. Afterwards the object is shifted so its lowest corner is at the origin. List its cubes.",
                actions.join(", ")
            ),
            actions,
            target: describe_assembly(&end),
            rationale: None,
        })
    }

    fn verify_imagery(&self, sample: &ImagerySample) -> Result<()> {
        let start: VoxelSet = serde_json::from_value(sample.initial_state.clone())?;
        let mut a = start;
        for act in &sample.actions {
            a = a.rotated(&act.parse::<ObjectTurn>()?.orientation());
        }
        if describe_assembly(&a) != sample.target {
            return Err(Error::InvalidSolution("target assembly does not match".into()));
        }
        Ok(())
    }

    fn narrate(&self, _instance: &PuzzleInstance, _solution: &[String]) -> Result<TrajectorySample> {
        Err(Error::UnsupportedTask("mental_rotation"))
    }

    fn verify_trajectory(&self, _instance: &PuzzleInstance, _sample: &TrajectorySample) -> Result<()> {
        Err(Error::UnsupportedTask("mental_rotation"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::polygon_count;

    fn brute_force(a: &VoxelSet, query: Dir3) -> Uniqueness {
        let dims = a.dims();
        let domain = Domain { dims };
        let n = domain.len();
        assert!(n <= 18, "box too large for the oracle");
        let target = eight_views(a);
        let mut answer: Option<ColorGrid> = None;
        for mask in 1u32..(1 << n) {
            let cells: Vec<Cell3> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| domain.cell(i)).collect();
            if !cells_face_connected(cells.iter().copied()) {
                continue;
            }
            let shape = VoxelSet::from_cells(cells.iter().map(|&c| (c, Color::Gray)));
            // Colors come from whichever face of the shape wins each triangle.
            let mut color_of: BTreeMap<Cell3, Color> = BTreeMap::new();
            let mut ok = true;
            for obs in &target {
                let Observation::Isometric { corner, image } = obs else { unreachable!() };
                let faces = isometric_project(&shape, Viewpoint::Isometric(*corner));
                let mut owner: BTreeMap<TriKey, (i32, Cell3, Dir3)> = BTreeMap::new();
                for f in &faces {
                    for t in face_triangles(f.cell, f.normal, *corner) {
                        let d = corner.depth(f.cell);
                        let e = owner.entry(t).or_insert((d, f.cell, f.normal));
                        if d > e.0 {
                            *e = (d, f.cell, f.normal);
                        }
                    }
                }
                if owner.len() != image.len() {
                    ok = false;
                    break;
                }
                for (t, (_, cell, normal)) in &owner {
                    match image.get(t) {
                        Some((n, c)) if n == normal => {
                            if *color_of.entry(*cell).or_insert(*c) != *c {
                                ok = false;
                            }
                        }
                        _ => ok = false,
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                continue;
            }
            let (right, up) = ortho_frame(query);
            let (rmin, umax, rows, cols) = domain.ortho_extent(query);
            let mut best: BTreeMap<(usize, usize), (i32, Cell3)> = BTreeMap::new();
            for &c in &cells {
                let key = ((umax - dot(c, up)) as usize, (dot(c, right) - rmin) as usize);
                let d = dot(c, query.vector());
                let e = best.entry(key).or_insert((d, c));
                if d > e.0 {
                    *e = (d, c);
                }
            }
            let mut grid = vec![vec![None; cols]; rows];
            for ((r, c), (_, cell)) in best {
                match color_of.get(&cell) {
                    Some(col) => grid[r][c] = Some(*col),
                    None => return Uniqueness::Ambiguous,
                }
            }
            let grid = ColorGrid { rows: grid };
            match &answer {
                None => answer = Some(grid),
                Some(g) if *g == grid => {}
                Some(_) => return Uniqueness::Ambiguous,
            }
        }
        assert!(answer.is_some(), "the assembly itself must be consistent");
        Uniqueness::Unique
    }

    #[test]
    fn single_cube_is_unique() {
        let a = VoxelSet::from_cells([([0, 0, 0], Color::Red)]);
        for side in Dir3::ALL {
            assert_eq!(check_assembly(&a, side, 1000), Uniqueness::Unique);
        }
    }

    #[test]
    fn assembly_is_connected_and_deterministic() {
        for seed in 0..200 {
            let a = generate_assembly(seed, 4, &Color::ALL);
            assert_eq!(a.len(), 4);
            assert!(a.is_face_connected());
            assert!(a.is_normalized());
            assert_eq!(a, generate_assembly(seed, 4, &Color::ALL));
        }
        for seed in 0..200 {
            let a = generate_assembly(seed, 13, &Color::ALL);
            let d = a.dims();
            assert!(d[0] * d[1] * d[2] >= 13);
        }
    }

    #[test]
    fn renders_one_polygon_per_visible_face() {
        let cube = VoxelSet::from_cells([([0, 0, 0], Color::Blue)]);
        for svg in render_views(&cube) {
            assert_eq!(polygon_count(&svg), 3);
        }
        let a = generate_assembly(3, 9, &Color::ALL);
        for (i, svg) in render_views(&a).into_iter().enumerate() {
            let corner = IsoCorner::new(i as u8).unwrap();
            let faces = isometric_project(&a, Viewpoint::Isometric(corner));
            assert_eq!(polygon_count(&svg), faces.len());
            assert!(svg.contains(&corner.label()));
            assert_eq!(svg, render_view(&a, corner));
        }
    }

    #[test]
    fn search_matches_brute_force_on_small_assemblies() {
        let mut checked = 0;
        let mut ambiguous = 0;
        for seed in 0..400 {
            let n = 4 + (seed % 3) as usize;
            let a = generate_assembly(seed, n, &Color::ALL[..3]);
            let d = a.dims();
            if d[0] * d[1] * d[2] > 14 {
                continue;
            }
            let query = Dir3::ALL[(seed % 6) as usize];
            let fast = check_assembly(&a, query, 1_000_000);
            assert_eq!(fast, brute_force(&a, query), "seed {seed}");
            checked += 1;
            ambiguous += (fast == Uniqueness::Ambiguous) as usize;
        }
        assert!(checked >= 50);
        // Small boxes leave nowhere to hide a voxel from all eight corners.
        assert_eq!(ambiguous, 0);
    }

    #[test]
    fn hidden_pit_floor_is_ambiguous() {
        // A full 3x3x3 block without its top centre: the pit floor is hidden
        // from every corner but seen from straight above.
        let mut cells = Vec::new();
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    if [x, y, z] != [1, 1, 2] {
                        cells.push(([x, y, z], Color::ALL[((x + 2 * y + 3 * z) % 8) as usize]));
                    }
                }
            }
        }
        let a = VoxelSet::from_cells(cells);
        assert_eq!(check_assembly(&a, Dir3::Up, 1_000_000), Uniqueness::Ambiguous);
        assert_eq!(check_assembly(&a, Dir3::East, 1_000_000), Uniqueness::Unique);
    }

    #[test]
    fn extra_orthographic_view_never_breaks_uniqueness() {
        for seed in 0..60 {
            let a = generate_assembly(seed, 5 + (seed % 5) as usize, &Color::ALL);
            let query = Dir3::ALL[(seed % 6) as usize];
            if check_assembly(&a, query, 200_000) != Uniqueness::Unique {
                continue;
            }
            for side in Dir3::ALL {
                let mut obs = eight_views(&a);
                obs.push(Observation::of(&a, Viewpoint::Orthographic(side)));
                assert_eq!(uniqueness_check(&obs, a.dims(), query, 200_000), Uniqueness::Unique);
            }
        }
    }

    #[test]
    fn generated_instances_are_unique_and_in_band() {
        let env = MentalRotationEnv::default();
        for tier in Tier::ALL {
            for seed in 0..15 {
                let (p, grid) = env.generate_instance(seed, tier).unwrap();
                assert!(env.config.band(tier).contains(p.assembly.len()));
                assert_eq!(grid, orthographic_project(&p.assembly, Viewpoint::Orthographic(p.query)));
                let colors = p.assembly.colors();
                assert!(grid.colors().all(|c| colors.contains(&c)));
            }
        }
    }

    #[test]
    fn object_turns_round_trip() {
        for t in ObjectTurn::all() {
            assert_eq!(t.to_string().parse::<ObjectTurn>().unwrap(), t);
            let o = t.orientation();
            assert_eq!(o.then(&o).then(&o).then(&o), Orientation::IDENTITY);
        }
    }
}
