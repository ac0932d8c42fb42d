//! Parallel projections of voxel sets.
//!
//! Orthographic views are named by the side the camera sits on: `Up` is the
//! top view, `South` the front view. Images are never mirrored: for each side
//! the image axes are
//!
//! | camera | right | up |
//! |--------|-------|----|
//! | Up     | +x    | +y |
//! | Down   | -x    | +y |
//! | South  | +x    | +z |
//! | North  | -x    | +z |
//! | East   | +y    | +z |
//! | West   | -y    | +z |
//!
//! Row 0 is the top of the image and column 0 its left edge.
//!
//! Isometric corner `i` places the camera in the octant with signs
//! `(bit0 ? -1 : 1, bit1 ? -1 : 1, bit2 ? -1 : 1)` for `(x, y, z)`. A lattice
//! point projects to integer screen coordinates `(h, v)` with `v` pointing up;
//! one unit step in x or y moves two units horizontally and one vertically, a
//! step in z moves two units vertically (the 2:1 pixel-art basis).

use super::direction::Dir3;
use super::palette::Color;
use super::voxel::{Cell3, VoxelSet};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IsoCorner(u8);

impl IsoCorner {
    pub fn new(index: u8) -> Option<Self> {
        (index < 8).then_some(Self(index))
    }

    pub fn all() -> impl Iterator<Item = IsoCorner> {
        (0..8).map(IsoCorner)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Camera octant signs for x, y, z.
    pub fn signs(self) -> [i32; 3] {
        let s = |bit: u8| if self.0 & bit == 0 { 1 } else { -1 };
        [s(1), s(2), s(4)]
    }

    /// The three face normals that point toward the camera.
    pub fn facing_normals(self) -> [Dir3; 3] {
        let [sx, sy, sz] = self.signs();
        [
            if sx > 0 { Dir3::East } else { Dir3::West },
            if sy > 0 { Dir3::North } else { Dir3::South },
            if sz > 0 { Dir3::Up } else { Dir3::Down },
        ]
    }

    pub fn label(self) -> String {
        let [sx, sy, sz] = self.signs();
        format!(
            "view {}: from {}-{}-{}",
            self.0,
            if sz > 0 { "above" } else { "below" },
            if sy > 0 { "north" } else { "south" },
            if sx > 0 { "east" } else { "west" },
        )
    }

    /// Depth of a point toward the camera (larger is nearer).
    pub fn depth(self, p: Cell3) -> i32 {
        let s = self.signs();
        s[0] * p[0] + s[1] * p[1] + s[2] * p[2]
    }

    /// Screen lattice coordinates of a lattice point.
    pub fn screen(self, p: Cell3) -> (i32, i32) {
        let [sx, sy, sz] = self.signs();
        let h = 2 * (-sy * p[0] + sx * p[1]);
        let v = 2 * p[2] - sz * (sx * p[0] + sy * p[1]);
        (h, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Viewpoint {
    Isometric(IsoCorner),
    /// Camera side for an axis-aligned view.
    Orthographic(Dir3),
}

impl Viewpoint {
    pub fn isometric_corners() -> Vec<Viewpoint> {
        IsoCorner::all().map(Viewpoint::Isometric).collect()
    }

    pub fn orthographic_axes() -> Vec<Viewpoint> {
        Dir3::ALL.into_iter().map(Viewpoint::Orthographic).collect()
    }
}

/// Human-facing name of an orthographic view.
pub fn ortho_view_name(side: Dir3) -> &'static str {
    match side {
        Dir3::Up => "top",
        Dir3::Down => "bottom",
        Dir3::South => "front",
        Dir3::North => "back",
        Dir3::East => "right",
        Dir3::West => "left",
    }
}

/// `(right, up)` image axes for an orthographic camera side.
pub fn ortho_frame(side: Dir3) -> ([i32; 3], [i32; 3]) {
    match side {
        Dir3::Up => ([1, 0, 0], [0, 1, 0]),
        Dir3::Down => ([-1, 0, 0], [0, 1, 0]),
        Dir3::South => ([1, 0, 0], [0, 0, 1]),
        Dir3::North => ([-1, 0, 0], [0, 0, 1]),
        Dir3::East => ([0, 1, 0], [0, 0, 1]),
        Dir3::West => ([0, -1, 0], [0, 0, 1]),
    }
}

fn dot(a: [i32; 3], b: [i32; 3]) -> i32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// A rows×cols grid of colors; `None` is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColorGrid {
    pub rows: Vec<Vec<Option<Color>>>,
}

impl ColorGrid {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn colors(&self) -> impl Iterator<Item = Color> + '_ {
        self.rows.iter().flatten().filter_map(|c| *c)
    }
}

impl fmt::Display for ColorGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let tokens: Vec<&str> = row.iter().map(|c| c.map_or("empty", Color::name)).collect();
            f.write_str(&tokens.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for ColorGrid {
    type Err = String;

    /// One row per non-blank line, tokens separated by whitespace, commas or
    /// pipes. `empty`, `.`, `-`, `_` and `none` denote an empty cell.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut rows = Vec::new();
        for line in s.lines() {
            let tokens: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',' || c == '|')
                .filter(|t| !t.is_empty())
                .collect();
            if tokens.is_empty() {
                continue;
            }
            let row = tokens
                .iter()
                .map(|t| match t.to_ascii_lowercase().as_str() {
                    "empty" | "." | "-" | "_" | "none" | "x" => Ok(None),
                    other => Color::from_word(other)
                        .map(Some)
                        .ok_or_else(|| format!("unknown grid token `{t}`")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err("empty grid".into());
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err("ragged grid".into());
        }
        Ok(ColorGrid { rows })
    }
}

/// Projects along an axis; each cell takes the color of the nearest voxel.
///
/// The grid spans the bounding-box cross-section perpendicular to the axis.
/// Panics if `view` is not orthographic.
pub fn orthographic_project(v: &VoxelSet, view: Viewpoint) -> ColorGrid {
    let Viewpoint::Orthographic(side) = view else {
        panic!("orthographic_project needs an orthographic viewpoint, got {view:?}");
    };
    let Some((lo, hi)) = v.bounds() else {
        return ColorGrid { rows: Vec::new() };
    };
    let (right, up) = ortho_frame(side);
    let toward = side.vector();
    let corners = [lo, hi];
    let span = |axis: [i32; 3]| {
        let vals: Vec<i32> = (0..8)
            .map(|i| {
                let p = [corners[i & 1][0], corners[(i >> 1) & 1][1], corners[(i >> 2) & 1][2]];
                dot(p, axis)
            })
            .collect();
        (*vals.iter().min().unwrap(), *vals.iter().max().unwrap())
    };
    let (rmin, rmax) = span(right);
    let (umin, umax) = span(up);
    let n_cols = (rmax - rmin + 1) as usize;
    let n_rows = (umax - umin + 1) as usize;
    let mut best: Vec<Vec<Option<(i32, Color)>>> = vec![vec![None; n_cols]; n_rows];
    for (&c, &color) in v.iter() {
        let col = (dot(c, right) - rmin) as usize;
        let row = (umax - dot(c, up)) as usize;
        let depth = dot(c, toward);
        let slot = &mut best[row][col];
        if slot.is_none_or(|(d, _)| depth > d) {
            *slot = Some((depth, color));
        }
    }
    ColorGrid {
        rows: best
            .into_iter()
            .map(|r| r.into_iter().map(|s| s.map(|(_, c)| c)).collect())
            .collect(),
    }
}

/// One visible face in an isometric view.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VisibleFace {
    pub cell: Cell3,
    pub normal: Dir3,
    pub color: Color,
    /// Screen lattice coordinates of the four corners, in cyclic order.
    pub polygon: [(i32, i32); 4],
}

/// Visible faces of one isometric view, ordered back to front.
pub type FaceList = Vec<VisibleFace>;

/// Key of a unit triangle of the screen lattice: three times its centroid.
pub type TriKey = (i32, i32);

/// Lattice corners of a unit face in cyclic order.
pub fn face_corners(cell: Cell3, normal: Dir3) -> [Cell3; 4] {
    let n = normal.vector();
    let axis = n.iter().position(|&x| x != 0).expect("unit normal");
    let (j, k) = match axis {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    let mut base = cell;
    if n[axis] > 0 {
        base[axis] += 1;
    }
    let at = |dj: i32, dk: i32| {
        let mut p = base;
        p[j] += dj;
        p[k] += dk;
        p
    };
    [at(0, 0), at(1, 0), at(1, 1), at(0, 1)]
}

pub fn face_polygon(cell: Cell3, normal: Dir3, corner: IsoCorner) -> [(i32, i32); 4] {
    face_corners(cell, normal).map(|p| corner.screen(p))
}

/// The two screen-lattice triangles covered by a camera-facing face.
///
/// The face splits along the diagonal joining its nearest and farthest
/// corners; that diagonal is foreshortened, so both halves are unit lattice
/// triangles.
pub fn face_triangles(cell: Cell3, normal: Dir3, corner: IsoCorner) -> [TriKey; 2] {
    let pts = face_corners(cell, normal);
    let m = (0..4).min_by_key(|&i| corner.depth(pts[i])).unwrap();
    let s = pts.map(|p| corner.screen(p));
    let key = |a: usize, b: usize, c: usize| {
        (s[a].0 + s[b].0 + s[c].0, s[a].1 + s[b].1 + s[c].1)
    };
    [
        key(m, (m + 1) % 4, (m + 2) % 4),
        key(m, (m + 3) % 4, (m + 2) % 4),
    ]
}

/// Exterior faces of `v` that point toward the camera, in painter order.
pub(crate) fn camera_facing_faces(v: &VoxelSet, corner: IsoCorner) -> Vec<(Cell3, Dir3, Color)> {
    let mut faces = Vec::new();
    for (&c, &color) in v.iter() {
        for n in corner.facing_normals() {
            let d = n.vector();
            let neighbor = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
            if !v.contains(&neighbor) {
                faces.push((c, n, color));
            }
        }
    }
    faces.sort_by_key(|&(c, n, _)| (corner.depth(c), c, n));
    faces
}

/// Visible faces under the isometric camera `view`, ordered back to front.
///
/// A face is kept when it is the nearest surface for at least one of its two
/// screen triangles; faces wholly covered by nearer voxels are dropped.
/// Panics if `view` is not isometric.
pub fn isometric_project(v: &VoxelSet, view: Viewpoint) -> FaceList {
    let Viewpoint::Isometric(corner) = view else {
        panic!("isometric_project needs an isometric viewpoint, got {view:?}");
    };
    let faces = camera_facing_faces(v, corner);
    // Cubes of equal depth never overlap on screen, so voxel depth decides
    // ownership of every triangle.
    let mut owner: BTreeMap<TriKey, usize> = BTreeMap::new();
    for (i, &(c, n, _)) in faces.iter().enumerate() {
        for t in face_triangles(c, n, corner) {
            owner
                .entry(t)
                .and_modify(|o| {
                    if corner.depth(faces[*o].0) < corner.depth(c) {
                        *o = i;
                    }
                })
                .or_insert(i);
        }
    }
    let mut visible = vec![false; faces.len()];
    for &i in owner.values() {
        visible[i] = true;
    }
    faces
        .into_iter()
        .zip(visible)
        .filter(|(_, keep)| *keep)
        .map(|((cell, normal, color), _)| VisibleFace {
            cell,
            normal,
            color,
            polygon: face_polygon(cell, normal, corner),
        })
        .collect()
}

/// What a rendered view shows: the face orientation and color on each
/// screen triangle. Background triangles are absent.
pub type ViewImage = BTreeMap<TriKey, (Dir3, Color)>;

pub fn view_image(faces: &FaceList, corner: IsoCorner) -> ViewImage {
    let mut img: BTreeMap<TriKey, (i32, Dir3, Color)> = BTreeMap::new();
    for f in faces {
        let depth = corner.depth(f.cell);
        for t in face_triangles(f.cell, f.normal, corner) {
            let e = img.entry(t).or_insert((depth, f.normal, f.color));
            if depth > e.0 {
                *e = (depth, f.normal, f.color);
            }
        }
    }
    img.into_iter().map(|(k, (_, n, c))| (k, (n, c))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(cells: &[Cell3]) -> VoxelSet {
        VoxelSet::from_cells(cells.iter().map(|&c| (c, Color::Red)))
    }

    #[test]
    fn single_voxel_front_view() {
        let g = orthographic_project(&cube(&[[0, 0, 0]]), Viewpoint::Orthographic(Dir3::South));
        assert_eq!(g.rows, vec![vec![Some(Color::Red)]]);
    }

    #[test]
    fn nearest_voxel_wins() {
        // Front camera sits at -y, so y = 0 is nearer than y = 1.
        let v = VoxelSet::from_cells([([0, 0, 0], Color::Red), ([0, 1, 0], Color::Blue)]);
        let front = orthographic_project(&v, Viewpoint::Orthographic(Dir3::South));
        assert_eq!(front.rows, vec![vec![Some(Color::Red)]]);
        let back = orthographic_project(&v, Viewpoint::Orthographic(Dir3::North));
        assert_eq!(back.rows, vec![vec![Some(Color::Blue)]]);
    }

    #[test]
    fn l_tromino_top_view_matches_min_depth_enumeration() {
        let v = VoxelSet::from_cells([
            ([0, 0, 0], Color::Red),
            ([1, 0, 0], Color::Green),
            ([0, 1, 0], Color::Blue),
            ([0, 1, 1], Color::White),
        ]);
        let g = orthographic_project(&v, Viewpoint::Orthographic(Dir3::Up));
        // Row 0 is north (y = 1), columns run east.
        let expected = vec![
            vec![Some(Color::White), None],
            vec![Some(Color::Red), Some(Color::Green)],
        ];
        assert_eq!(g.rows, expected);
    }

    #[test]
    fn grid_text_round_trip() {
        let g = ColorGrid {
            rows: vec![vec![Some(Color::Red), None], vec![Some(Color::Gray), Some(Color::Blue)]],
        };
        assert_eq!(g.to_string().parse::<ColorGrid>().unwrap(), g);
        assert!("red\nred blue".parse::<ColorGrid>().is_err());
    }

    #[test]
    fn single_cube_shows_three_faces_from_every_corner() {
        let v = cube(&[[0, 0, 0]]);
        for view in Viewpoint::isometric_corners() {
            assert_eq!(isometric_project(&v, view).len(), 3);
        }
    }

    #[test]
    fn tower_shows_five_faces() {
        let v = cube(&[[0, 0, 0], [0, 0, 1]]);
        for view in Viewpoint::isometric_corners() {
            assert_eq!(isometric_project(&v, view).len(), 5);
        }
    }

    #[test]
    fn shared_faces_are_never_emitted() {
        let v = cube(&[[0, 0, 0], [1, 0, 0]]);
        for view in Viewpoint::isometric_corners() {
            for f in isometric_project(&v, view) {
                let is_shared = (f.cell == [0, 0, 0] && f.normal == Dir3::East)
                    || (f.cell == [1, 0, 0] && f.normal == Dir3::West);
                assert!(!is_shared);
            }
        }
    }

    #[test]
    fn fully_covered_face_is_dropped() {
        // From corner 0 the top of the far voxel is hidden behind a staircase.
        let v = cube(&[[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [1, 1, 1], [1, 0, 1], [0, 1, 1]]);
        let faces = isometric_project(&v, Viewpoint::Isometric(IsoCorner::new(0).unwrap()));
        assert!(faces.iter().all(|f| f.cell != [0, 0, 0]));
    }

    #[test]
    fn unit_face_triangles_are_distinct_lattice_triangles() {
        for corner in IsoCorner::all() {
            let mut keys: Vec<TriKey> = corner
                .facing_normals()
                .iter()
                .flat_map(|&n| face_triangles([0, 0, 0], n, corner))
                .collect();
            keys.sort();
            keys.dedup();
            assert_eq!(keys.len(), 6);
        }
    }
}
