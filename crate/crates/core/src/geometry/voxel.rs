use super::direction::Dir3;
use super::orientation::Orientation;
use super::palette::Color;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub type Cell3 = [i32; 3];

/// A set of colored unit cubes on the integer lattice (x east, y north, z up).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Voxel>", into = "Vec<Voxel>")]
pub struct VoxelSet {
    cells: BTreeMap<Cell3, Color>,
}

/// Serialized form of one cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Voxel {
    pub cell: Cell3,
    pub color: Color,
}

impl From<Vec<Voxel>> for VoxelSet {
    fn from(v: Vec<Voxel>) -> Self {
        VoxelSet::from_cells(v.into_iter().map(|x| (x.cell, x.color)))
    }
}

impl From<VoxelSet> for Vec<Voxel> {
    fn from(v: VoxelSet) -> Self {
        v.cells.into_iter().map(|(cell, color)| Voxel { cell, color }).collect()
    }
}

impl VoxelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cells(cells: impl IntoIterator<Item = (Cell3, Color)>) -> Self {
        Self {
            cells: cells.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, cell: Cell3, color: Color) {
        self.cells.insert(cell, color);
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: &Cell3) -> bool {
        self.cells.contains_key(cell)
    }

    pub fn color(&self, cell: &Cell3) -> Option<Color> {
        self.cells.get(cell).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cell3, &Color)> {
        self.cells.iter()
    }

    /// Minimum and maximum corner (inclusive). `None` when empty.
    pub fn bounds(&self) -> Option<(Cell3, Cell3)> {
        let mut it = self.cells.keys();
        let first = *it.next()?;
        let (mut lo, mut hi) = (first, first);
        for c in it {
            for i in 0..3 {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
        }
        Some((lo, hi))
    }

    /// Extent along x, y, z.
    pub fn dims(&self) -> [i32; 3] {
        match self.bounds() {
            Some((lo, hi)) => [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1],
            None => [0, 0, 0],
        }
    }

    pub fn translated(&self, offset: Cell3) -> VoxelSet {
        VoxelSet::from_cells(
            self.cells
                .iter()
                .map(|(c, &col)| ([c[0] + offset[0], c[1] + offset[1], c[2] + offset[2]], col)),
        )
    }

    /// Shifts the set so the bounding-box minimum corner is the origin.
    pub fn normalized(&self) -> VoxelSet {
        match self.bounds() {
            Some((lo, _)) => self.translated([-lo[0], -lo[1], -lo[2]]),
            None => self.clone(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.bounds().is_none_or(|(lo, _)| lo == [0, 0, 0])
    }

    pub fn rotated(&self, o: &Orientation) -> VoxelSet {
        VoxelSet::from_cells(self.cells.iter().map(|(c, &col)| (o.rotate_vector(*c), col))).normalized()
    }

    pub fn neighbors(cell: Cell3) -> impl Iterator<Item = Cell3> {
        Dir3::ALL.into_iter().map(move |d| {
            let v = d.vector();
            [cell[0] + v[0], cell[1] + v[1], cell[2] + v[2]]
        })
    }

    /// Face-connectivity. Empty and single-cell sets count as connected.
    pub fn is_face_connected(&self) -> bool {
        cells_face_connected(self.cells.keys().copied())
    }

    pub fn colors(&self) -> BTreeSet<Color> {
        self.cells.values().copied().collect()
    }
}

pub(crate) fn cells_face_connected(cells: impl IntoIterator<Item = Cell3>) -> bool {
    let set: BTreeSet<Cell3> = cells.into_iter().collect();
    let Some(&start) = set.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for n in VoxelSet::neighbors(c) {
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}
