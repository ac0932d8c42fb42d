use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A direction on the ground plane. North is +y, East is +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CardinalDirection {
    North,
    South,
    East,
    West,
}

impl CardinalDirection {
    pub const ALL: [CardinalDirection; 4] = [Self::North, Self::East, Self::South, Self::West];

    pub fn opposite(self) -> Self {
        match self {
            Self::North => Self::South,
            Self::South => Self::North,
            Self::East => Self::West,
            Self::West => Self::East,
        }
    }

    pub fn turn_left(self) -> Self {
        match self {
            Self::North => Self::West,
            Self::West => Self::South,
            Self::South => Self::East,
            Self::East => Self::North,
        }
    }

    pub fn turn_right(self) -> Self {
        self.turn_left().opposite()
    }

    /// Unit step in `(dx, dy)` with y pointing north.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Self::North => (0, 1),
            Self::South => (0, -1),
            Self::East => (1, 0),
            Self::West => (-1, 0),
        }
    }

    /// Screen-style step `(drow, dcol)` where row 0 is the top (north) edge.
    pub fn grid_delta(self) -> (i32, i32) {
        let (dx, dy) = self.delta();
        (-dy, dx)
    }

    /// Single-letter compass code: N, S, E, W.
    pub fn compass_letter(self) -> char {
        match self {
            Self::North => 'N',
            Self::South => 'S',
            Self::East => 'E',
            Self::West => 'W',
        }
    }

    /// Screen letter used by the grid puzzles: U, D, R, L.
    pub fn screen_letter(self) -> char {
        match self {
            Self::North => 'U',
            Self::South => 'D',
            Self::East => 'R',
            Self::West => 'L',
        }
    }

    pub fn from_screen_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'U' => Some(Self::North),
            'D' => Some(Self::South),
            'R' => Some(Self::East),
            'L' => Some(Self::West),
            _ => None,
        }
    }

    pub fn from_compass_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'N' => Some(Self::North),
            'S' => Some(Self::South),
            'E' => Some(Self::East),
            'W' => Some(Self::West),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::North => "north",
            Self::South => "south",
            Self::East => "east",
            Self::West => "west",
        }
    }

    pub fn to_dir3(self) -> Dir3 {
        match self {
            Self::North => Dir3::North,
            Self::South => Dir3::South,
            Self::East => Dir3::East,
            Self::West => Dir3::West,
        }
    }
}

impl fmt::Display for CardinalDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CardinalDirection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        match lower.as_str() {
            "north" | "n" => Ok(Self::North),
            "south" | "s" => Ok(Self::South),
            "east" | "e" => Ok(Self::East),
            "west" | "w" => Ok(Self::West),
            _ => Err(format!("unknown direction `{t}`")),
        }
    }
}

/// One of the six axis directions in 3-D. Up is +z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir3 {
    Up,
    Down,
    North,
    South,
    East,
    West,
}

impl Dir3 {
    pub const ALL: [Dir3; 6] = [
        Self::Up,
        Self::Down,
        Self::North,
        Self::South,
        Self::East,
        Self::West,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn vector(self) -> [i32; 3] {
        match self {
            Self::Up => [0, 0, 1],
            Self::Down => [0, 0, -1],
            Self::North => [0, 1, 0],
            Self::South => [0, -1, 0],
            Self::East => [1, 0, 0],
            Self::West => [-1, 0, 0],
        }
    }

    pub fn from_vector(v: [i32; 3]) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.vector() == v)
    }

    pub fn opposite(self) -> Self {
        let [x, y, z] = self.vector();
        Self::from_vector([-x, -y, -z]).expect("axis vectors are closed under negation")
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Up => "up",
            Self::Down => "down",
            Self::North => "north",
            Self::South => "south",
            Self::East => "east",
            Self::West => "west",
        }
    }
}

impl fmt::Display for Dir3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dir3 {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|d| d.name() == lower)
            .ok_or_else(|| format!("unknown direction `{}`", s.trim()))
    }
}
