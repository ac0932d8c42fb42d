//! The 24-element rotation group of the cube.
//!
//! An [`Orientation`] records, for each body face of a cube, which world
//! direction it currently points to. Rolling tips the cube over the bottom
//! edge on the side it rolls toward: rolling north sends the up face north,
//! the north face down, the down face south and the south face up.

use super::direction::{CardinalDirection, Dir3};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Orientation {
    /// `faces[body.index()]` is the world direction the body face points to.
    faces: [Dir3; 6],
}

impl Default for Orientation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation { faces: Dir3::ALL };

    /// Builds an orientation from an explicit body-face to world-direction table.
    /// Returns `None` unless the table is a proper rotation.
    pub fn from_faces(faces: [Dir3; 6]) -> Option<Self> {
        let o = Orientation { faces };
        Self::all().contains(&o).then_some(o)
    }

    pub fn faces(&self) -> [Dir3; 6] {
        self.faces
    }

    /// World direction of a body face.
    pub fn world_of(&self, body: Dir3) -> Dir3 {
        self.faces[body.index()]
    }

    /// Body face currently pointing in a world direction.
    pub fn body_at(&self, world: Dir3) -> Dir3 {
        Dir3::ALL
            .into_iter()
            .find(|&b| self.world_of(b) == world)
            .expect("orientation is a bijection")
    }

    /// Applies `self`, then `next`.
    pub fn then(&self, next: &Orientation) -> Orientation {
        let mut faces = self.faces;
        for f in faces.iter_mut() {
            *f = next.faces[f.index()];
        }
        Orientation { faces }
    }

    pub fn inverse(&self) -> Orientation {
        let mut faces = Dir3::ALL;
        for body in Dir3::ALL {
            faces[self.world_of(body).index()] = body;
        }
        Orientation { faces }
    }

    /// Rotation of a single quarter roll toward `d`.
    pub fn roll_of(d: CardinalDirection) -> Orientation {
        use Dir3::*;
        // Images of each world direction under the tip, in `Dir3::ALL` order.
        let faces = match d {
            CardinalDirection::North => [North, South, Down, Up, East, West],
            CardinalDirection::South => roll_of_inverse(CardinalDirection::North),
            CardinalDirection::East => [East, West, North, South, Down, Up],
            CardinalDirection::West => roll_of_inverse(CardinalDirection::East),
        };
        Orientation { faces }
    }

    pub fn roll(&self, d: CardinalDirection) -> Orientation {
        self.then(&Self::roll_of(d))
    }

    /// Rotates an integer vector (x east, y north, z up).
    pub fn rotate_vector(&self, v: [i32; 3]) -> [i32; 3] {
        let ex = self.world_of(Dir3::East).vector();
        let ey = self.world_of(Dir3::North).vector();
        let ez = self.world_of(Dir3::Up).vector();
        let mut out = [0; 3];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = v[0] * ex[i] + v[1] * ey[i] + v[2] * ez[i];
        }
        out
    }

    /// Every orientation reachable from the identity by rolls, in a fixed order.
    pub fn all() -> Vec<Orientation> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([Self::IDENTITY]);
        seen.insert(Self::IDENTITY);
        let mut order = vec![Self::IDENTITY];
        while let Some(o) = queue.pop_front() {
            for d in CardinalDirection::ALL {
                let next = o.roll(d);
                if seen.insert(next) {
                    order.push(next);
                    queue.push_back(next);
                }
            }
        }
        order
    }
}

fn roll_of_inverse(d: CardinalDirection) -> [Dir3; 6] {
    Orientation::roll_of(d).inverse().faces
}

/// Applies the first orientation, then the second.
pub fn compose(a: &Orientation, b: &Orientation) -> Orientation {
    a.then(b)
}

pub fn roll(o: &Orientation, d: CardinalDirection) -> Orientation {
    o.roll(d)
}
