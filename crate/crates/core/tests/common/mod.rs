//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod data;

use spatial_bench::geometry::projection::ortho_frame;
use spatial_bench::geometry::{CardinalDirection, Color, Dir3, VoxelSet};
use std::collections::BTreeMap;

/// A physical die: which color currently faces each world direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Die(pub BTreeMap<&'static str, Color>);

impl Die {
    /// U white, D yellow, N green, S blue, E red, W orange.
    pub fn standard() -> Self {
        Die(BTreeMap::from([
            ("up", Color::White),
            ("down", Color::Yellow),
            ("north", Color::Green),
            ("south", Color::Blue),
            ("east", Color::Red),
            ("west", Color::Orange),
        ]))
    }

    /// Tips the die one cell toward `d`: the top face goes to `d`, the face
    /// on `d` goes down, the bottom comes up on the far side.
    pub fn roll(&self, d: CardinalDirection) -> Self {
        let (fwd, back) = match d {
            CardinalDirection::North => ("north", "south"),
            CardinalDirection::South => ("south", "north"),
            CardinalDirection::East => ("east", "west"),
            CardinalDirection::West => ("west", "east"),
        };
        let o = &self.0;
        let mut n = o.clone();
        n.insert(fwd, o["up"]);
        n.insert("down", o[fwd]);
        n.insert(back, o["down"]);
        n.insert("up", o[back]);
        Die(n)
    }

    /// A die showing `color(d)` toward each world direction `d`.
    pub fn from_fn(color: impl Fn(Dir3) -> Color) -> Self {
        Die(Dir3::ALL.into_iter().map(|d| (d.name(), color(d))).collect())
    }

    pub fn facing(&self, world: Dir3) -> Color {
        self.0[world.name()]
    }
}

/// Order of a permutation given as `perm[dest] = src`, by repeated
/// composition until the identity comes back.
pub fn permutation_order(perm: &[u8]) -> usize {
    let id: Vec<u8> = (0..perm.len() as u8).collect();
    let mut cur = perm.to_vec();
    let mut k = 1;
    while cur != id {
        cur = cur.iter().map(|&s| perm[s as usize]).collect();
        k += 1;
    }
    k
}

fn dot(a: [i32; 3], b: [i32; 3]) -> i32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Nearest voxel along each line of sight, over the box cross-section.
pub fn oracle_view(a: &VoxelSet, side: Dir3) -> Vec<Vec<Option<Color>>> {
    let (right, up) = ortho_frame(side);
    let toward = side.vector();
    let (lo, hi) = a.bounds().unwrap();
    let mut corners = Vec::new();
    for x in [lo[0], hi[0]] {
        for y in [lo[1], hi[1]] {
            for z in [lo[2], hi[2]] {
                corners.push([x, y, z]);
            }
        }
    }
    let span = |ax: [i32; 3]| {
        let v: Vec<i32> = corners.iter().map(|&c| dot(c, ax)).collect();
        (*v.iter().min().unwrap(), *v.iter().max().unwrap())
    };
    let (r0, r1) = span(right);
    let (u0, u1) = span(up);
    (u0..=u1)
        .rev()
        .map(|u| {
            (r0..=r1)
                .map(|r| {
                    a.iter()
                        .filter(|(c, _)| dot(**c, right) == r && dot(**c, up) == u)
                        .max_by_key(|(c, _)| dot(**c, toward))
                        .map(|(_, col)| *col)
                })
                .collect()
        })
        .collect()
}
