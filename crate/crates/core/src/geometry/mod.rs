//! Shared 3-D primitives: directions, the cube rotation group, colored voxel
//! sets and their projections.

pub mod direction;
pub mod orientation;
pub mod palette;
pub mod projection;
pub mod voxel;

pub use direction::{CardinalDirection, Dir3};
pub use orientation::{compose, roll, Orientation};
pub use palette::Color;
pub use projection::{
    isometric_project, orthographic_project, ColorGrid, FaceList, IsoCorner, Viewpoint, VisibleFace,
};
pub use voxel::{Cell3, Voxel, VoxelSet};
