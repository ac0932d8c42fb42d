//! Procedurally generated spatial-reasoning puzzles.
//!
//! Five task environments (cube rolling, Rubik's cube, mental rotation,
//! Sokoban and Klotski) sit behind the [`tasks::TaskEnv`] trait and are looked
//! up by name in a [`tasks::TaskRegistry`]. On top of them sit dataset
//! assembly ([`bench`]), evaluation of answer-producing agents ([`eval`]) and
//! training-data synthesis ([`synth`]).

pub mod bench;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod render;
pub mod rng;
pub mod synth;
pub mod tasks;

pub use error::{Error, Result};

/// Bumped whenever generated bytes for a given seed may change.
pub const GENERATOR_VERSION: &str = "1.0.0";
