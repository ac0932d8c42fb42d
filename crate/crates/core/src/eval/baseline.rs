//! Chance-level baselines.

use crate::bench::PuzzleInstance;
use crate::error::{Error, Result};
use crate::geometry::Color;
use crate::tasks::GroundTruth;
use std::collections::HashMap;

fn label(instance: &PuzzleInstance) -> Result<String> {
    match &instance.ground_truth {
        GroundTruth::Color { color } => Ok(color.name().to_string()),
        GroundTruth::Grid { grid } => Ok(grid.to_string()),
        GroundTruth::Plan { .. } => Err(Error::UnsupportedTask(instance.task.name())),
    }
}

/// Accuracy of always giving the most frequent ground-truth label. Plan
/// tasks have no label and are rejected. An empty set scores 0.
pub fn baseline_frequency(instances: &[PuzzleInstance]) -> Result<f64> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for i in instances {
        *counts.entry(label(i)?).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    Ok(if instances.is_empty() {
        0.0
    } else {
        best as f64 / instances.len() as f64
    })
}

/// Expected accuracy of a uniform guess of the right shape: one of six cube
/// colors, or every grid cell drawn from the palette plus empty.
pub fn baseline_random(instances: &[PuzzleInstance]) -> Result<f64> {
    let mut total = 0.0;
    for i in instances {
        total += match &i.ground_truth {
            GroundTruth::Color { .. } => 1.0 / Color::CUBE.len() as f64,
            GroundTruth::Grid { grid } => {
                let cells = (grid.n_rows() * grid.n_cols()) as i32;
                (1.0 / (Color::ALL.len() + 1) as f64).powi(cells)
            }
            GroundTruth::Plan { .. } => return Err(Error::UnsupportedTask(i.task.name())),
        };
    }
    Ok(if instances.is_empty() {
        0.0
    } else {
        total / instances.len() as f64
    })
}
