//! Accuracy and token statistics over evaluation records.

use super::runner::EvalRecord;
use crate::bench::Modality;
use crate::error::{Error, Result};
use crate::tasks::{TaskKind, Tier};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Order statistics; quantiles interpolate linearly between order
/// statistics (`h = (n - 1) p`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Quantile of sorted data at probability `p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            n: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Accuracy and completion tokens for one (task, tier, modality) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub task: TaskKind,
    pub tier: Tier,
    pub modality: Modality,
    pub n: usize,
    pub correct: usize,
    pub unparseable: usize,
    pub accuracy: f64,
    pub tokens: Summary,
}

/// Paired TQA minus VQA completion tokens over instances solved in both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub task: TaskKind,
    /// `None` pools all tiers.
    pub tier: Option<Tier>,
    pub delta: Summary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub cells: Vec<CellReport>,
    pub delta_token: Vec<DeltaReport>,
}

/// Builds the report. The result does not depend on record order.
pub fn aggregate(records: &[EvalRecord]) -> Report {
    let mut groups: BTreeMap<(TaskKind, Tier, Modality), Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.task, r.tier, r.modality)).or_default().push(r);
    }
    let cells = groups
        .into_iter()
        .map(|((task, tier, modality), rs)| {
            let correct = rs.iter().filter(|r| r.correct).count();
            let tokens: Vec<f64> = rs.iter().map(|r| r.completion_tokens as f64).collect();
            CellReport {
                task,
                tier,
                modality,
                n: rs.len(),
                correct,
                unparseable: rs
                    .iter()
                    .filter(|r| r.parse_status == super::parse::ParseStatus::Unparseable)
                    .count(),
                accuracy: correct as f64 / rs.len() as f64,
                tokens: Summary::of(&tokens).expect("groups are non-empty"),
            }
        })
        .collect();
    Report {
        cells,
        delta_token: delta_token(records),
    }
}

/// Per-instance token differences, keyed by (task, tier).
pub fn paired_deltas(records: &[EvalRecord]) -> BTreeMap<(TaskKind, Tier), Vec<f64>> {
    let mut tqa: HashMap<&str, &EvalRecord> = HashMap::new();
    let mut vqa: HashMap<&str, &EvalRecord> = HashMap::new();
    for r in records.iter().filter(|r| r.correct) {
        match r.modality {
            Modality::Tqa => tqa.insert(&r.instance_id, r),
            Modality::Vqa => vqa.insert(&r.instance_id, r),
            Modality::Vtqa => None,
        };
    }
    let mut out: BTreeMap<(TaskKind, Tier), Vec<f64>> = BTreeMap::new();
    for (id, t) in &tqa {
        if let Some(v) = vqa.get(id) {
            out.entry((t.task, t.tier))
                .or_default()
                .push(t.completion_tokens as f64 - v.completion_tokens as f64);
        }
    }
    out
}

fn delta_token(records: &[EvalRecord]) -> Vec<DeltaReport> {
    let by_cell = paired_deltas(records);
    let mut pooled: BTreeMap<TaskKind, Vec<f64>> = BTreeMap::new();
    let mut out = Vec::new();
    for ((task, tier), d) in &by_cell {
        pooled.entry(*task).or_default().extend(d);
        out.push(DeltaReport {
            task: *task,
            tier: Some(*tier),
            delta: Summary::of(d).expect("cells are non-empty"),
        });
    }
    for (task, d) in pooled {
        out.push(DeltaReport {
            task,
            tier: None,
            delta: Summary::of(&d).expect("pooled cells are non-empty"),
        });
    }
    out
}

/// Writes `records.jsonl`, `summary.csv`, `delta_token.csv` and
/// `report.json` under `dir`.
pub fn write_report(dir: &Path, records: &[EvalRecord], report: &Report) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = std::io::BufWriter::new(fs::File::create(dir.join("records.jsonl"))?);
    for r in records {
        f.write_all(serde_json::to_string(r)?.as_bytes())?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(csv_err)?;
    w.write_record([
        "task", "tier", "modality", "n", "correct", "unparseable", "accuracy", "tokens_mean", "tokens_q1",
        "tokens_median", "tokens_q3",
    ])
    .map_err(csv_err)?;
    for c in &report.cells {
        w.write_record([
            c.task.name().to_string(),
            c.tier.name().to_string(),
            c.modality.name().to_string(),
            c.n.to_string(),
            c.correct.to_string(),
            c.unparseable.to_string(),
            format!("{:.4}", c.accuracy),
            format!("{:.1}", c.tokens.mean),
            format!("{:.1}", c.tokens.q1),
            format!("{:.1}", c.tokens.median),
            format!("{:.1}", c.tokens.q3),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("delta_token.csv")).map_err(csv_err)?;
    w.write_record(["task", "tier", "n", "mean", "min", "q1", "median", "q3", "max"])
        .map_err(csv_err)?;
    for d in &report.delta_token {
        let s = d.delta;
        w.write_record([
            d.task.name().to_string(),
            d.tier.map_or("all", Tier::name).to_string(),
            s.n.to_string(),
            format!("{:.1}", s.mean),
            format!("{:.1}", s.min),
            format!("{:.1}", s.q1),
            format!("{:.1}", s.median),
            format!("{:.1}", s.q3),
            format!("{:.1}", s.max),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}
