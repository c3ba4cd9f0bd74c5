//! Lifetime statistics and machine-readable output: per-round CSV series
//! and replicate aggregation for lifetime milestones.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::MetricsError;
use crate::model::Variant;

/// One row of the per-round output series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round: u32,
    pub alive: u32,
    pub dead: u32,
    pub ch_count: u32,
    pub total_residual_j: f64,
    pub avg_energy_per_alive_j: f64,
    pub sink_x: f64,
    pub sink_y: f64,
    /// Cumulative bits delivered to the sink since round 1.
    pub bits_delivered: u64,
}

/// Lifetime milestones of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifetimeSummary {
    pub scenario: Variant,
    pub dim: f64,
    pub seed: u64,
    pub first_dead_round: Option<u32>,
    pub quarter_dead_round: Option<u32>,
    pub last_alive_round: u32,
}

impl LifetimeSummary {
    pub fn from_records(
        records: &[RoundRecord],
        scenario: Variant,
        dim: f64,
        seed: u64,
        num_nodes: u32,
    ) -> LifetimeSummary {
        LifetimeSummary {
            scenario,
            dim,
            seed,
            first_dead_round: first_dead_round(records),
            quarter_dead_round: quarter_dead_round(records, num_nodes),
            last_alive_round: records
                .iter()
                .rev()
                .find(|r| r.alive > 0)
                .map(|r| r.round)
                .unwrap_or(0),
        }
    }
}

/// Earliest round in which any node was dead, if a death ever occurred.
pub fn first_dead_round(records: &[RoundRecord]) -> Option<u32> {
    records.iter().find(|r| r.dead > 0).map(|r| r.round)
}

/// Earliest round with at least a quarter of the population dead
/// (threshold `ceil(0.25 * num_nodes)` nodes).
pub fn quarter_dead_round(records: &[RoundRecord], num_nodes: u32) -> Option<u32> {
    let threshold = num_nodes.div_ceil(4);
    records
        .iter()
        .find(|r| r.dead >= threshold)
        .map(|r| r.round)
}

pub const ROUND_CSV_HEADER: &str =
    "round,alive,dead,ch_count,total_residual_j,avg_energy_per_alive_j,sink_x,sink_y,bits_delivered";

/// Render the record series as CSV text. Floats carry ten significant
/// digits so the series can be re-parsed without visible loss.
pub fn round_csv_string(records: &[RoundRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(ROUND_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{:.9e},{:.9e},{:.9e},{:.9e},{}\n",
            r.round,
            r.alive,
            r.dead,
            r.ch_count,
            r.total_residual_j,
            r.avg_energy_per_alive_j,
            r.sink_x,
            r.sink_y,
            r.bits_delivered,
        ));
    }
    out
}

/// Write the record series as CSV to `destination`.
pub fn write_round_csv(records: &[RoundRecord], destination: &Path) -> Result<(), MetricsError> {
    let wrap = |source: std::io::Error| MetricsError::Write {
        path: destination.to_path_buf(),
        source,
    };
    let file = File::create(destination).map_err(wrap)?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(round_csv_string(records).as_bytes())
        .map_err(wrap)?;
    writer.flush().map_err(wrap)
}

/// Parse a round CSV back into records. Tolerates no deviations from the
/// schema emitted by [`round_csv_string`] except trailing newlines.
pub fn read_round_csv(text: &str) -> Result<Vec<RoundRecord>, MetricsError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == ROUND_CSV_HEADER => {}
        Some((_, other)) => {
            return Err(MetricsError::CsvParse {
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
        None => {
            return Err(MetricsError::CsvParse {
                line: 1,
                message: "empty input".into(),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(MetricsError::CsvParse {
                line: lineno,
                message: format!("expected 9 fields, found {}", fields.len()),
            });
        }
        fn num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, MetricsError> {
            s.parse().map_err(|_| MetricsError::CsvParse {
                line,
                message: format!("bad {what}: {s:?}"),
            })
        }
        let float = |s: &str, what: &str| -> Result<f64, MetricsError> {
            let v: f64 = num(s, lineno, what)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(MetricsError::CsvParse {
                    line: lineno,
                    message: format!("non-finite {what}: {s:?}"),
                })
            }
        };
        records.push(RoundRecord {
            round: num(fields[0], lineno, "round")?,
            alive: num(fields[1], lineno, "alive")?,
            dead: num(fields[2], lineno, "dead")?,
            ch_count: num(fields[3], lineno, "ch_count")?,
            total_residual_j: float(fields[4], "total_residual_j")?,
            avg_energy_per_alive_j: float(fields[5], "avg_energy_per_alive_j")?,
            sink_x: float(fields[6], "sink_x")?,
            sink_y: float(fields[7], "sink_y")?,
            bits_delivered: num(fields[8], lineno, "bits_delivered")?,
        });
    }
    Ok(records)
}

/// Median/min/max of one milestone over a replicate set, with runs where
/// the milestone never occurred counted separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricAggregate {
    pub median: Option<u32>,
    pub min: Option<u32>,
    pub max: Option<u32>,
    pub undefined_count: usize,
}

impl MetricAggregate {
    fn over(values: impl Iterator<Item = Option<u32>>) -> MetricAggregate {
        let mut defined: Vec<u32> = Vec::new();
        let mut undefined_count = 0;
        for v in values {
            match v {
                Some(x) => defined.push(x),
                None => undefined_count += 1,
            }
        }
        defined.sort_unstable();
        if defined.is_empty() {
            return MetricAggregate {
                median: None,
                min: None,
                max: None,
                undefined_count,
            };
        }
        // Lower-median convention for even counts.
        let median = defined[(defined.len() - 1) / 2];
        MetricAggregate {
            median: Some(median),
            min: Some(defined[0]),
            max: Some(defined[defined.len() - 1]),
            undefined_count,
        }
    }
}

/// Aggregated milestones over all replicates of one scenario/dimension cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateAggregate {
    pub scenario: Variant,
    pub dim: f64,
    pub runs: usize,
    pub first_dead_round: MetricAggregate,
    pub quarter_dead_round: MetricAggregate,
    pub last_alive_round: MetricAggregate,
}

/// Aggregate replicate summaries of one scenario/dimension cell.
pub fn summarize_replicates(
    summaries: &[LifetimeSummary],
) -> Result<ReplicateAggregate, MetricsError> {
    let first = summaries.first().ok_or(MetricsError::EmptyReplicates)?;
    for s in summaries {
        if s.scenario != first.scenario || s.dim != first.dim {
            return Err(MetricsError::MixedReplicates {
                first: format!("{}@{}", first.scenario, first.dim),
                other: format!("{}@{}", s.scenario, s.dim),
            });
        }
    }
    Ok(ReplicateAggregate {
        scenario: first.scenario,
        dim: first.dim,
        runs: summaries.len(),
        first_dead_round: MetricAggregate::over(summaries.iter().map(|s| s.first_dead_round)),
        quarter_dead_round: MetricAggregate::over(summaries.iter().map(|s| s.quarter_dead_round)),
        last_alive_round: MetricAggregate::over(summaries.iter().map(|s| Some(s.last_alive_round))),
    })
}
