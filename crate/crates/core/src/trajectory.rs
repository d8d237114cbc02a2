//! Per-step trajectory records in CSV or JSON-lines form.
//!
//! Floats are written in shortest round-trip form, so files are bit-stable
//! for a fixed config, seed and policy and parse back to the exact values.

use std::io::Write;

use serde::Serialize;

use crate::control::Command;
use crate::env::StepResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::Config(format!(
                "unknown format {other:?}; expected csv or jsonl"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub step: u32,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub v: f64,
    pub n_helium: f64,
    pub m_sand: f64,
    pub action: u8,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

pub const CSV_HEADER: [&str; 12] = [
    "step",
    "t",
    "x",
    "y",
    "h",
    "v",
    "n_helium",
    "m_sand",
    "action",
    "reward",
    "terminated",
    "truncated",
];

impl TrajectoryRecord {
    pub fn new(step: u32, action: Command, result: &StepResult) -> Self {
        let d = &result.diagnostics;
        TrajectoryRecord {
            step,
            t: d.time,
            x: d.x,
            y: d.y,
            h: d.altitude,
            v: d.ascent_rate,
            n_helium: d.n_helium,
            m_sand: d.m_sand,
            action: action.index(),
            reward: result.reward,
            terminated: result.terminated,
            truncated: result.truncated,
        }
    }

    fn csv_row(&self) -> [String; 12] {
        [
            self.step.to_string(),
            self.t.to_string(),
            self.x.to_string(),
            self.y.to_string(),
            self.h.to_string(),
            self.v.to_string(),
            self.n_helium.to_string(),
            self.m_sand.to_string(),
            self.action.to_string(),
            self.reward.to_string(),
            u8::from(self.terminated).to_string(),
            u8::from(self.truncated).to_string(),
        ]
    }
}

fn write_err(e: impl std::fmt::Display) -> Error {
    Error::Protocol(format!("writing trajectory: {e}"))
}

pub fn write_trajectory<W: Write>(
    records: &[TrajectoryRecord],
    format: Format,
    out: W,
) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER).map_err(write_err)?;
            for r in records {
                w.write_record(r.csv_row()).map_err(write_err)?;
            }
            w.flush().map_err(write_err)
        }
        Format::Jsonl => {
            let mut out = std::io::BufWriter::new(out);
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(write_err)?;
                out.write_all(b"\n").map_err(write_err)?;
            }
            out.flush().map_err(write_err)
        }
    }
}

/// Reads the reward column back from a CSV trajectory.
pub fn read_csv_rewards(text: &str) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let column = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .position(|h| h == "reward")
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "no reward column".into(),
        })?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })?;
            rec[column].parse().map_err(|_| Error::Parse {
                line: i + 2,
                message: format!("bad reward {:?}", &rec[column]),
            })
        })
        .collect()
}
