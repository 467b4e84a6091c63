//! Event log and run summary, serialized as versioned JSON.

use crate::geometry::{InstanceMetrics, Point, Square};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Commit order inside the engine; causal among same-time events.
    pub seq: u64,
    pub time: f64,
    pub robot: Point,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    MoveStart {
        from: Point,
        to: Point,
    },
    MoveEnd {
        at: Point,
        length: f64,
    },
    /// `awake` counts the awake robots in view.
    Look {
        at: Point,
        sleeping: Vec<Point>,
        awake: usize,
    },
    Wake {
        target: Point,
    },
    Share {
        with: Vec<Point>,
    },
    WaitEnd {
        since: f64,
    },
    Terminate,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::MoveStart { .. } => "move_start",
            EventKind::MoveEnd { .. } => "move_end",
            EventKind::Look { .. } => "look",
            EventKind::Wake { .. } => "wake",
            EventKind::Share { .. } => "share",
            EventKind::WaitEnd { .. } => "wait_end",
            EventKind::Terminate => "terminate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format_version: u32,
    pub algorithm: String,
    pub source: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Trace, String> {
        let mut lines = r.lines().enumerate();
        let header: TraceHeader = match lines.next() {
            Some((_, Ok(l))) => serde_json::from_str(&l).map_err(|e| format!("line 1: {e}"))?,
            Some((_, Err(e))) => return Err(format!("line 1: {e}")),
            None => return Err("empty trace".into()),
        };
        if header.format_version != FORMAT_VERSION {
            return Err(format!(
                "unsupported trace format_version {}",
                header.format_version
            ));
        }
        let mut events = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| format!("line {}: {e}", i + 1))?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
        }
        Ok(Trace { header, events })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustedRecord {
    pub robot: Point,
    pub time: f64,
    pub deficit: f64,
}

/// One phase of an algorithm run, for round accounting and rendering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub k: usize,
    /// `init`, `partition`, `terminate`, `sweep`, `cell` or `gather`.
    pub kind: String,
    pub square: Square,
    pub start: f64,
    pub end: f64,
    pub team: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub format_version: u32,
    pub algorithm: String,
    pub n: usize,
    pub ell: f64,
    pub rho: Option<f64>,
    pub budget: Option<f64>,
    /// Time of the last wake event.
    pub makespan_last_wake: f64,
    /// Time of the last action of any robot.
    pub makespan_last_action: f64,
    pub max_energy: f64,
    pub total_energy: f64,
    pub wake_events: usize,
    pub complete: bool,
    pub still_sleeping: Vec<Point>,
    pub unresolved_lazy: usize,
    pub energy_exhausted: Vec<ExhaustedRecord>,
    pub metrics: Option<InstanceMetrics>,
    pub rounds: Vec<RoundRecord>,
    pub discovered_area: Option<f64>,
    pub events: usize,
    /// Executions needed until looks agreed with wake times.
    pub passes: usize,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// Number of rounds of a divide-and-conquer run: the largest round index reached.
    pub fn round_count(&self) -> usize {
        self.rounds.iter().map(|r| r.k).max().unwrap_or(0)
    }
}
