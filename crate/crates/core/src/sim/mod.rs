//! Deterministic continuous-time world for sleeping and awake robots.
//!
//! Algorithms drive robots through [`World`] operations. Each robot owns a
//! local clock that advances with its moves and waits; every committed action
//! becomes an [`Event`]. The finished trace is ordered by (time, robot id).

mod adversary;
mod trace;
pub mod world;

pub use adversary::{DiscoveryGrid, LazyRobot};
pub use trace::{
    Event, EventKind, ExhaustedRecord, RoundRecord, RunSummary, Trace, TraceHeader, FORMAT_VERSION,
};
pub use world::{LookResult, World, WorldConfig};

use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

/// Robot identifier: the robot's initial position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub Point);

impl Eq for RobotId {}

impl PartialOrd for RobotId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RobotId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.lex_cmp(&other.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Sleeping,
    Awake,
    Done,
}

/// A shared memory variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemValue {
    Num(f64),
    Point(Point),
    Text(String),
}

/// Key-value memory. Robots that shared recently hold the same base map and
/// differ only by small private deltas.
#[derive(Clone, Debug, Default)]
pub struct Memory {
    base: Arc<BTreeMap<String, MemValue>>,
    delta: BTreeMap<String, MemValue>,
}

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&MemValue> {
        self.delta.get(key).or_else(|| self.base.get(key))
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.delta.contains_key(key) || self.base.contains_key(key)
    }

    pub fn insert(&mut self, key: String, value: MemValue) {
        if self.base.get(&key) == Some(&value) && !self.delta.contains_key(&key) {
            return;
        }
        self.delta.insert(key, value);
        if self.delta.len() > 256 && self.delta.len() * 4 > self.base.len() {
            let mut delta = std::mem::take(&mut self.delta);
            Arc::make_mut(&mut self.base).append(&mut delta);
        }
    }

    pub fn len(&self) -> usize {
        self.base.len()
            + self
                .delta
                .keys()
                .filter(|k| !self.base.contains_key(*k))
                .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values whose keys start with `prefix`.
    pub fn values_with_prefix(&self, prefix: &str) -> Vec<&MemValue> {
        let mut out: Vec<&MemValue> = Vec::new();
        for (k, v) in self.base.range(prefix.to_string()..) {
            if !k.starts_with(prefix) {
                break;
            }
            if !self.delta.contains_key(k) {
                out.push(v);
            }
        }
        for (k, v) in self.delta.range(prefix.to_string()..) {
            if !k.starts_with(prefix) {
                break;
            }
            out.push(v);
        }
        out
    }

    pub fn to_map(&self) -> BTreeMap<String, MemValue> {
        let mut m = (*self.base).clone();
        m.extend(self.delta.iter().map(|(k, v)| (k.clone(), v.clone())));
        m
    }

    /// Union of `mems`; later entries win on equal keys.
    pub fn merged(mems: &[&Memory]) -> Memory {
        let Some(first) = mems.first() else {
            return Memory::new();
        };
        if mems.iter().all(|m| Arc::ptr_eq(&m.base, &first.base)) {
            let mut delta = BTreeMap::new();
            for m in mems {
                delta.extend(m.delta.iter().map(|(k, v)| (k.clone(), v.clone())));
            }
            let mut out = Memory {
                base: first.base.clone(),
                delta: BTreeMap::new(),
            };
            for (k, v) in delta {
                out.insert(k, v);
            }
            return out;
        }
        let mut map = BTreeMap::new();
        for m in mems {
            for (k, v) in m.base.iter() {
                if !m.delta.contains_key(k) {
                    map.insert(k.clone(), v.clone());
                }
            }
            map.extend(m.delta.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        Memory {
            base: Arc::new(map),
            delta: BTreeMap::new(),
        }
    }
}

impl PartialEq for Memory {
    fn eq(&self, other: &Self) -> bool {
        self.to_map() == other.to_map()
    }
}

impl std::ops::Index<&str> for Memory {
    type Output = MemValue;

    fn index(&self, key: &str) -> &MemValue {
        self.get(key).expect("key present in memory")
    }
}

impl Serialize for Memory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Memory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Memory {
            base: Arc::new(BTreeMap::deserialize(d)?),
            delta: BTreeMap::new(),
        })
    }
}

/// Memory key recording a position seen asleep.
pub fn sleeping_key(p: &Point) -> String {
    format!("sleeping/{},{}", p.x, p.y)
}

/// Memory key recording a robot known to be awake.
pub fn awake_key(p: &Point) -> String {
    format!("awake/{},{}", p.x, p.y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    /// `None` until a lazy robot materializes.
    pub id: Option<RobotId>,
    pub status: Status,
    pub position: Point,
    pub energy_used: f64,
    pub memory: Memory,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("model violation: {0}")]
    ModelViolation(String),
    #[error("robot {robot} is not co-located with {other} (distance {distance})")]
    NotColocated {
        robot: Point,
        other: Point,
        distance: f64,
    },
    #[error("conflict: robot {target} is already awake")]
    Conflict { target: Point },
    #[error("energy exhausted: robot {robot} is short by {deficit}")]
    EnergyExhausted { robot: Point, deficit: f64 },
    #[error("robot {robot} missed deadline {deadline} (clock {clock})")]
    DeadlineMissed {
        robot: Point,
        deadline: f64,
        clock: f64,
    },
    #[error("adversary too coarse: lazy region around {center} has {cells} undiscovered cells")]
    AdversaryTooCoarse { center: Point, cells: usize },
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("geometry: {0}")]
    Geometry(#[from] crate::geometry::GeometryError),
}
