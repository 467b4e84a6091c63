//! The engine. Every operation commits immediately on the acting robot's
//! local clock; the event queue restores global (time, robot) order.

use super::adversary::{Cell, DiscoveryGrid, LazyRobot};
use super::trace::{
    Event, EventKind, ExhaustedRecord, RoundRecord, RunSummary, Trace, TraceHeader, FORMAT_VERSION,
};
use super::{awake_key, sleeping_key, MemValue, Memory, RobotId, RobotState, SimError, Status};
use crate::geometry::{within, InstanceMetrics, Point, COLOCATION_TOL, REL_TOL};
use rustc_hash::FxHashMap as HashMap;
use std::cmp::Ordering;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq)]
pub struct WorldConfig {
    /// Per-robot cap on distance moved.
    pub budget: Option<f64>,
    /// Keep every event; when off only counts are kept.
    pub record: bool,
    /// Maintain the discovered region even without lazy robots.
    pub track_discovery: bool,
    /// Disk radius the algorithm works with; sets the default grid pitch.
    pub ell: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            budget: None,
            record: true,
            track_discovery: false,
            ell: 1.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LookResult {
    pub sleeping: Vec<Point>,
    pub awake: Vec<Point>,
}

fn event_order(a: &Event, b: &Event) -> Ordering {
    a.time
        .total_cmp(&b.time)
        .then_with(|| a.robot.lex_cmp(&b.robot))
        .then(a.seq.cmp(&b.seq))
}

struct LazyState {
    spec: LazyRobot,
    remaining: BTreeSet<Cell>,
    resolved: Option<Point>,
}

enum Atom {
    Disk(Point),
    Corridor(Point, Point),
}

impl Atom {
    /// Position of a cell center in the sweep order of this atom.
    fn sweep_key(&self, p: &Point) -> (f64, f64) {
        match self {
            Atom::Disk(c) => (c.dist(p), 0.0),
            Atom::Corridor(a, b) => {
                let len = a.dist(b);
                let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
                let proj = (p.x - a.x) * ux + (p.y - a.y) * uy;
                let perp = ((p.x - a.x) * uy - (p.y - a.y) * ux).abs();
                (proj, perp)
            }
        }
    }
}

pub struct World {
    source: Point,
    robots: Vec<RobotState>,
    clock: Vec<f64>,
    wake_time: Vec<Option<f64>>,
    halted: Vec<bool>,
    by_id: HashMap<(u64, u64), usize>,
    sleepers: HashMap<Cell, Vec<usize>>,
    awake_at: HashMap<Cell, Vec<usize>>,
    config: WorldConfig,
    grid: Option<DiscoveryGrid>,
    lazy: Vec<LazyState>,
    lazy_cells: HashMap<Cell, usize>,
    queue: Vec<Event>,
    seq: u64,
    event_count: usize,
    wake_events: usize,
    exhausted: Vec<ExhaustedRecord>,
    rounds: Vec<RoundRecord>,
    /// Latest look time at which each robot was reported asleep.
    seen_asleep: Vec<f64>,
    /// Earliest look time at which each robot was treated as gone.
    seen_gone: Vec<f64>,
    prophecy: HashMap<(u64, u64), f64>,
}

fn unit_cell(p: &Point) -> Cell {
    (p.x.floor() as i64, p.y.floor() as i64)
}

fn clocks_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

impl World {
    /// Source at the origin, sleeping robots at `positions`, plus lazy robots.
    pub fn new(
        positions: &[Point],
        lazy: &[LazyRobot],
        config: WorldConfig,
    ) -> Result<Self, SimError> {
        let source = Point::ORIGIN;
        let mut w = World {
            source,
            robots: Vec::with_capacity(positions.len() + 1),
            clock: Vec::new(),
            wake_time: Vec::new(),
            halted: Vec::new(),
            by_id: HashMap::default(),
            sleepers: HashMap::default(),
            awake_at: HashMap::default(),
            grid: None,
            lazy: Vec::new(),
            lazy_cells: HashMap::default(),
            queue: Vec::new(),
            seq: 0,
            event_count: 0,
            wake_events: 0,
            exhausted: Vec::new(),
            rounds: Vec::new(),
            seen_asleep: Vec::new(),
            seen_gone: Vec::new(),
            prophecy: HashMap::default(),
            config,
        };
        w.add_robot(source)?;
        w.wake_time[0] = Some(0.0);
        w.robots[0].status = Status::Awake;
        w.robots[0]
            .memory
            .insert(awake_key(&source), MemValue::Point(source));
        w.awake_at.entry(unit_cell(&source)).or_default().push(0);
        for p in positions {
            w.add_robot(*p)?;
        }
        if !lazy.is_empty() || w.config.track_discovery {
            let mut pitch = if lazy.is_empty() {
                (w.config.ell / 8.0).min(0.25)
            } else {
                f64::INFINITY
            };
            for l in lazy {
                if !(l.resolution > 0.0) {
                    return Err(SimError::Inadmissible(
                        "lazy resolution must be positive".into(),
                    ));
                }
                pitch = pitch.min(l.resolution);
            }
            w.grid = Some(DiscoveryGrid::new(pitch));
        }
        for (k, l) in lazy.iter().enumerate() {
            let grid = w.grid.as_ref().expect("grid exists with lazy robots");
            let cells: BTreeSet<Cell> = grid.disk_cells(&l.center, l.radius).into_iter().collect();
            if cells.is_empty() {
                return Err(SimError::AdversaryTooCoarse {
                    center: l.center,
                    cells: 0,
                });
            }
            for c in &cells {
                if w.lazy_cells.insert(*c, k).is_some() {
                    return Err(SimError::Inadmissible(format!(
                        "lazy regions overlap near {}",
                        grid.center(*c)
                    )));
                }
            }
            w.lazy.push(LazyState {
                spec: l.clone(),
                remaining: cells,
                resolved: None,
            });
        }
        for k in 0..w.lazy.len() {
            if w.lazy[k].remaining.len() == 1 {
                let c = *w.lazy[k].remaining.iter().next().unwrap();
                w.materialize(k, c)?;
            }
        }
        Ok(w)
    }

    fn add_robot(&mut self, p: Point) -> Result<usize, SimError> {
        if !p.is_finite() {
            return Err(SimError::Inadmissible(format!("non-finite position {p}")));
        }
        let i = self.robots.len();
        if self.by_id.insert(p.key(), i).is_some() {
            return Err(SimError::Inadmissible(format!("duplicate position {p}")));
        }
        self.robots.push(RobotState {
            id: Some(RobotId(p)),
            status: Status::Sleeping,
            position: p,
            energy_used: 0.0,
            memory: Memory::new(),
        });
        self.clock.push(0.0);
        self.wake_time.push(None);
        self.halted.push(false);
        self.seen_asleep.push(f64::NEG_INFINITY);
        self.seen_gone.push(f64::INFINITY);
        self.sleepers.entry(unit_cell(&p)).or_default().push(i);
        Ok(i)
    }

    fn materialize(&mut self, k: usize, cell: Cell) -> Result<(), SimError> {
        let p = self.grid.as_ref().unwrap().center(cell);
        let spec = self.lazy[k].spec.clone();
        self.lazy[k].resolved = Some(p);
        self.lazy[k].remaining.clear();
        self.add_robot(p)?;
        for f in 0..spec.followers {
            let (dx, dy) = spec.follower_offset(f);
            self.add_robot(p.add(dx, dy))?;
        }
        Ok(())
    }

    fn discover(&mut self, atom: Atom) -> Result<(), SimError> {
        let Some(grid) = self.grid.as_mut() else {
            return Ok(());
        };
        let mut hits: Vec<(usize, Cell)> = Vec::new();
        let lazy_cells = &self.lazy_cells;
        let mut on_hit = |c: Cell| {
            if let Some(&k) = lazy_cells.get(&c) {
                hits.push((k, c));
            }
        };
        match &atom {
            Atom::Disk(c) => grid.mark_disk(c, 1.0, &mut on_hit),
            Atom::Corridor(a, b) => grid.mark_corridor(a, b, 1.0, &mut on_hit),
        }
        if hits.is_empty() {
            return Ok(());
        }
        hits.sort();
        let mut idx = 0;
        while idx < hits.len() {
            let k = hits[idx].0;
            let group: Vec<Cell> = hits[idx..]
                .iter()
                .take_while(|h| h.0 == k)
                .map(|h| h.1)
                .collect();
            idx += group.len();
            if self.lazy[k].resolved.is_some() {
                continue;
            }
            for c in &group {
                self.lazy[k].remaining.remove(c);
            }
            match self.lazy[k].remaining.len() {
                0 => {
                    let grid = self.grid.as_ref().unwrap();
                    let last = *group
                        .iter()
                        .max_by(|a, b| {
                            let (pa, pb) = (grid.center(**a), grid.center(**b));
                            let (ka, kb) = (atom.sweep_key(&pa), atom.sweep_key(&pb));
                            ka.0.total_cmp(&kb.0)
                                .then(ka.1.total_cmp(&kb.1))
                                .then(pa.lex_cmp(&pb))
                        })
                        .unwrap();
                    self.materialize(k, last)?;
                }
                1 => {
                    let c = *self.lazy[k].remaining.iter().next().unwrap();
                    self.materialize(k, c)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn push(&mut self, robot: usize, time: f64, kind: EventKind) {
        self.seq += 1;
        self.event_count += 1;
        if self.config.record {
            let robot = self.robots[robot].position_id();
            self.queue.push(Event {
                seq: self.seq,
                time,
                robot,
                kind,
            });
        }
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn source_position(&self) -> Point {
        self.source
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn robot(&self, i: usize) -> &RobotState {
        &self.robots[i]
    }

    pub fn id(&self, i: usize) -> Point {
        self.robots[i].position_id()
    }

    pub fn position(&self, i: usize) -> Point {
        self.robots[i].position
    }

    pub fn clock(&self, i: usize) -> f64 {
        self.clock[i]
    }

    pub fn index_of(&self, id: &Point) -> Option<usize> {
        self.by_id.get(&id.key()).copied()
    }

    /// Awake and still able to act.
    pub fn is_active(&self, i: usize) -> bool {
        self.robots[i].status == Status::Awake && !self.halted[i]
    }

    pub fn is_halted(&self, i: usize) -> bool {
        self.halted[i]
    }

    pub fn is_sleeping(&self, i: usize) -> bool {
        self.wake_time[i].is_none()
    }

    pub fn wake_time(&self, i: usize) -> Option<f64> {
        self.wake_time[i]
    }

    fn require_awake(&self, i: usize, op: &str) -> Result<(), SimError> {
        if self.robots[i].status == Status::Sleeping {
            return Err(SimError::ModelViolation(format!(
                "{op} by sleeping robot {}",
                self.id(i)
            )));
        }
        Ok(())
    }

    /// Snapshot of everything within distance 1.
    pub fn look(&mut self, i: usize) -> Result<LookResult, SimError> {
        self.require_awake(i, "look")?;
        if self.halted[i] {
            return Ok(LookResult::default());
        }
        let at = self.robots[i].position;
        let t = self.clock[i];
        self.discover(Atom::Disk(at))?;
        let mut res = LookResult::default();
        // Remembered sleepers in view that are no longer asleep.
        let mut gone = Vec::new();
        let (cx, cy) = unit_cell(&at);
        for gx in cx - 1..=cx + 1 {
            for gy in cy - 1..=cy + 1 {
                if let Some(v) = self.sleepers.get(&(gx, gy)) {
                    for &j in v {
                        let p = self.robots[j].position_id();
                        if !within(p.dist(&at), 1.0) {
                            continue;
                        }
                        // A foretold wake at the same instant comes after this look.
                        let asleep = match self.wake_time[j] {
                            Some(w) => w > t,
                            None => self.prophecy.get(&p.key()).is_none_or(|&w| w >= t),
                        };
                        if asleep {
                            res.sleeping.push(p);
                            self.seen_asleep[j] = self.seen_asleep[j].max(t);
                        } else {
                            gone.push(p);
                            self.seen_gone[j] = self.seen_gone[j].min(t);
                        }
                    }
                }
                if let Some(v) = self.awake_at.get(&(gx, gy)) {
                    for &j in v {
                        let q = self.robots[j].position;
                        if j != i && within(q.dist(&at), 1.0) {
                            res.awake.push(q);
                        }
                    }
                }
            }
        }
        res.sleeping.sort_by(|a, b| a.lex_cmp(b));
        res.awake.sort_by(|a, b| a.lex_cmp(b));
        let mem = &mut self.robots[i].memory;
        for p in &res.sleeping {
            mem.insert(sleeping_key(p), MemValue::Point(*p));
        }
        for p in &gone {
            if mem.contains_key(&sleeping_key(p)) && !mem.contains_key(&awake_key(p)) {
                mem.insert(awake_key(p), MemValue::Point(*p));
            }
        }
        self.push(
            i,
            t,
            EventKind::Look {
                at,
                sleeping: res.sleeping.clone(),
                awake: res.awake.len(),
            },
        );
        Ok(res)
    }

    /// Straight move at unit speed; returns the elapsed time.
    pub fn move_to(&mut self, i: usize, dest: Point) -> Result<f64, SimError> {
        self.require_awake(i, "move")?;
        if self.halted[i] {
            return Ok(0.0);
        }
        if !dest.is_finite() {
            return Err(SimError::ModelViolation(format!(
                "non-finite destination {dest}"
            )));
        }
        let from = self.robots[i].position;
        let d = from.dist(&dest);
        if d == 0.0 {
            return Ok(0.0);
        }
        if let Some(b) = self.config.budget {
            let need = self.robots[i].energy_used + d;
            if need > b * (1.0 + REL_TOL) + REL_TOL {
                let deficit = need - b;
                let robot = self.id(i);
                self.exhausted.push(ExhaustedRecord {
                    robot,
                    time: self.clock[i],
                    deficit,
                });
                self.halt(i);
                return Err(SimError::EnergyExhausted { robot, deficit });
            }
        }
        let t0 = self.clock[i];
        self.push(i, t0, EventKind::MoveStart { from, to: dest });
        self.discover(Atom::Corridor(from, dest))?;
        self.relocate(i, dest);
        self.robots[i].energy_used += d;
        self.clock[i] = t0 + d;
        self.push(
            i,
            t0 + d,
            EventKind::MoveEnd {
                at: dest,
                length: d,
            },
        );
        Ok(d)
    }

    /// Like [`World::move_to`] but an exhausted robot simply stops.
    pub fn go(&mut self, i: usize, dest: Point) -> Result<(), SimError> {
        match self.move_to(i, dest) {
            Ok(_) | Err(SimError::EnergyExhausted { .. }) => Ok(()),
            Err(e) => Err(e),
        }
    }

    fn relocate(&mut self, i: usize, dest: Point) {
        let old = unit_cell(&self.robots[i].position);
        let new = unit_cell(&dest);
        if old != new {
            if let Some(v) = self.awake_at.get_mut(&old) {
                v.retain(|&j| j != i);
            }
            self.awake_at.entry(new).or_default().push(i);
        }
        self.robots[i].position = dest;
    }

    fn halt(&mut self, i: usize) {
        self.halted[i] = true;
        self.robots[i].status = Status::Done;
        let t = self.clock[i];
        self.push(i, t, EventKind::Terminate);
    }

    /// Idles until absolute time `t`.
    pub fn wait_until(&mut self, i: usize, t: f64) -> Result<(), SimError> {
        self.require_awake(i, "wait")?;
        if self.halted[i] {
            return Ok(());
        }
        let now = self.clock[i];
        if t > now {
            self.clock[i] = t;
            self.push(i, t, EventKind::WaitEnd { since: now });
        } else if !clocks_agree(t, now) {
            return Err(SimError::DeadlineMissed {
                robot: self.id(i),
                deadline: t,
                clock: now,
            });
        }
        Ok(())
    }

    /// Wakes the sleeper whose id is `target`; it inherits the waker's memory
    /// and clock. Returns the woken robot's index, or `None` if the waker is halted.
    pub fn wake(&mut self, i: usize, target: Point) -> Result<Option<usize>, SimError> {
        self.require_awake(i, "wake")?;
        if self.halted[i] {
            return Ok(None);
        }
        let j = self
            .index_of(&target)
            .ok_or_else(|| SimError::ModelViolation(format!("no robot with id {target}")))?;
        let at = self.robots[i].position;
        let d = at.dist(&target);
        if d > COLOCATION_TOL {
            return Err(SimError::NotColocated {
                robot: self.id(i),
                other: target,
                distance: d,
            });
        }
        if self.wake_time[j].is_some() {
            return Err(SimError::Conflict { target });
        }
        if !self.robots[i].memory.contains_key(&sleeping_key(&target)) {
            return Err(SimError::ModelViolation(format!(
                "robot {} wakes unseen robot {target}",
                self.id(i)
            )));
        }
        let t = self.clock[i];
        let key = awake_key(&target);
        self.robots[i]
            .memory
            .insert(key.clone(), MemValue::Point(target));
        let mut mem = self.robots[i].memory.clone();
        mem.insert(awake_key(&self.id(i)), MemValue::Point(self.id(i)));
        let r = &mut self.robots[j];
        r.status = Status::Awake;
        r.memory = mem;
        self.clock[j] = t;
        self.wake_time[j] = Some(t);
        self.awake_at.entry(unit_cell(&target)).or_default().push(j);
        self.wake_events += 1;
        self.push(i, t, EventKind::Wake { target });
        Ok(Some(j))
    }

    /// Merges the memories of co-located robots; later ids win on equal keys.
    pub fn share(&mut self, team: &[usize]) -> Result<(), SimError> {
        let mut members: Vec<usize> = team.iter().copied().filter(|&i| !self.halted[i]).collect();
        for &i in &members {
            self.require_awake(i, "share")?;
        }
        members.sort_by(|a, b| self.id(*a).lex_cmp(&self.id(*b)));
        members.dedup();
        if members.len() < 2 {
            return Ok(());
        }
        let (p0, t0) = (self.robots[members[0]].position, self.clock[members[0]]);
        for &i in &members[1..] {
            let p = self.robots[i].position;
            if !p.colocated(&p0) || !clocks_agree(self.clock[i], t0) {
                return Err(SimError::NotColocated {
                    robot: self.id(members[0]),
                    other: self.id(i),
                    distance: p.dist(&p0) + (self.clock[i] - t0).abs(),
                });
            }
        }
        let merged = Memory::merged(
            &members
                .iter()
                .map(|&i| &self.robots[i].memory)
                .collect::<Vec<_>>(),
        );
        for &i in &members {
            self.robots[i].memory = merged.clone();
        }
        // One event per meeting, logged by the least id.
        let with = members[1..].iter().map(|&i| self.id(i)).collect();
        self.push(members[0], t0, EventKind::Share { with });
        Ok(())
    }

    /// Stops the robot for good.
    pub fn terminate(&mut self, i: usize) -> Result<(), SimError> {
        self.require_awake(i, "terminate")?;
        if !self.halted[i] {
            self.halt(i);
        }
        Ok(())
    }

    pub fn remember(&mut self, i: usize, key: String, value: MemValue) {
        self.robots[i].memory.insert(key, value);
    }

    /// Positions the robot has seen asleep and does not know to be awake.
    pub fn known_sleeping(&self, i: usize) -> Vec<Point> {
        let mem = &self.robots[i].memory;
        let awake: rustc_hash::FxHashSet<(u64, u64)> = mem
            .values_with_prefix("awake/")
            .into_iter()
            .filter_map(|v| match v {
                MemValue::Point(p) => Some(p.key()),
                _ => None,
            })
            .collect();
        let mut out: Vec<Point> = mem
            .values_with_prefix("sleeping/")
            .into_iter()
            .filter_map(|v| match v {
                MemValue::Point(p) if !awake.contains(&p.key()) => Some(*p),
                _ => None,
            })
            .collect();
        out.sort_by(|a, b| a.lex_cmp(b));
        out
    }

    /// Ids the robot knows to be awake.
    pub fn known_awake(&self, i: usize) -> Vec<Point> {
        let mut out: Vec<Point> = self.robots[i]
            .memory
            .values_with_prefix("awake/")
            .into_iter()
            .filter_map(|v| match v {
                MemValue::Point(p) => Some(*p),
                _ => None,
            })
            .collect();
        out.sort_by(|a, b| a.lex_cmp(b));
        out
    }

    pub fn record_round(&mut self, r: RoundRecord) {
        self.rounds.push(r);
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    /// Resolved position of lazy robot `k`, if it has materialized.
    pub fn adversary_position(&self, k: usize) -> Option<Point> {
        self.lazy.get(k).and_then(|l| l.resolved)
    }

    pub fn discovered_area(&self) -> Option<f64> {
        self.grid.as_ref().map(|g| g.area())
    }

    pub fn exhausted(&self) -> &[ExhaustedRecord] {
        &self.exhausted
    }

    /// Initial positions of all materialized sleepers (source excluded).
    pub fn positions(&self) -> Vec<Point> {
        self.robots[1..].iter().map(|r| r.position_id()).collect()
    }

    pub fn unresolved_lazy(&self) -> usize {
        self.lazy
            .iter()
            .filter(|l| l.resolved.is_none())
            .map(|l| 1 + l.spec.followers)
            .sum()
    }

    pub fn wake_events(&self) -> usize {
        self.wake_events
    }

    /// Drains the event queue into a trace and summarizes the run.
    /// Wake times assumed for robots whose wake has not been committed yet.
    pub fn set_prophecy(&mut self, wakes: HashMap<(u64, u64), f64>) {
        self.prophecy = wakes;
    }

    /// Committed wake times keyed by robot id.
    pub fn wake_times(&self) -> HashMap<(u64, u64), f64> {
        (1..self.robots.len())
            .filter_map(|j| self.wake_time[j].map(|w| (self.id(j).key(), w)))
            .collect()
    }

    /// Whether every look agrees with the committed wake times.
    pub fn looks_consistent(&self) -> bool {
        (0..self.robots.len()).all(|j| {
            let w = self.wake_time[j].unwrap_or(f64::INFINITY);
            self.seen_asleep[j] <= w && self.seen_gone[j] >= w
        })
    }

    pub fn finalize(mut self, algorithm: &str, rho: Option<f64>) -> (Trace, RunSummary) {
        let mut events = std::mem::take(&mut self.queue);
        events.sort_unstable_by(event_order);
        let positions = self.positions();
        let still_sleeping: Vec<Point> = (1..self.robots.len())
            .filter(|&j| self.wake_time[j].is_none())
            .map(|j| self.id(j))
            .collect();
        let unresolved = self.unresolved_lazy();
        let metrics = if positions.is_empty() || unresolved > 0 {
            None
        } else {
            InstanceMetrics::compute(&positions, self.source, self.config.ell).ok()
        };
        let summary = RunSummary {
            format_version: FORMAT_VERSION,
            algorithm: algorithm.to_string(),
            n: positions.len() + unresolved,
            ell: self.config.ell,
            rho,
            budget: self.config.budget,
            makespan_last_wake: self.wake_time[1..]
                .iter()
                .flatten()
                .copied()
                .fold(0.0, f64::max),
            makespan_last_action: self.clock.iter().copied().fold(0.0, f64::max),
            max_energy: self
                .robots
                .iter()
                .map(|r| r.energy_used)
                .fold(0.0, f64::max),
            total_energy: self.robots.iter().map(|r| r.energy_used).sum(),
            wake_events: self.wake_events,
            complete: still_sleeping.is_empty() && unresolved == 0,
            still_sleeping,
            unresolved_lazy: unresolved,
            energy_exhausted: self.exhausted.clone(),
            metrics,
            rounds: self.rounds.clone(),
            discovered_area: self.discovered_area(),
            events: self.event_count,
            passes: 1,
        };
        let trace = Trace {
            header: TraceHeader {
                format_version: FORMAT_VERSION,
                algorithm: algorithm.to_string(),
                source: self.source,
            },
            events,
        };
        (trace, summary)
    }
}

impl RobotState {
    fn position_id(&self) -> Point {
        self.id.expect("materialized robot has an id").0
    }
}
