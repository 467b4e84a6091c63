//! Brute-force references for tests and `verify`. Only geometry primitives
//! are shared with the rest of the crate.

use crate::geometry::{Point, PointGrid, COLOCATION_TOL, REL_TOL};
use crate::instances::Instance;
use crate::sim::{EventKind, RunSummary, Trace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeSet, HashMap};

pub const MAX_BRUTEFORCE: usize = 7;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{0} points is too large for oracle (max {MAX_BRUTEFORCE})")]
    TooLarge(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// `event` indexes the trace as stored.
    Fail {
        event: Option<usize>,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub oracle: String,
    pub instance_digest: String,
    pub reference: f64,
    pub tested: f64,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Hex SHA-256 of the instance document.
pub fn instance_digest(instance: &Instance) -> String {
    let h = Sha256::digest(instance.to_json().as_bytes());
    h.iter().map(|b| format!("{b:02x}")).collect()
}

/// Minimum depth over all wake-up trees rooted at `start` whose root has one
/// child and every other node at most two.
pub fn optimal_wakeup_bruteforce(start: Point, sleeping: &[Point]) -> Result<f64, OracleError> {
    let n = sleeping.len();
    if n > MAX_BRUTEFORCE {
        return Err(OracleError::TooLarge(n));
    }
    if n == 0 {
        return Ok(0.0);
    }
    // Node n is the start; memo[(at, set)] is the best time for one robot at
    // `at` to wake everything in `set`.
    let pts: Vec<Point> = sleeping
        .iter()
        .copied()
        .chain(std::iter::once(start))
        .collect();
    let full = (1u32 << n) - 1;
    let mut memo: HashMap<(usize, u32), f64> = HashMap::new();
    Ok(solo(&pts, n, full, &mut memo))
}

fn solo(pts: &[Point], at: usize, set: u32, memo: &mut HashMap<(usize, u32), f64>) -> f64 {
    if set == 0 {
        return 0.0;
    }
    if let Some(&v) = memo.get(&(at, set)) {
        return v;
    }
    let mut best = f64::INFINITY;
    for q in 0..pts.len() - 1 {
        if set & (1 << q) == 0 {
            continue;
        }
        let rest = set & !(1 << q);
        let leg = pts[at].dist(&pts[q]);
        // Two robots at q split the rest; enumerate every sub-mask.
        let mut a = rest;
        loop {
            let b = rest & !a;
            let t = leg + solo(pts, q, a, memo).max(solo(pts, q, b, memo));
            if t < best {
                best = t;
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & rest;
        }
    }
    memo.insert((at, set), best);
    best
}

/// Every position is within `radius` of some sample, by exhaustive scan.
pub fn coverage_scan(positions: &[Point], sampling: &[Point], radius: f64) -> bool {
    positions.iter().all(|p| {
        sampling
            .iter()
            .any(|q| p.dist(q) <= radius * (1.0 + REL_TOL) + REL_TOL)
    })
}

/// ℓ*, ρ* and ecc_ℓ recomputed with dense O(n²) scans. ecc is infinite when
/// the disk graph is disconnected.
pub fn metrics_bruteforce(points: &[Point], s: Point, ell: f64) -> (f64, f64, f64) {
    let all: Vec<Point> = std::iter::once(s).chain(points.iter().copied()).collect();
    let n = all.len();
    // Bottleneck spanning tree via Prim.
    let mut seen = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    key[0] = 0.0;
    let mut ell_star: f64 = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !seen[v])
            .min_by(|&a, &b| key[a].total_cmp(&key[b]))
            .expect("unvisited vertex");
        seen[u] = true;
        ell_star = ell_star.max(key[u]);
        for v in 0..n {
            if !seen[v] {
                key[v] = key[v].min(all[u].dist(&all[v]));
            }
        }
    }
    let rho_star = points.iter().map(|p| p.dist(&s)).fold(0.0, f64::max);
    // Dense Dijkstra on the disk graph.
    let lim = ell * (1.0 + REL_TOL) + REL_TOL;
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&v| !done[v] && dist[v].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        for v in 0..n {
            let d = all[u].dist(&all[v]);
            if !done[v] && d <= lim && dist[u] + d < dist[v] {
                dist[v] = dist[u] + d;
            }
        }
    }
    let ecc = dist.iter().copied().fold(0.0, f64::max);
    (ell_star, rho_star, ecc)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

struct Replay {
    position: Point,
    clock: f64,
    energy: f64,
    pending: Option<(Point, Point, f64)>,
    done: bool,
    knows: BTreeSet<(u64, u64)>,
}

impl Replay {
    fn new(at: Point, clock: f64) -> Self {
        Replay {
            position: at,
            clock,
            energy: 0.0,
            pending: None,
            done: false,
            knows: BTreeSet::new(),
        }
    }
}

/// Re-simulates `trace` against the instance: unit speed, co-location for
/// wakes and shares, looks that report exactly the sleepers in range, wakes
/// only of sleepers the waker has seen or been told about, and energy totals.
/// Events are replayed in commit order, which respects causality.
pub fn replay_validate(
    trace: &Trace,
    instance: &Instance,
    summary: Option<&RunSummary>,
) -> OracleReport {
    let digest = instance_digest(instance);
    let (reference, result) = replay(trace, instance);
    let tested = summary.map(|s| s.max_energy).unwrap_or(reference);
    let budget = summary.and_then(|s| s.budget);
    let verdict = match result {
        Err((event, reason)) => Verdict::Fail { event, reason },
        Ok(()) if budget.is_some_and(|b| reference > b * (1.0 + REL_TOL) + REL_TOL) => {
            Verdict::Fail {
                event: None,
                reason: format!(
                    "energy {reference} exceeds budget {}",
                    budget.unwrap_or(0.0)
                ),
            }
        }
        Ok(()) if !close(reference, tested) => Verdict::Fail {
            event: None,
            reason: format!("summary max energy {tested} differs from replayed {reference}"),
        },
        Ok(()) => Verdict::Pass,
    };
    OracleReport {
        oracle: "replay".into(),
        instance_digest: digest,
        reference,
        tested,
        verdict,
    }
}

type Failure = (Option<usize>, String);

fn replay(trace: &Trace, instance: &Instance) -> (f64, Result<(), Failure>) {
    let s = trace.header.source;
    let lazy = instance.is_lazy();
    let mut sleepers: Vec<Point> = instance.positions.clone();
    if lazy {
        // Materialized robots are known only from the trace.
        let mut known: BTreeSet<(u64, u64)> = sleepers.iter().map(|p| p.key()).collect();
        for e in &trace.events {
            let seen: &[Point] = match &e.kind {
                EventKind::Wake { target } => std::slice::from_ref(target),
                EventKind::Look { sleeping, .. } => sleeping,
                _ => &[],
            };
            for p in seen {
                if known.insert(p.key()) {
                    sleepers.push(*p);
                }
            }
        }
    }
    let index: HashMap<(u64, u64), usize> = sleepers
        .iter()
        .enumerate()
        .map(|(i, p)| (p.key(), i))
        .collect();
    let mut wake_at: Vec<Option<f64>> = vec![None; sleepers.len()];
    for e in &trace.events {
        if let EventKind::Wake { target } = &e.kind {
            if let Some(&j) = index.get(&target.key()) {
                if wake_at[j].is_none() {
                    wake_at[j] = Some(e.time);
                }
            }
        }
    }
    let grid = PointGrid::new(&sleepers, 1.0);
    let mut order: Vec<usize> = (0..trace.events.len()).collect();
    order.sort_by_key(|&i| trace.events[i].seq);
    let mut robots: HashMap<(u64, u64), Replay> = HashMap::new();
    robots.insert(s.key(), Replay::new(s, 0.0));
    let mut woken = vec![false; sleepers.len()];
    let result = (|| -> Result<(), Failure> {
        for &ix in &order {
            let e = &trace.events[ix];
            let fail = |msg: String| Err((Some(ix), msg));
            let Some(r) = robots.get_mut(&e.robot.key()) else {
                return fail(format!("event by robot {} that is not awake", e.robot));
            };
            if r.done {
                return fail(format!("robot {} acts after terminating", e.robot));
            }
            if e.time + REL_TOL * e.time.abs().max(1.0) < r.clock {
                return fail(format!(
                    "robot {} goes back in time from {} to {}",
                    e.robot, r.clock, e.time
                ));
            }
            if r.pending.is_some() && !matches!(e.kind, EventKind::MoveEnd { .. }) {
                return fail(format!("robot {} acts while moving", e.robot));
            }
            match &e.kind {
                EventKind::MoveStart { from, to } => {
                    if from.dist(&r.position) > COLOCATION_TOL {
                        return fail(format!(
                            "robot {} teleports from {} to {from}",
                            e.robot, r.position
                        ));
                    }
                    r.pending = Some((*from, *to, e.time));
                    r.clock = e.time;
                }
                EventKind::MoveEnd { at, length } => {
                    let Some((from, to, t0)) = r.pending.take() else {
                        return fail(format!("robot {} ends a move it never started", e.robot));
                    };
                    let d = from.dist(&to);
                    if at.dist(&to) > COLOCATION_TOL {
                        return fail(format!("robot {} ends at {at} instead of {to}", e.robot));
                    }
                    if !close(*length, d) {
                        return fail(format!("move length {length} but endpoints are {d} apart"));
                    }
                    if e.time - t0 + 1e-9 * d.max(1.0) < d {
                        return fail(format!("robot {} covers {d} in {}", e.robot, e.time - t0));
                    }
                    r.position = *at;
                    r.clock = e.time;
                    r.energy += d;
                }
                EventKind::Look { at, sleeping, .. } => {
                    if at.dist(&r.position) > COLOCATION_TOL {
                        return fail(format!(
                            "look at {at} but robot {} stands at {}",
                            e.robot, r.position
                        ));
                    }
                    let asleep = |j: usize| wake_at[j].is_none_or(|w| w > e.time);
                    let listed: BTreeSet<(u64, u64)> = sleeping.iter().map(|p| p.key()).collect();
                    for p in sleeping {
                        let Some(&j) = index.get(&p.key()) else {
                            return fail(format!("look reports unknown robot {p}"));
                        };
                        if p.dist(at) > 1.0 + 1e-9 || !asleep(j) {
                            return fail(format!(
                                "look reports {p}, which is not a sleeper in range"
                            ));
                        }
                    }
                    for j in grid.query(&sleepers, at, 1.0) {
                        let p = &sleepers[j];
                        if p.dist(at) <= 1.0 - 1e-9 && asleep(j) && !listed.contains(&p.key()) {
                            return fail(format!("look misses sleeper {p}"));
                        }
                    }
                    r.knows.extend(listed);
                    r.clock = e.time;
                }
                EventKind::Wake { target } => {
                    if target.dist(&r.position) > COLOCATION_TOL {
                        return fail(format!(
                            "robot {} wakes {target} from {}",
                            e.robot, r.position
                        ));
                    }
                    let Some(&j) = index.get(&target.key()) else {
                        return fail(format!("wake of unknown robot {target}"));
                    };
                    if woken[j] {
                        return fail(format!("robot {target} woken twice"));
                    }
                    if !r.knows.contains(&target.key()) {
                        return fail(format!(
                            "robot {} wakes {target} without having seen it",
                            e.robot
                        ));
                    }
                    woken[j] = true;
                    r.clock = e.time;
                    let knows = r.knows.clone();
                    let mut fresh = Replay::new(*target, e.time);
                    fresh.knows = knows;
                    robots.insert(target.key(), fresh);
                }
                EventKind::Share { with } => {
                    let at = r.position;
                    r.clock = e.time;
                    let mut union = r.knows.clone();
                    for m in with {
                        let Some(o) = robots.get(&m.key()) else {
                            return fail(format!("share with robot {m} that is not awake"));
                        };
                        if o.position.dist(&at) > COLOCATION_TOL {
                            return fail(format!(
                                "share between {} and {m}, which are not co-located",
                                e.robot
                            ));
                        }
                        if !close(o.clock, e.time) && o.clock > e.time {
                            return fail(format!(
                                "share with robot {m} whose clock is already {}",
                                o.clock
                            ));
                        }
                        union.extend(o.knows.iter().copied());
                    }
                    for m in with.iter().chain(std::iter::once(&e.robot)) {
                        let o = robots.get_mut(&m.key()).expect("checked above");
                        o.knows.clone_from(&union);
                        o.clock = e.time;
                    }
                }
                EventKind::WaitEnd { since } => {
                    if !close(*since, r.clock) && *since < r.clock {
                        return fail(format!(
                            "wait from {since} but robot {} is at {}",
                            e.robot, r.clock
                        ));
                    }
                    r.clock = e.time;
                }
                EventKind::Terminate => {
                    r.done = true;
                }
            }
        }
        Ok(())
    })();
    let energy = robots.values().map(|r| r.energy).fold(0.0, f64::max);
    (energy, result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_its_distance() {
        let d = optimal_wakeup_bruteforce(Point::ORIGIN, &[Point::new(3.0, 4.0)]).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn symmetric_pair_costs_three_legs() {
        let d = optimal_wakeup_bruteforce(
            Point::ORIGIN,
            &[Point::new(2.0, 0.0), Point::new(-2.0, 0.0)],
        )
        .unwrap();
        assert!((d - 6.0).abs() < 1e-12);
    }

    #[test]
    fn eight_points_refused() {
        let pts: Vec<Point> = (0..8).map(|i| Point::new(i as f64, 0.0)).collect();
        assert_eq!(
            optimal_wakeup_bruteforce(Point::ORIGIN, &pts),
            Err(OracleError::TooLarge(8))
        );
    }

    #[test]
    fn coverage_of_self() {
        let pts = [Point::new(1.0, 2.0), Point::new(-3.0, 0.5)];
        assert!(coverage_scan(&pts, &pts, 0.0));
        assert!(!coverage_scan(&[Point::new(100.0, 0.0)], &pts, 5.0));
    }
}
