//! Distributed ℓ-sampling: a depth-first traversal of the 2ℓ-disk graph
//! that recruits the sleepers it keeps.

use crate::error::AlgoError;
use crate::exploration::{execute, explore_team};
use crate::geometry::{clockwise_angle, within, Point, Rect, Square, REL_TOL};
use crate::sim::World;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Sample positions in the order they were added.
    pub points: Vec<Point>,
    /// The traversal ran out of vertices before reaching its target.
    pub covered_flag: bool,
    /// Ids woken by the run.
    pub recruited: Vec<Point>,
}

/// Nearest border point of `square` to `p`; ties go to the first one clockwise.
pub fn border_projection(square: &Square, p: &Point) -> Point {
    let lo = square.lower_left();
    let hi = square.upper_right();
    let cands = [
        (p.x - lo.x, Point::new(lo.x, p.y)),
        (hi.x - p.x, Point::new(hi.x, p.y)),
        (p.y - lo.y, Point::new(p.x, lo.y)),
        (hi.y - p.y, Point::new(p.x, hi.y)),
    ];
    let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    cands
        .iter()
        .filter(|c| c.0 <= best + REL_TOL * square.width.max(1.0))
        .map(|c| c.1)
        .min_by(|a, b| {
            clockwise_angle(&square.center, a).total_cmp(&clockwise_angle(&square.center, b))
        })
        .expect("four candidates")
}

/// Seeds ordered clockwise (from the upward vertical) by their border projection.
pub fn sort_seeds(square: &Square, seeds: &[Point]) -> Vec<Point> {
    let mut keyed: Vec<(f64, Point)> = seeds
        .iter()
        .map(|s| {
            (
                clockwise_angle(&square.center, &border_projection(square, s)),
                *s,
            )
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.lex_cmp(&b.1)));
    keyed.dedup_by(|a, b| a.1.key() == b.1.key());
    keyed.into_iter().map(|k| k.1).collect()
}

/// Whether the part of the disk inside `clip` lies in the union of `rects`.
pub fn disk_in_union(c: &Point, r: f64, clip: &Rect, rects: &[Rect]) -> bool {
    let Some(target) = clip.intersect(&Rect::around(c, r)) else {
        return true;
    };
    let parts: Vec<Rect> = rects.iter().filter_map(|q| q.intersect(&target)).collect();
    if parts.is_empty() {
        return false;
    }
    let mut xs = vec![target.lo.x, target.hi.x];
    let mut ys = vec![target.lo.y, target.hi.y];
    for q in &parts {
        xs.extend([q.lo.x, q.hi.x]);
        ys.extend([q.lo.y, q.hi.y]);
    }
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    for a in xs.windows(2) {
        for b in ys.windows(2) {
            if a[1] - a[0] <= 1e-12 || b[1] - b[0] <= 1e-12 {
                continue;
            }
            let cell = Rect::new(Point::new(a[0], b[0]), Point::new(a[1], b[1]));
            if cell.clamp(c).dist(c) >= r {
                continue;
            }
            let mid = cell.center();
            if !parts
                .iter()
                .any(|q| q.lo.x <= mid.x && mid.x <= q.hi.x && q.lo.y <= mid.y && mid.y <= q.hi.y)
            {
                return false;
            }
        }
    }
    true
}

/// Inputs of one sampling run.
pub struct SamplingTask<'a> {
    pub square: Square,
    pub ell: f64,
    /// Seeds in traversal order (see [`sort_seeds`]).
    pub seeds: Vec<Point>,
    /// Initial positions of robots already awake in the square.
    pub known_awake: Vec<Point>,
    /// Stop once this many distinct robots are counted.
    pub target: usize,
    /// Ids counted toward the target besides the samples.
    pub counted: Vec<Point>,
    /// Regions whose sleepers are already known to the team.
    pub explored: Vec<Rect>,
    /// Positions the square owns.
    pub native: &'a dyn Fn(&Point) -> bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingRun {
    pub sampling: Sampling,
    /// Final team, ascending id.
    pub team: Vec<usize>,
    pub start_time: f64,
    pub finish_time: f64,
}

struct Frame {
    at: Point,
    candidates: Vec<Point>,
}

fn far_from_all(p: &Point, set: &[Point], ell: f64) -> bool {
    set.iter().all(|q| p.dist(q) > ell * (1.0 + REL_TOL))
}

/// Runs the traversal with `team`, which stands co-located.
pub fn dfsampling(
    world: &mut World,
    task: &SamplingTask<'_>,
    team: &[usize],
) -> Result<SamplingRun, AlgoError> {
    if team.is_empty() {
        return Err(AlgoError::EmptyTeam);
    }
    for s in &task.seeds {
        if !task.square.contains(s) {
            return Err(AlgoError::Outside {
                point: *s,
                region: "sampled square",
            });
        }
    }
    let ell = task.ell;
    let clip = task.square.rect();
    let mut team: Vec<usize> = team.to_vec();
    let by_id = |w: &World, t: &mut Vec<usize>| t.sort_by(|a, b| w.id(*a).lex_cmp(&w.id(*b)));
    by_id(world, &mut team);
    let start_time = team.iter().map(|&i| world.clock(i)).fold(0.0, f64::max);
    let awake: HashSet<(u64, u64)> = task.known_awake.iter().map(Point::key).collect();
    let mut counted: HashSet<(u64, u64)> = task.counted.iter().map(Point::key).collect();
    let mut samples: Vec<Point> = Vec::new();
    let mut recruited = Vec::new();
    let mut explored = task.explored.clone();
    let mut reached = counted.len() >= task.target;

    let seeds: Vec<Point> = task
        .seeds
        .iter()
        .copied()
        .filter(|s| (task.native)(s))
        .collect();
    'seeds: for seed in seeds {
        if reached {
            break;
        }
        if !far_from_all(&seed, &samples, ell) {
            continue;
        }
        let mut stack: Vec<Frame> = Vec::new();
        let mut next = Some(seed);
        loop {
            if let Some(v) = next.take() {
                move_team(world, &team, v)?;
                samples.push(v);
                counted.insert(v.key());
                if !awake.contains(&v.key()) {
                    if let Some(j) = wake_from(world, &team, v)? {
                        recruited.push(v);
                        team.push(j);
                        by_id(world, &mut team);
                    }
                }
                if counted.len() >= task.target {
                    reached = true;
                    break 'seeds;
                }
                let active: Vec<usize> = team
                    .iter()
                    .copied()
                    .filter(|&i| world.is_active(i))
                    .collect();
                if active.is_empty() {
                    break 'seeds;
                }
                if !disk_in_union(&v, 2.0 * ell, &clip, &explored) {
                    let rect = clip
                        .intersect(&Rect::around(&v, 2.0 * ell))
                        .expect("vertex lies in the square");
                    let plan = explore_team(rect, active.len(), v, v)?;
                    execute(world, &plan, &active)?;
                    explored.push(rect);
                } else if active.len() > 1 {
                    world.share(&active)?;
                }
                let leader = active[0];
                let mut cands: Vec<Point> = world
                    .known_sleeping(leader)
                    .into_iter()
                    .chain(task.known_awake.iter().copied())
                    .filter(|p| {
                        within(p.dist(&v), 2.0 * ell) && task.square.contains(p) && (task.native)(p)
                    })
                    .filter(|p| far_from_all(p, &samples, ell))
                    .collect();
                cands.sort_by(|a, b| v.dist(b).total_cmp(&v.dist(a)).then(b.lex_cmp(a)));
                cands.dedup_by(|a, b| a.key() == b.key());
                stack.push(Frame {
                    at: v,
                    candidates: cands,
                });
            }
            let Some(top) = stack.last_mut() else { break };
            match top.candidates.pop() {
                Some(c) => {
                    if far_from_all(&c, &samples, ell) {
                        next = Some(c);
                    }
                }
                None => {
                    stack.pop();
                    if let Some(parent) = stack.last() {
                        let at = parent.at;
                        move_team(world, &team, at)?;
                    }
                }
            }
        }
    }
    let finish_time = team
        .iter()
        .map(|&i| world.clock(i))
        .fold(start_time, f64::max);
    Ok(SamplingRun {
        sampling: Sampling {
            points: samples,
            covered_flag: !reached,
            recruited,
        },
        team,
        start_time,
        finish_time,
    })
}

fn move_team(world: &mut World, team: &[usize], to: Point) -> Result<(), AlgoError> {
    for &r in team {
        world.go(r, to)?;
    }
    Ok(())
}

/// The least-id active member wakes the sleeper at `p`.
fn wake_from(world: &mut World, team: &[usize], p: Point) -> Result<Option<usize>, AlgoError> {
    let Some(&r) = team.iter().find(|&&i| world.is_active(i)) else {
        return Ok(None);
    };
    if !world.known_sleeping(r).iter().any(|q| q.key() == p.key()) {
        return Ok(None);
    }
    // Members arrive at different local clocks when they come from different branches.
    let t = team
        .iter()
        .filter(|&&i| world.is_active(i))
        .map(|&i| world.clock(i))
        .fold(0.0, f64::max);
    world.wait_until(r, t)?;
    Ok(world.wake(r, p)?)
}

/// Which duration law applies to a sampling run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Solo,
    Team,
}

/// Measured duration against `c·ℓ²·log₂(1+|P′|)` (solo) or `c·(R + ℓ|P′|)` (team).
pub fn dfsampling_duration_check(
    duration: f64,
    mode: SamplingMode,
    ell: f64,
    samples: usize,
    width: f64,
    c: f64,
) -> bool {
    let k = samples as f64;
    let bound = match mode {
        SamplingMode::Solo => c * ell * ell * (1.0 + k).log2().max(1.0),
        SamplingMode::Team => c * (width + ell * k),
    };
    duration <= bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_order_is_clockwise_from_top() {
        let sq = Square::new(Point::ORIGIN, 10.0);
        let top = Point::new(0.0, 4.0);
        let right = Point::new(4.0, 0.0);
        let bottom = Point::new(0.0, -4.0);
        let left = Point::new(-4.0, 0.0);
        assert_eq!(
            sort_seeds(&sq, &[left, bottom, right, top]),
            vec![top, right, bottom, left]
        );
    }

    #[test]
    fn union_coverage() {
        let clip = Rect::new(Point::new(-10.0, -10.0), Point::new(10.0, 10.0));
        let a = Rect::new(Point::new(-3.0, -3.0), Point::new(0.5, 3.0));
        let b = Rect::new(Point::new(0.0, -3.0), Point::new(3.0, 3.0));
        assert!(disk_in_union(&Point::ORIGIN, 2.0, &clip, &[a, b]));
        assert!(!disk_in_union(&Point::ORIGIN, 2.0, &clip, &[a]));
        assert!(disk_in_union(
            &Point::new(9.0, 9.0),
            0.5,
            &clip,
            &[Rect::new(Point::new(8.0, 8.0), Point::new(10.0, 10.0))]
        ));
    }
}
