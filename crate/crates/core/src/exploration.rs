//! Rectangle exploration by one robot or by a co-located team.
//!
//! Looks are placed on a lattice of pitch √2: every disk of radius 1 contains
//! the square of width √2 with the same center, so the lattice squares tile
//! the rectangle and every point is seen.

use crate::error::AlgoError;
use crate::geometry::{Point, Rect, Separator};
use crate::sim::World;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// One robot's share of an exploration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripAssignment {
    /// Rank of the robot in the team sorted by ascending id.
    pub slot: usize,
    pub strip: Rect,
    /// Look positions, visited in order.
    pub waypoints: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorePlan {
    pub rect: Rect,
    pub start: Point,
    pub end: Point,
    pub assignments: Vec<StripAssignment>,
    /// Duration bound; with a rendezvous this is also the wait target.
    pub bound: f64,
    /// Whether the team waits for the bound and shares at `end`.
    pub rendezvous: bool,
}

impl ExplorePlan {
    /// Path length of the robot in `slot` from start to end.
    pub fn path_length(&self, slot: usize) -> f64 {
        let wp = &self.assignments[slot].waypoints;
        let mut len = self.start.dist(&wp[0]) + wp[wp.len() - 1].dist(&self.end);
        for pair in wp.windows(2) {
            len += pair[0].dist(&pair[1]);
        }
        len
    }
}

/// Coordinates of rows (or columns) of looks over `[lo, hi]`.
fn lattice(lo: f64, hi: f64) -> Vec<f64> {
    let len = hi - lo;
    if len < SQRT_2 {
        return vec![lo + len / 2.0];
    }
    let n = (len / SQRT_2).ceil() as usize;
    (0..n)
        .map(|j| (lo + SQRT_2 * (j as f64 + 0.5)).min(hi - SQRT_2 / 2.0))
        .collect()
}

/// Boustrophedon look sequence covering `r`.
pub fn sweep_waypoints(r: &Rect) -> Vec<Point> {
    let xs = lattice(r.lo.x, r.hi.x);
    let ys = lattice(r.lo.y, r.hi.y);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for (j, y) in ys.iter().enumerate() {
        if j % 2 == 0 {
            out.extend(xs.iter().map(|x| Point::new(*x, *y)));
        } else {
            out.extend(xs.iter().rev().map(|x| Point::new(*x, *y)));
        }
    }
    out
}

/// Path-length bound for one robot sweeping a `w` by `h` rectangle.
pub fn single_bound(w: f64, h: f64) -> f64 {
    w * (h / SQRT_2).ceil().max(1.0) + h + 2.0 * (w + h)
}

/// Duration bound of a `k`-robot exploration of a `w` by `h` rectangle.
pub fn team_bound(w: f64, h: f64, k: usize) -> f64 {
    let hs = h / k as f64;
    let slack = if k > 1 { 2.0 * (w + h) } else { 0.0 };
    single_bound(w, hs) + slack
}

fn check_inside(rect: &Rect, p: &Point, what: &'static str) -> Result<(), AlgoError> {
    if rect.contains(p) {
        Ok(())
    } else {
        Err(AlgoError::Outside {
            point: *p,
            region: what,
        })
    }
}

pub fn explore_single(rect: Rect, start: Point, end: Point) -> Result<ExplorePlan, AlgoError> {
    explore_team(rect, 1, start, end)
}

/// Splits `rect` into `k` horizontal strips, bottom to top.
pub fn explore_team(
    rect: Rect,
    k: usize,
    start: Point,
    end: Point,
) -> Result<ExplorePlan, AlgoError> {
    if k == 0 {
        return Err(AlgoError::EmptyTeam);
    }
    check_inside(&rect, &start, "exploration rectangle (start)")?;
    check_inside(&rect, &end, "exploration rectangle (end)")?;
    let hs = rect.height() / k as f64;
    let assignments = (0..k)
        .map(|i| {
            let lo = Point::new(rect.lo.x, rect.lo.y + hs * i as f64);
            let hi = Point::new(
                rect.hi.x,
                if i + 1 == k {
                    rect.hi.y
                } else {
                    rect.lo.y + hs * (i + 1) as f64
                },
            );
            let strip = Rect::new(lo, hi);
            StripAssignment {
                slot: i,
                strip,
                waypoints: sweep_waypoints(&strip),
            }
        })
        .collect();
    Ok(ExplorePlan {
        rect,
        start,
        end,
        assignments,
        bound: team_bound(rect.width(), rect.height(), k),
        rendezvous: k > 1,
    })
}

/// What a team learned while executing a plan.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExploreOutcome {
    /// Sleeping positions seen, sorted and deduplicated.
    pub sleeping: Vec<Point>,
    pub start_time: f64,
    pub finish_time: f64,
}

fn sorted_team(world: &World, team: &[usize]) -> Vec<usize> {
    let mut t = team.to_vec();
    t.sort_by(|a, b| world.id(*a).lex_cmp(&world.id(*b)));
    t.dedup();
    t
}

fn merge_points(v: &mut Vec<Point>) {
    v.sort_by(|a, b| a.lex_cmp(b));
    v.dedup_by(|a, b| a.key() == b.key());
}

/// Runs `plan` with `team`; members are matched to slots by ascending id.
pub fn execute(
    world: &mut World,
    plan: &ExplorePlan,
    team: &[usize],
) -> Result<ExploreOutcome, AlgoError> {
    let team = sorted_team(world, team);
    if team.len() != plan.assignments.len() {
        return Err(AlgoError::TeamMismatch {
            team: team.len(),
            plan: plan.assignments.len(),
        });
    }
    let t0 = team.iter().map(|&i| world.clock(i)).fold(0.0, f64::max);
    let mut seen = Vec::new();
    for (a, &r) in plan.assignments.iter().zip(&team) {
        world.wait_until(r, t0)?;
        world.go(r, plan.start)?;
        for wp in &a.waypoints {
            world.go(r, *wp)?;
            seen.extend(world.look(r)?.sleeping);
        }
        world.go(r, plan.end)?;
    }
    if plan.rendezvous {
        for &r in &team {
            world.wait_until(r, t0 + plan.bound)?;
        }
        world.share(&team)?;
    }
    merge_points(&mut seen);
    let finish = team.iter().map(|&i| world.clock(i)).fold(t0, f64::max);
    Ok(ExploreOutcome {
        sleeping: seen,
        start_time: t0,
        finish_time: finish,
    })
}

/// Exploration of the four pinwheel rectangles of a separator in sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatorPlan {
    pub separator: Separator,
    pub start: Point,
    pub end: Point,
    pub legs: Vec<ExplorePlan>,
    pub bound: f64,
}

pub fn explore_separator(
    sep: &Separator,
    k: usize,
    start: Point,
    end: Point,
) -> Result<SeparatorPlan, AlgoError> {
    if k == 0 {
        return Err(AlgoError::EmptyTeam);
    }
    let rects = sep.rects();
    let mut legs = Vec::with_capacity(4);
    let mut at = start;
    let mut bound = 0.0;
    for (i, r) in rects.iter().enumerate() {
        let entry = r.clamp(&at);
        let exit = if i + 1 < rects.len() {
            r.clamp(&rects[i + 1].center())
        } else {
            r.clamp(&end)
        };
        bound += at.dist(&entry);
        let leg = explore_team(*r, k, entry, exit)?;
        bound += leg.bound;
        legs.push(leg);
        at = exit;
    }
    bound += at.dist(&end);
    Ok(SeparatorPlan {
        separator: *sep,
        start,
        end,
        legs,
        bound,
    })
}

/// Runs a separator plan; the outcome lists the sleepers seen inside the separator.
pub fn execute_separator(
    world: &mut World,
    plan: &SeparatorPlan,
    team: &[usize],
) -> Result<ExploreOutcome, AlgoError> {
    let team = sorted_team(world, team);
    let t0 = team.iter().map(|&i| world.clock(i)).fold(0.0, f64::max);
    let mut seen = Vec::new();
    for leg in &plan.legs {
        for &r in &team {
            world.go(r, leg.start)?;
        }
        seen.extend(execute(world, leg, &team)?.sleeping);
    }
    for &r in &team {
        world.go(r, plan.end)?;
    }
    seen.retain(|p| plan.separator.contains(p));
    merge_points(&mut seen);
    let finish = team.iter().map(|&i| world.clock(i)).fold(t0, f64::max);
    Ok(ExploreOutcome {
        sleeping: seen,
        start_time: t0,
        finish_time: finish,
    })
}
