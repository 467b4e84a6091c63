//! Divide and conquer with teams of 4ℓ robots: separator exploration,
//! recruitment by sampling, reorganization by native sub-square, and
//! centralized awakening once a square is covered.

use crate::error::AlgoError;
use crate::exploration::{execute, execute_separator, explore_separator, explore_team, team_bound};
use crate::geometry::{separator_of, Point, Rect, Square};
use crate::sampling::{dfsampling, sort_seeds, SamplingTask};
use crate::sim::{RoundRecord, World};
use crate::waketree::{build_tree, propagate};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Shared parameters of a run.
pub struct SepCtx<'a> {
    pub ell: f64,
    /// Square whose natives the run is responsible for.
    pub root: Square,
    /// Membership in `root` (closed or half-open, chosen by the caller).
    pub root_native: &'a dyn Fn(&Point) -> bool,
    /// Terminate robots once their square is done.
    pub terminate: bool,
}

impl SepCtx<'_> {
    pub fn team_size(&self) -> usize {
        self.ell.round().max(1.0) as usize
    }

    /// Whether `p` belongs to `sq`, a square of the quadtree rooted at `root`.
    pub fn native(&self, p: &Point, sq: &Square) -> bool {
        if !(self.root_native)(p) {
            return false;
        }
        let mut cur = self.root;
        while cur.width > sq.width * 1.5 {
            cur = cur.quadrants()[cur.quadrant_of(p)];
        }
        cur.center.colocated(&sq.center)
    }
}

fn by_id(world: &World, v: &mut Vec<usize>) {
    v.sort_by(|a, b| world.id(*a).lex_cmp(&world.id(*b)));
    v.dedup();
}

fn sync(world: &mut World, team: &[usize]) -> Result<f64, AlgoError> {
    let t = team.iter().map(|&i| world.clock(i)).fold(0.0, f64::max);
    for &r in team {
        world.wait_until(r, t)?;
    }
    Ok(t)
}

/// Duration bound of exploring the 2ℓ-ball around a vertex with at least `kmin` robots.
pub fn ball_bound(ell: f64, kmin: usize) -> f64 {
    let w = 4.0 * ell;
    let k = kmin.max(1) as f64;
    w * (w / (SQRT_2 * k)).ceil().max(1.0) + w / k + 2.0 * (w + w / k) + 2.0 * (w + w)
}

/// Duration bound of a sampling run over `m` samples in a width-`width` square,
/// starting anywhere in the square.
pub fn sampling_bound(ell: f64, width: f64, m: usize, kmin: usize) -> f64 {
    let m = m as f64;
    SQRT_2 * width + m * (ball_bound(ell, kmin) + 4.0 * ell) + 4.0 * width + 2.0 * m * ell
}

/// Where the team ends its separator tour: the last rectangle, next to the first.
fn separator_exit(sq: &Square, ell: f64) -> Result<Point, AlgoError> {
    let rects = separator_of(sq, ell)?.rects();
    Ok(rects[3].clamp(&rects[0].center()))
}

/// Timing of one partitioning round, from the team's start at the parent center.
pub fn partition_duration(ell: f64, width: f64, team: usize) -> Result<f64, AlgoError> {
    let parent = Square::new(Point::ORIGIN, width);
    let l = ell.round().max(1.0) as usize;
    let sub = width / 2.0;
    let mut sep = 0.0f64;
    for q in parent.quadrants() {
        let plan = explore_separator(
            &separator_of(&q, ell)?,
            l,
            parent.center,
            separator_exit(&q, ell)?,
        )?;
        sep = sep.max(plan.bound);
    }
    let _ = team;
    let m = 5 * l;
    Ok(sep + sampling_bound(ell, sub, m, l) + SQRT_2 * sub)
}

/// Outcome of the exploration and recruitment phases of a partitioning round.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOutcome {
    /// Everybody at the parent center after the merge, ascending id.
    pub present: Vec<usize>,
    pub deadline: f64,
}

/// Teams of ℓ explore the four sub-separators, recruit inside their
/// sub-square, and merge back at the center at a fixed deadline.
pub fn partition_phase(
    world: &mut World,
    ctx: &SepCtx<'_>,
    sq: &Square,
    team: &[usize],
    t0: f64,
) -> Result<PartitionOutcome, AlgoError> {
    let l = ctx.team_size();
    let mut team = team.to_vec();
    by_id(world, &mut team);
    if team.len() < 4 * l {
        return Err(AlgoError::Inadmissible(format!(
            "partition needs {} robots, team has {}",
            4 * l,
            team.len()
        )));
    }
    let deadline = t0 + partition_duration(ctx.ell, sq.width, team.len())?;
    let quads = sq.quadrants();
    let awake_ids = world.known_awake(team[0]);
    let mut present: Vec<usize> = team[4 * l..].to_vec();
    for (i, q) in quads.iter().enumerate() {
        let ti: Vec<usize> = team[i * l..(i + 1) * l].to_vec();
        let sep = separator_of(q, ctx.ell)?;
        let plan = explore_separator(&sep, l, sq.center, separator_exit(q, ctx.ell)?)?;
        let seen = execute_separator(world, &plan, &ti)?;
        let native = |p: &Point| ctx.native(p, q);
        let a_i: Vec<Point> = awake_ids.iter().copied().filter(|p| native(p)).collect();
        let mut seeds: Vec<Point> = seen
            .sleeping
            .iter()
            .copied()
            .filter(|p| native(p))
            .collect();
        seeds.extend(a_i.iter().copied().filter(|p| sep.contains(p)));
        let counted: Vec<Point> = ti
            .iter()
            .map(|&r| world.id(r))
            .filter(|p| native(p))
            .collect();
        let task = SamplingTask {
            square: *q,
            ell: ctx.ell,
            seeds: sort_seeds(q, &seeds),
            known_awake: a_i,
            target: 4 * l,
            counted,
            explored: sep.rects().to_vec(),
            native: &native,
        };
        let run = dfsampling(world, &task, &ti)?;
        for &r in &run.team {
            world.go(r, sq.center)?;
        }
        present.extend(run.team);
    }
    by_id(world, &mut present);
    for &r in &present {
        world.wait_until(r, deadline)?;
    }
    world.share(&present)?;
    Ok(PartitionOutcome { present, deadline })
}

/// Groups robots by the quadrant of `parent` holding their initial position.
pub fn reorganize(
    world: &World,
    parent: &Square,
    robots: &[usize],
) -> Result<[Vec<usize>; 4], AlgoError> {
    let mut teams: [Vec<usize>; 4] = Default::default();
    for &r in robots {
        let id = world.id(r);
        if !parent.contains(&id) {
            return Err(crate::sim::SimError::ModelViolation(format!(
                "robot {id} does not belong to any sub-square of {:?}",
                parent
            ))
            .into());
        }
        teams[parent.quadrant_of(&id)].push(r);
    }
    Ok(teams)
}

/// Least-id active member wakes every known sleeper native to `sq`.
fn centralized_awakening(
    world: &mut World,
    ctx: &SepCtx<'_>,
    sq: &Square,
    team: &[usize],
) -> Result<Vec<usize>, AlgoError> {
    let Some(&leader) = team.iter().find(|&&r| world.is_active(r)) else {
        return Ok(Vec::new());
    };
    let targets: Vec<Point> = world
        .known_sleeping(leader)
        .into_iter()
        .filter(|p| sq.contains(p) && ctx.native(p, sq))
        .collect();
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    world.go(leader, sq.center)?;
    let tree = build_tree(world.position(leader), &targets)?;
    Ok(propagate(world, &tree, leader)?.woken)
}

/// Round `k ≥ 1` for `team` standing at the center of `sq` at time `t0`.
pub fn run_round(
    world: &mut World,
    ctx: &SepCtx<'_>,
    sq: &Square,
    team: &[usize],
    k: usize,
    t0: f64,
) -> Result<Vec<usize>, AlgoError> {
    let l = ctx.team_size();
    let mut team = team.to_vec();
    by_id(world, &mut team);
    let mut woken = Vec::new();
    if team.len() < 4 * l || sq.width <= 4.0 * ctx.ell {
        let kind = if team.len() < 4 * l {
            "terminate"
        } else {
            "sweep"
        };
        if kind == "sweep" {
            let active: Vec<usize> = team
                .iter()
                .copied()
                .filter(|&r| world.is_active(r))
                .collect();
            if !active.is_empty() {
                let plan = explore_team(sq.rect(), active.len(), sq.center, sq.center)?;
                execute(world, &plan, &active)?;
            }
        }
        woken = centralized_awakening(world, ctx, sq, &team)?;
        let end = team
            .iter()
            .chain(&woken)
            .map(|&r| world.clock(r))
            .fold(t0, f64::max);
        world.record_round(RoundRecord {
            k,
            kind: kind.into(),
            square: *sq,
            start: t0,
            end,
            team: team.len(),
        });
        if ctx.terminate {
            for &r in team.iter().chain(&woken) {
                world.terminate(r)?;
            }
        }
        return Ok(woken);
    }
    let out = partition_phase(world, ctx, sq, &team, t0)?;
    world.record_round(RoundRecord {
        k,
        kind: "partition".into(),
        square: *sq,
        start: t0,
        end: out.deadline,
        team: team.len(),
    });
    let before: std::collections::HashSet<usize> = team.iter().copied().collect();
    woken.extend(out.present.iter().copied().filter(|r| !before.contains(r)));
    woken.extend(descend(world, ctx, sq, &out.present, k)?);
    Ok(woken)
}

/// After a merge at the center of `sq`: natives split by sub-square and
/// recurse into round `k + 1`; everybody else stays put.
pub fn descend(
    world: &mut World,
    ctx: &SepCtx<'_>,
    sq: &Square,
    present: &[usize],
    k: usize,
) -> Result<Vec<usize>, AlgoError> {
    let quads = sq.quadrants();
    let (natives, strays): (Vec<usize>, Vec<usize>) = present
        .iter()
        .copied()
        .partition(|&r| ctx.native(&world.id(r), sq));
    if ctx.terminate {
        for r in strays {
            world.terminate(r)?;
        }
    }
    let mut woken = Vec::new();
    let teams = reorganize(world, sq, &natives)?;
    for (i, sub) in teams.iter().enumerate() {
        if sub.is_empty() {
            continue;
        }
        for &r in sub {
            world.go(r, quads[i].center)?;
        }
        let t = sync(world, sub)?;
        woken.extend(run_round(world, ctx, &quads[i], sub, k + 1, t)?);
    }
    Ok(woken)
}

/// Round 0: the source samples the square alone, then the team meets at the center.
pub fn round_zero(
    world: &mut World,
    ctx: &SepCtx<'_>,
    sq: &Square,
    source: usize,
) -> Result<(Vec<usize>, f64), AlgoError> {
    let l = ctx.team_size();
    let s = world.id(source);
    let native = |p: &Point| ctx.native(p, sq);
    let task = SamplingTask {
        square: *sq,
        ell: ctx.ell,
        seeds: vec![s],
        known_awake: vec![s],
        target: 4 * l,
        counted: Vec::new(),
        explored: Vec::new(),
        native: &native,
    };
    let t_start = world.clock(source);
    let run = dfsampling(world, &task, &[source])?;
    let mut team = run.team;
    for &r in &team {
        world.go(r, sq.center)?;
    }
    by_id(world, &mut team);
    let t0 = sync(world, &team)?;
    world.record_round(RoundRecord {
        k: 0,
        kind: "init".into(),
        square: *sq,
        start: t_start,
        end: t0,
        team: team.len(),
    });
    Ok((team, t0))
}

/// Full run from the source with parameters `ell` and `rho`.
pub fn run_aseparator(world: &mut World, ell: f64, rho: f64) -> Result<(), AlgoError> {
    if !(ell >= 1.0 && rho >= ell) {
        return Err(AlgoError::Inadmissible(format!(
            "need 1 <= ell <= rho, got ell = {ell}, rho = {rho}"
        )));
    }
    let s = world.source();
    if rho <= 1.0 {
        let sq = Square::new(world.position(s), 2.0);
        let t0 = world.clock(s);
        let out = crate::waketree::explore_and_wake_square(world, &sq, &[s], &|p| sq.contains(p))?;
        world.record_round(RoundRecord {
            k: 1,
            kind: "terminate".into(),
            square: sq,
            start: t0,
            end: out.finish_time,
            team: 1,
        });
        for r in std::iter::once(s).chain(out.woken) {
            world.terminate(r)?;
        }
        return Ok(());
    }
    let sq = Square::new(world.position(s), 2.0 * rho);
    let closed = move |p: &Point| sq.contains(p);
    let ctx = SepCtx {
        ell,
        root: sq,
        root_native: &closed,
        terminate: true,
    };
    let (team, t0) = round_zero(world, &ctx, &sq, s)?;
    run_round(world, &ctx, &sq, &team, 1, t0)?;
    Ok(())
}

/// One round's measured duration against its bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundDuration {
    pub k: usize,
    pub kind: String,
    pub width: f64,
    pub duration: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Per-round durations against `c·(R + ℓ²)` (partitioning and sweeps),
/// `c·R` (terminating) and `c·ℓ²·log₂(1 + min(ℓ, ρ/ℓ))` (round 0).
pub fn round_accounting(rounds: &[RoundRecord], ell: f64, rho: f64, c: f64) -> Vec<RoundDuration> {
    rounds
        .iter()
        .map(|r| {
            let w = r.square.width;
            let bound = match r.kind.as_str() {
                "init" => c * ell * ell * (1.0 + ell.min(rho / ell)).log2(),
                "terminate" => c * w,
                _ => c * (w + ell * ell),
            };
            let duration = r.end - r.start;
            RoundDuration {
                k: r.k,
                kind: r.kind.clone(),
                width: w,
                duration,
                bound,
                ok: duration <= bound,
            }
        })
        .collect()
}

/// Upper bound on the number of rounds.
pub fn round_count_bound(ell: f64, rho: f64) -> f64 {
    1.0 + (1.0 + (8.0 / std::f64::consts::PI).sqrt() * rho / ell.powf(1.5)).log2()
}

/// Result of estimating the radius from the source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub estimate: f64,
    /// The sampling covered everything, so the estimate is the exact radius.
    pub exact: bool,
    /// Time spent, from the start of the procedure.
    pub duration: f64,
    /// Widths of the separators explored, in order.
    pub widths: Vec<f64>,
}

/// Whether any known robot lies in the separator (or whole square when degenerate).
fn frame_is_empty(world: &World, leader: usize, sq: &Square, ell: f64) -> bool {
    let inside = |p: &Point| match separator_of(sq, ell) {
        Ok(sep) => sep.contains(p),
        Err(_) => sq.contains(p),
    };
    let s = world.source_position();
    let sleeping = world.known_sleeping(leader);
    let awake = world.known_awake(leader);
    !sleeping
        .iter()
        .chain(awake.iter())
        .any(|p| p.key() != s.key() && inside(p))
}

fn explore_frame(
    world: &mut World,
    team: &[usize],
    sq: &Square,
    ell: f64,
) -> Result<(), AlgoError> {
    let center = sq.center;
    match separator_of(sq, ell) {
        Ok(sep) => {
            let plan = explore_separator(&sep, team.len(), center, center)?;
            execute_separator(world, &plan, team)?;
        }
        Err(_) => {
            let plan = explore_team(sq.rect(), team.len(), center, center)?;
            execute(world, &plan, team)?;
        }
    }
    if team.len() > 1 {
        let t = sync(world, team)?;
        let _ = t;
        world.share(team)?;
    }
    Ok(())
}

/// Radius estimate: recruit a team of 4ℓ, then explore separators of growing
/// squares around the source until one is empty.
pub fn estimate_rho(world: &mut World, ell: f64) -> Result<RhoEstimate, AlgoError> {
    let l = ell.round().max(1.0) as usize;
    let s = world.source();
    let origin = world.position(s);
    let t_start = world.clock(s);
    let width = 2.0 * (8.0 * ell * ell + 2.0 * ell) + 4.0 * ell;
    let sq = Square::new(origin, width);
    let native = |p: &Point| sq.contains(p);
    let task = SamplingTask {
        square: sq,
        ell,
        seeds: vec![origin],
        known_awake: vec![origin],
        target: 4 * l,
        counted: Vec::new(),
        explored: Vec::new(),
        native: &native,
    };
    let run = dfsampling(world, &task, &[s])?;
    let mut team = run.team;
    by_id(world, &mut team);
    for &r in &team {
        world.go(r, origin)?;
    }
    sync(world, &team)?;
    if team.len() > 1 {
        world.share(&team)?;
    }
    let leader = team[0];
    let far = |w: &World| {
        w.known_sleeping(leader)
            .iter()
            .chain(w.known_awake(leader).iter())
            .map(|p| p.dist(&origin))
            .fold(0.0, f64::max)
    };
    if run.sampling.covered_flag {
        let est = far(world);
        let finish = team.iter().map(|&r| world.clock(r)).fold(t_start, f64::max);
        return Ok(RhoEstimate {
            estimate: est,
            exact: true,
            duration: finish - t_start,
            widths: Vec::new(),
        });
    }
    let mut widths = Vec::new();
    let mut w = ell;
    let empty_w = loop {
        w *= 2.0;
        widths.push(w);
        let frame = Square::new(origin, w);
        explore_frame(world, &team, &frame, ell)?;
        if frame_is_empty(world, leader, &frame, ell) {
            break w;
        }
    };
    let mut best = empty_w;
    for j in 1..=3 {
        let wj = empty_w / 2.0 * 1.25f64.powi(j);
        if wj >= empty_w {
            break;
        }
        widths.push(wj);
        let frame = Square::new(origin, wj);
        explore_frame(world, &team, &frame, ell)?;
        if frame_is_empty(world, leader, &frame, ell) {
            best = wj;
            break;
        }
    }
    let est = (SQRT_2 * (best / 2.0 - ell)).max(far(world));
    let finish = team.iter().map(|&r| world.clock(r)).fold(t_start, f64::max);
    Ok(RhoEstimate {
        estimate: est,
        exact: false,
        duration: finish - t_start,
        widths,
    })
}

/// Analytic duration of a full run inside a width-`width` square started by a
/// team at its center, summed over the quadtree levels.
pub fn full_run_bound(ell: f64, width: f64) -> Result<f64, AlgoError> {
    let l = ell.round().max(1.0) as usize;
    let mut total = 0.0;
    let mut w = width;
    while w > 4.0 * ell {
        total += partition_duration(ell, w, 4 * l)? + SQRT_2 * w / 4.0;
        w /= 2.0;
    }
    // Last level: sweep by at least 4ℓ robots (or nothing to do), then a tree.
    total += team_bound(w, w, 4 * l).max(team_bound(w, w, 1)) + 5.0 * w;
    // A terminating round at any level costs at most a tree over its square.
    total += 5.0 * width;
    Ok(total)
}

/// Bounding rectangle of the quadrant path for plotting.
pub fn quadrant_rects(sq: &Square) -> [Rect; 4] {
    sq.quadrants().map(|q| q.rect())
}
