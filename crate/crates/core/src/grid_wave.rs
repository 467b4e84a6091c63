//! Energy-limited algorithms. Agrid wakes 2ℓ-wide grid cells one hop at a
//! time with single robots; Awave does the same on much larger cells with
//! teams running the divide-and-conquer algorithm inside each cell.

use crate::error::AlgoError;
use crate::geometry::{separator_of, Point, Square};
use crate::separator::{
    descend, full_run_bound, partition_phase, round_zero, run_round, sampling_bound, SepCtx,
};
use crate::sim::{RoundRecord, World};
use crate::waketree::{explore_and_wake_bound, explore_and_wake_square};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

pub type CellIndex = (i64, i64);

/// Neighbor offsets from the east, counter-clockwise.
pub const NEIGHBOR_ORDER: [CellIndex; 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

pub fn adjacency_schedule(cell: CellIndex) -> [CellIndex; 8] {
    NEIGHBOR_ORDER.map(|(dx, dy)| (cell.0 + dx, cell.1 + dy))
}

/// Square of width `width` centered at `width · index`, owning its west and south sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub index: CellIndex,
    pub width: f64,
}

impl GridCell {
    pub fn center(&self) -> Point {
        Point::new(
            self.index.0 as f64 * self.width,
            self.index.1 as f64 * self.width,
        )
    }

    pub fn square(&self) -> Square {
        Square::new(self.center(), self.width)
    }

    pub fn index_of(p: &Point, width: f64) -> CellIndex {
        (
            ((p.x + width / 2.0) / width).floor() as i64,
            ((p.y + width / 2.0) / width).floor() as i64,
        )
    }

    pub fn contains(&self, p: &Point) -> bool {
        Self::index_of(p, self.width) == self.index
    }
}

/// Width-2ℓ cell of Agrid.
pub fn grid_cell(index: CellIndex, ell: f64) -> GridCell {
    GridCell {
        index,
        width: 2.0 * ell,
    }
}

/// Cell width of Awave for the clamped ℓ.
pub fn wave_width(ell: f64) -> f64 {
    let l = wave_ell(ell);
    8.0 * l * l * l.log2()
}

pub fn wave_ell(ell: f64) -> f64 {
    ell.max(4.0)
}

/// Wave cell of Awave.
pub fn wave_cell(index: CellIndex, ell: f64) -> GridCell {
    GridCell {
        index,
        width: wave_width(ell),
    }
}

/// Time for one explore-and-wake of a 2ℓ cell.
pub fn agrid_cell_time(ell: f64) -> f64 {
    explore_and_wake_bound(2.0 * ell)
}

/// Start of Agrid round `k ≥ 1`.
pub fn agrid_round_start(ell: f64, k: usize) -> f64 {
    let t = agrid_cell_time(ell);
    t + 8.0 * (k as f64 - 1.0) * (t + SQRT_2 * 2.0 * ell)
}

fn newly_woken(world: &World, before: &[bool]) -> Vec<usize> {
    (1..world.len())
        .filter(|&i| world.wake_time(i).is_some() && !before.get(i).copied().unwrap_or(false))
        .collect()
}

fn awake_flags(world: &World) -> Vec<bool> {
    (0..world.len())
        .map(|i| world.wake_time(i).is_some())
        .collect()
}

fn group_by_cell(world: &World, robots: &[usize], width: f64) -> BTreeMap<CellIndex, Vec<usize>> {
    let mut out: BTreeMap<CellIndex, Vec<usize>> = BTreeMap::new();
    for &r in robots {
        out.entry(GridCell::index_of(&world.id(r), width))
            .or_default()
            .push(r);
    }
    for v in out.values_mut() {
        v.sort_by(|a, b| world.id(*a).lex_cmp(&world.id(*b)));
    }
    out
}

pub fn run_agrid(world: &mut World, ell: f64) -> Result<(), AlgoError> {
    if !(ell >= 1.0) {
        return Err(AlgoError::Inadmissible(format!("need ell >= 1, got {ell}")));
    }
    let width = 2.0 * ell;
    let t_cell = agrid_cell_time(ell);
    let slot = t_cell + SQRT_2 * width;
    let s = world.source();
    let home = grid_cell((0, 0), ell);
    let before = awake_flags(world);
    let sq = home.square();
    explore_and_wake_square(world, &sq, &[s], &|p| home.contains(p))?;
    world.record_round(RoundRecord {
        k: 0,
        kind: "cell".into(),
        square: sq,
        start: 0.0,
        end: t_cell,
        team: 1,
    });
    let mut fresh = newly_woken(world, &before);
    fresh.push(s);
    let mut k = 1;
    while !fresh.is_empty() {
        let tk = agrid_round_start(ell, k);
        let groups = group_by_cell(world, &fresh, width);
        let before = awake_flags(world);
        let mut actors: Vec<(CellIndex, usize)> = Vec::new();
        for (cell, members) in &groups {
            let active: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&r| world.is_active(r))
                .collect();
            if let Some((&a, rest)) = active.split_first() {
                actors.push((*cell, a));
                for &r in rest {
                    world.terminate(r)?;
                }
            }
        }
        for i in 0..8 {
            let start = tk + slot * i as f64;
            for &(cell, a) in &actors {
                let target = grid_cell(adjacency_schedule(cell)[i], ell);
                let sq = target.square();
                world.go(a, sq.lower_left())?;
                world.wait_until(a, start)?;
                explore_and_wake_square(world, &sq, &[a], &|p| target.contains(p))?;
                world.record_round(RoundRecord {
                    k,
                    kind: "cell".into(),
                    square: sq,
                    start,
                    end: start + t_cell,
                    team: 1,
                });
            }
        }
        for &(_, a) in &actors {
            world.terminate(a)?;
        }
        fresh = newly_woken(world, &before);
        k += 1;
    }
    Ok(())
}

/// Upper bound on everything one wave cell needs inside a slot: reaching the
/// center, a full divide-and-conquer run, and walking to a cell corner.
pub fn awave_cell_time(ell: f64) -> Result<f64, AlgoError> {
    let l = wave_ell(ell);
    let r = wave_width(ell);
    let m = 4 * l.round() as usize;
    Ok(sampling_bound(l, r, m, 1) + r / SQRT_2 + full_run_bound(l, r)? + 2.0 * SQRT_2 * r)
}

pub fn awave_round_start(ell: f64, k: usize) -> Result<f64, AlgoError> {
    let t = awave_cell_time(ell)?;
    Ok(t + 8.0 * (k as f64 - 1.0) * (t + SQRT_2 * wave_width(ell)))
}

/// Where robots of `cell` meet before a wave round: the lower-left corner of
/// the first neighbor visited.
fn muster_point(cell: &GridCell) -> Point {
    let sq = cell.square();
    Point::new(sq.upper_right().x, sq.lower_left().y)
}

fn muster(world: &mut World, robots: &[usize], width: f64, at: f64) -> Result<(), AlgoError> {
    for &r in robots {
        if !world.is_active(r) {
            continue;
        }
        let cell = GridCell {
            index: GridCell::index_of(&world.id(r), width),
            width,
        };
        world.go(r, muster_point(&cell))?;
        world.wait_until(r, at)?;
    }
    Ok(())
}

pub fn run_awave(world: &mut World, ell: f64) -> Result<(), AlgoError> {
    if !(ell >= 1.0) {
        return Err(AlgoError::Inadmissible(format!("need ell >= 1, got {ell}")));
    }
    let l = wave_ell(ell);
    let four_l = 4 * l.round() as usize;
    let width = wave_width(ell);
    let t_cell = awave_cell_time(ell)?;
    let slot = t_cell + SQRT_2 * width;
    let s = world.source();
    let home = wave_cell((0, 0), ell);
    let home_sq = home.square();
    let before = awake_flags(world);
    {
        let native = |p: &Point| home.contains(p);
        let ctx = SepCtx {
            ell: l,
            root: home_sq,
            root_native: &native,
            terminate: false,
        };
        let (team, t0) = round_zero(world, &ctx, &home_sq, s)?;
        run_round(world, &ctx, &home_sq, &team, 1, t0)?;
    }
    let mut fresh = newly_woken(world, &before);
    fresh.push(s);
    // Stop at once when the separator of the source cell holds nobody.
    let sep = separator_of(&home_sq, l)?;
    let mut known: Vec<Point> = Vec::new();
    for &r in &fresh {
        known.extend(world.known_awake(r));
        known.extend(world.known_sleeping(r));
    }
    if !known.iter().any(|p| sep.contains(p)) {
        for &r in &fresh {
            if world.is_active(r) {
                world.terminate(r)?;
            }
        }
        return Ok(());
    }
    let mut k = 1;
    muster(world, &fresh, width, awave_round_start(ell, 1)?)?;
    while !fresh.is_empty() {
        let tk = awave_round_start(ell, k)?;
        let groups = group_by_cell(world, &fresh, width);
        let before = awake_flags(world);
        let mut teams: Vec<(CellIndex, Vec<usize>)> = Vec::new();
        for (cell, members) in groups {
            let active: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&r| world.is_active(r))
                .collect();
            if active.len() >= four_l {
                world.share(&active)?;
                teams.push((cell, active));
            } else {
                for r in active {
                    world.terminate(r)?;
                }
            }
        }
        for i in 0..8 {
            let start = tk + slot * i as f64;
            for (cell, team) in &teams {
                let target = wave_cell(adjacency_schedule(*cell)[i], ell);
                let sq = target.square();
                for &r in team.iter() {
                    world.go(r, sq.lower_left())?;
                    world.wait_until(r, start)?;
                    world.go(r, sq.center)?;
                }
                let active: Vec<usize> = team
                    .iter()
                    .copied()
                    .filter(|&r| world.is_active(r))
                    .collect();
                if active.len() < four_l {
                    continue;
                }
                let t0 = start + sq.half() * SQRT_2;
                for &r in &active {
                    world.wait_until(r, t0)?;
                }
                let native = |p: &Point| target.contains(p);
                let ctx = SepCtx {
                    ell: l,
                    root: sq,
                    root_native: &native,
                    terminate: false,
                };
                let out = partition_phase(world, &ctx, &sq, &active, t0)?;
                world.record_round(RoundRecord {
                    k,
                    kind: "cell".into(),
                    square: sq,
                    start,
                    end: start + t_cell,
                    team: active.len(),
                });
                descend(world, &ctx, &sq, &out.present, 1)?;
            }
        }
        for (_, team) in &teams {
            for &r in team {
                if world.is_active(r) {
                    world.terminate(r)?;
                }
            }
        }
        fresh = newly_woken(world, &before);
        k += 1;
        if !fresh.is_empty() {
            muster(world, &fresh, width, awave_round_start(ell, k)?)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_starts_east_and_turns_left() {
        let s = adjacency_schedule((0, 0));
        assert_eq!(s[0], (1, 0));
        assert_eq!(s[2], (0, 1));
        let mut sorted = s.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 8);
    }

    #[test]
    fn wave_width_at_four() {
        assert_eq!(wave_width(1.0), 256.0);
        assert_eq!(wave_width(4.0), 256.0);
    }

    #[test]
    fn cells_are_half_open() {
        assert_eq!(GridCell::index_of(&Point::new(1.0, -1.0), 2.0), (1, 0));
        assert_eq!(GridCell::index_of(&Point::new(-1.0, 0.999), 2.0), (0, 0));
    }
}
