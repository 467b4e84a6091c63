//! Discretized discovered region and the lazy adversary that places robots
//! in the last undiscovered cell of their region.

use crate::geometry::{Point, REL_TOL};
use rustc_hash::FxHashMap as HashMap;
use serde::{Deserialize, Serialize};

/// A robot whose position is chosen by the adversary inside a disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LazyRobot {
    pub center: Point,
    pub radius: f64,
    /// Grid pitch used to discretize the region.
    pub resolution: f64,
    /// Extra robots materializing next to this one.
    #[serde(default)]
    pub followers: usize,
}

impl LazyRobot {
    /// Offset of follower `k` around the materialization point.
    pub fn follower_offset(&self, k: usize) -> (f64, f64) {
        let eps = self.resolution / 4.0;
        let f = self.followers.max(1) as f64;
        let r = eps * (k as f64 + 1.0) / (f + 1.0);
        let a = 2.0 * std::f64::consts::PI * (k as f64) / f + 0.5;
        (r * a.cos(), r * a.sin())
    }
}

pub type Cell = (i64, i64);

const CHUNK: i64 = 64;

/// Uniform grid of cells; a cell is discovered once its center has been
/// within distance 1 of a look or of a move corridor.
#[derive(Clone, Debug)]
pub struct DiscoveryGrid {
    pitch: f64,
    chunks: HashMap<Cell, Box<[u64; CHUNK as usize]>>,
    count: u64,
}

impl DiscoveryGrid {
    pub fn new(pitch: f64) -> Self {
        assert!(pitch > 0.0, "grid pitch must be positive");
        DiscoveryGrid {
            pitch,
            chunks: HashMap::default(),
            count: 0,
        }
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn center(&self, c: Cell) -> Point {
        Point::new(
            (c.0 as f64 + 0.5) * self.pitch,
            (c.1 as f64 + 0.5) * self.pitch,
        )
    }

    pub fn is_discovered(&self, c: Cell) -> bool {
        let key = (c.0.div_euclid(CHUNK), c.1.div_euclid(CHUNK));
        self.chunks
            .get(&key)
            .is_some_and(|ch| ch[c.1.rem_euclid(CHUNK) as usize] >> c.0.rem_euclid(CHUNK) & 1 == 1)
    }

    fn set(&mut self, c: Cell) -> bool {
        let key = (c.0.div_euclid(CHUNK), c.1.div_euclid(CHUNK));
        let row = &mut self
            .chunks
            .entry(key)
            .or_insert_with(|| Box::new([0; CHUNK as usize]))[c.1.rem_euclid(CHUNK) as usize];
        let bit = 1u64 << c.0.rem_euclid(CHUNK);
        if *row & bit != 0 {
            return false;
        }
        *row |= bit;
        self.count += 1;
        true
    }

    pub fn discovered_cells(&self) -> u64 {
        self.count
    }

    pub fn area(&self) -> f64 {
        self.count as f64 * self.pitch * self.pitch
    }

    fn rows(&self, ylo: f64, yhi: f64) -> std::ops::RangeInclusive<i64> {
        let p = self.pitch;
        ((ylo / p - 0.5).ceil() as i64)..=((yhi / p - 0.5).floor() as i64)
    }

    fn cols(&self, xlo: f64, xhi: f64) -> std::ops::RangeInclusive<i64> {
        let p = self.pitch;
        ((xlo / p - 0.5).ceil() as i64)..=((xhi / p - 0.5).floor() as i64)
    }

    /// Cells whose centers lie in the closed disk, row by row.
    pub fn disk_cells(&self, c: &Point, r: f64) -> Vec<Cell> {
        let r = r * (1.0 + REL_TOL);
        let mut out = Vec::new();
        for j in self.rows(c.y - r, c.y + r) {
            let dy = (j as f64 + 0.5) * self.pitch - c.y;
            let h = (r * r - dy * dy).max(0.0).sqrt();
            out.extend(self.cols(c.x - h, c.x + h).map(|i| (i, j)));
        }
        out
    }

    /// Marks the disk; calls `hit` on every newly discovered cell.
    pub fn mark_disk(&mut self, c: &Point, r: f64, mut hit: impl FnMut(Cell)) {
        for cell in self.disk_cells(c, r) {
            if self.set(cell) {
                hit(cell);
            }
        }
    }

    /// Marks every cell whose center lies within `r` of segment `ab`.
    pub fn mark_corridor(&mut self, a: &Point, b: &Point, r: f64, mut hit: impl FnMut(Cell)) {
        let r = r * (1.0 + REL_TOL);
        let len = a.dist(b);
        if len == 0.0 {
            return self.mark_disk(a, r, hit);
        }
        let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
        for j in self.rows(a.y.min(b.y) - r, a.y.max(b.y) + r) {
            let y = (j as f64 + 0.5) * self.pitch;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for end in [a, b] {
                let dy = y - end.y;
                if dy.abs() <= r {
                    let h = (r * r - dy * dy).sqrt();
                    lo = lo.min(end.x - h);
                    hi = hi.max(end.x + h);
                }
            }
            if let Some((blo, bhi)) = band_interval(y - a.y, ux, uy, len, r) {
                lo = lo.min(a.x + blo);
                hi = hi.max(a.x + bhi);
            }
            if lo > hi {
                continue;
            }
            for i in self.cols(lo, hi) {
                if self.set((i, j)) {
                    hit((i, j));
                }
            }
        }
    }
}

/// Offsets `dx` with projection in `[0, len]` and perpendicular offset within `r`.
fn band_interval(dy: f64, ux: f64, uy: f64, len: f64, r: f64) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    // proj = dx ux + dy uy
    if ux.abs() > 1e-15 {
        let (p0, p1) = ((-dy * uy) / ux, (len - dy * uy) / ux);
        lo = lo.max(p0.min(p1));
        hi = hi.min(p0.max(p1));
    } else if !(0.0..=len).contains(&(dy * uy)) {
        return None;
    }
    // perp = dx uy - dy ux
    if uy.abs() > 1e-15 {
        let (q0, q1) = ((-r + dy * ux) / uy, (r + dy * ux) / uy);
        lo = lo.max(q0.min(q1));
        hi = hi.min(q0.max(q1));
    } else if (dy * ux).abs() > r {
        return None;
    }
    (lo <= hi).then_some((lo, hi))
}
