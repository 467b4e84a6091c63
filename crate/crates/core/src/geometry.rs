//! Planar primitives, disk graphs, separators and instance metrics.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use thiserror::Error;

/// Relative tolerance for every geometric comparison.
pub const REL_TOL: f64 = 1e-9;

/// Absolute tolerance for two robots to count as co-located.
pub const COLOCATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("no robots")]
    NoRobots,
    #[error("degenerate separator: width {width} must exceed 2 * ell = {}", 2.0 * ell)]
    DegenerateSeparator { width: f64, ell: f64 },
    #[error("disk graph at ell = {ell} is disconnected")]
    Disconnected { ell: f64 },
}

/// `a <= b` up to the shared relative tolerance.
pub fn le_tol(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// `a < b` by more than the shared relative tolerance.
pub fn lt_tol(a: f64, b: f64) -> bool {
    !le_tol(b, a)
}

/// Distance `d` counts as "at most `r`".
pub fn within(d: f64, r: f64) -> bool {
    d <= r * (1.0 + REL_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, o: &Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn add(&self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }

    /// Point at fraction `t` of the way from `self` to `o`.
    pub fn lerp(&self, o: &Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    /// Lexicographic order on (x, y); this is the robot identifier order.
    pub fn lex_cmp(&self, o: &Point) -> Ordering {
        self.x.total_cmp(&o.x).then(self.y.total_cmp(&o.y))
    }

    pub fn colocated(&self, o: &Point) -> bool {
        self.dist(o) <= COLOCATION_TOL
    }

    /// Bit-exact key, used for hashing positions.
    pub fn key(&self) -> (u64, u64) {
        (self.x.to_bits(), self.y.to_bits())
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned closed square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub center: Point,
    pub width: f64,
}

impl Square {
    pub fn new(center: Point, width: f64) -> Self {
        assert!(width > 0.0, "square width must be positive");
        Square { center, width }
    }

    pub fn half(&self) -> f64 {
        self.width / 2.0
    }

    pub fn lower_left(&self) -> Point {
        self.center.add(-self.half(), -self.half())
    }

    pub fn upper_right(&self) -> Point {
        self.center.add(self.half(), self.half())
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.lower_left(), self.upper_right())
    }

    /// Closed containment with tolerance.
    pub fn contains(&self, p: &Point) -> bool {
        le_tol((p.x - self.center.x).abs(), self.half())
            && le_tol((p.y - self.center.y).abs(), self.half())
    }

    /// Strict interior, boundary excluded with tolerance.
    pub fn contains_strict(&self, p: &Point) -> bool {
        lt_tol((p.x - self.center.x).abs(), self.half())
            && lt_tol((p.y - self.center.y).abs(), self.half())
    }

    /// Whether the closed disk of radius `r` around `c` lies inside this square.
    pub fn contains_disk(&self, c: &Point, r: f64) -> bool {
        le_tol((c.x - self.center.x).abs() + r, self.half())
            && le_tol((c.y - self.center.y).abs() + r, self.half())
    }

    /// The four quadrants, indexed SW, SE, NW, NE.
    pub fn quadrants(&self) -> [Square; 4] {
        let q = self.width / 4.0;
        let w = self.width / 2.0;
        [
            Square::new(self.center.add(-q, -q), w),
            Square::new(self.center.add(q, -q), w),
            Square::new(self.center.add(-q, q), w),
            Square::new(self.center.add(q, q), w),
        ]
    }

    /// Index of the quadrant owning `p` under the half-open convention
    /// (points on the dividing lines belong to the east/north side).
    pub fn quadrant_of(&self, p: &Point) -> usize {
        let east = p.x >= self.center.x;
        let north = p.y >= self.center.y;
        (east as usize) + 2 * (north as usize)
    }
}

/// Axis-aligned closed rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Point,
    pub hi: Point,
}

impl Rect {
    pub fn new(lo: Point, hi: Point) -> Self {
        assert!(lo.x <= hi.x && lo.y <= hi.y, "rect corners out of order");
        Rect { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> f64 {
        self.hi.y - self.lo.y
    }

    pub fn center(&self) -> Point {
        self.lo.lerp(&self.hi, 0.5)
    }

    pub fn contains(&self, p: &Point) -> bool {
        le_tol(self.lo.x, p.x)
            && le_tol(p.x, self.hi.x)
            && le_tol(self.lo.y, p.y)
            && le_tol(p.y, self.hi.y)
    }

    /// Nearest point of the rectangle to `p`.
    pub fn clamp(&self, p: &Point) -> Point {
        Point::new(
            p.x.clamp(self.lo.x, self.hi.x),
            p.y.clamp(self.lo.y, self.hi.y),
        )
    }

    /// Intersection with another rectangle, if non-empty.
    pub fn intersect(&self, o: &Rect) -> Option<Rect> {
        let lo = Point::new(self.lo.x.max(o.lo.x), self.lo.y.max(o.lo.y));
        let hi = Point::new(self.hi.x.min(o.hi.x), self.hi.y.min(o.hi.y));
        (lo.x <= hi.x && lo.y <= hi.y).then(|| Rect::new(lo, hi))
    }

    /// Bounding box of the disk of radius `r` around `c`.
    pub fn around(c: &Point, r: f64) -> Rect {
        Rect::new(c.add(-r, -r), c.add(r, r))
    }
}

/// Frame of width `ell` between a square and its concentric shrinking by `2 ell`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separator {
    pub outer: Square,
    pub inner: Square,
    pub ell: f64,
}

impl Separator {
    /// Closed frame: inside the outer square and not strictly inside the inner one.
    pub fn contains(&self, p: &Point) -> bool {
        self.outer.contains(p) && !self.inner.contains_strict(p)
    }

    /// Pinwheel decomposition into four rectangles of `ell` by `width - ell`.
    pub fn rects(&self) -> [Rect; 4] {
        let lo = self.outer.lower_left();
        let hi = self.outer.upper_right();
        let l = self.ell;
        [
            Rect::new(lo, Point::new(hi.x - l, lo.y + l)),
            Rect::new(Point::new(hi.x - l, lo.y), Point::new(hi.x, hi.y - l)),
            Rect::new(Point::new(lo.x + l, hi.y - l), hi),
            Rect::new(Point::new(lo.x, lo.y + l), Point::new(lo.x + l, hi.y)),
        ]
    }
}

pub fn separator_of(square: &Square, ell: f64) -> Result<Separator, GeometryError> {
    if square.width <= 2.0 * ell {
        return Err(GeometryError::DegenerateSeparator {
            width: square.width,
            ell,
        });
    }
    Ok(Separator {
        outer: *square,
        inner: Square::new(square.center, square.width - 2.0 * ell),
        ell,
    })
}

/// Metrics of a point set with respect to the source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetrics {
    pub ell_star: f64,
    pub rho_star: f64,
    /// `None` when the disk graph is disconnected.
    pub ecc: Option<f64>,
    /// Disk radius the eccentricity was measured at.
    pub ecc_ell: f64,
    pub n: usize,
}

impl InstanceMetrics {
    pub fn compute(points: &[Point], s: Point, ell: f64) -> Result<Self, GeometryError> {
        let ell_star = connectivity_threshold(points, s)?;
        let rho_star = radius(points, s)?;
        let ecc = eccentricity(points, s, ell);
        Ok(InstanceMetrics {
            ell_star,
            rho_star,
            ecc: ecc.is_finite().then_some(ecc),
            ecc_ell: ell,
            n: points.len(),
        })
    }

    /// The chain ell* <= rho* <= ecc <= n ell* when the graph is connected.
    pub fn chain_holds(&self) -> bool {
        let base = self.ell_star > 0.0 && le_tol(self.ell_star, self.rho_star);
        match self.ecc {
            Some(e) => base && le_tol(self.rho_star, e) && le_tol(e, self.n as f64 * self.ell_star),
            None => base,
        }
    }
}

/// Bottleneck edge of the Euclidean minimum spanning tree of `points` plus `s`.
pub fn connectivity_threshold(points: &[Point], s: Point) -> Result<f64, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::NoRobots);
    }
    let all: Vec<Point> = std::iter::once(s).chain(points.iter().copied()).collect();
    let n = all.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut bottleneck: f64 = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        bottleneck = bottleneck.max(best[u]);
        for v in 0..n {
            if !in_tree[v] {
                let d = all[u].dist(&all[v]);
                if d < best[v] {
                    best[v] = d;
                }
            }
        }
    }
    Ok(bottleneck)
}

pub fn radius(points: &[Point], s: Point) -> Result<f64, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::NoRobots);
    }
    Ok(points.iter().map(|p| p.dist(&s)).fold(0.0, f64::max))
}

/// Largest shortest-path distance from `s` in the `ell`-disk graph; infinite if disconnected.
pub fn eccentricity(points: &[Point], s: Point, ell: f64) -> f64 {
    let dist = disk_graph_distances(points, s, ell);
    dist.iter().copied().fold(0.0, f64::max)
}

/// Single-source Euclidean shortest paths in the `ell`-disk graph; index 0 is `s`.
pub fn disk_graph_distances(points: &[Point], s: Point, ell: f64) -> Vec<f64> {
    let all: Vec<Point> = std::iter::once(s).chain(points.iter().copied()).collect();
    let n = all.len();
    let grid = PointGrid::new(&all, ell);
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(HeapItem(0.0, 0));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for v in grid.neighbors(&all, u, ell) {
            let nd = d + all[u].dist(&all[v]);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    dist
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Minimum hop counts from `s` in the `ell`-disk graph; index 0 is `s`.
pub fn disk_graph_hops(points: &[Point], s: Point, ell: f64) -> Vec<Option<usize>> {
    let all: Vec<Point> = std::iter::once(s).chain(points.iter().copied()).collect();
    let grid = PointGrid::new(&all, ell);
    let mut hops = vec![None; all.len()];
    hops[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let h = hops[u].unwrap();
        for v in grid.neighbors(&all, u, ell) {
            if hops[v].is_none() {
                hops[v] = Some(h + 1);
                queue.push_back(v);
            }
        }
    }
    hops
}

/// Every point is reachable from `s` in at most `1 + 2 ecc / ell` hops.
pub fn hop_bound_check(points: &[Point], s: Point, ell: f64) -> Result<bool, GeometryError> {
    let ecc = eccentricity(points, s, ell);
    if !ecc.is_finite() {
        return Err(GeometryError::Disconnected { ell });
    }
    let limit = 1.0 + 2.0 * ecc / ell;
    let hops = disk_graph_hops(points, s, ell);
    Ok(hops.iter().all(|h| le_tol(h.unwrap() as f64, limit)))
}

pub fn is_admissible(ell: i64, rho: i64, n: i64) -> bool {
    ell >= 1 && ell <= rho && rho <= n.saturating_mul(ell)
}

/// Upper bound on the size of an `ell`-sampling of a width-`r` square.
pub fn sampling_cardinality_bound(r: f64, ell: f64) -> f64 {
    16.0 * r * r / (PI * ell * ell)
}

/// Every position lies within `radius` of some sample.
pub fn is_covered(positions: &[Point], samples: &[Point], radius: f64) -> bool {
    positions
        .iter()
        .all(|p| samples.iter().any(|q| within(p.dist(q), radius)))
}

/// Bucket grid for fixed-radius neighbor queries.
pub struct PointGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl PointGrid {
    pub fn new(points: &[Point], cell: f64) -> Self {
        let cell = if cell > 0.0 { cell } else { 1.0 };
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::cell_of(p, cell)).or_default().push(i);
        }
        PointGrid { cell, buckets }
    }

    fn cell_of(p: &Point, cell: f64) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    /// Indices within distance `r` of `c` (tolerant), ascending.
    pub fn query(&self, points: &[Point], c: &Point, r: f64) -> Vec<usize> {
        let span = (r / self.cell).ceil() as i64 + 1;
        let (cx, cy) = Self::cell_of(c, self.cell);
        let mut out = Vec::new();
        for gx in cx - span..=cx + span {
            for gy in cy - span..=cy + span {
                if let Some(b) = self.buckets.get(&(gx, gy)) {
                    out.extend(b.iter().copied().filter(|&i| within(points[i].dist(c), r)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn neighbors(&self, points: &[Point], u: usize, r: f64) -> Vec<usize> {
        let mut v = self.query(points, &points[u], r);
        v.retain(|&i| i != u);
        v
    }
}

/// Angle of `p` around `c`, measured clockwise from the upward vertical, in [0, 2 pi).
pub fn clockwise_angle(c: &Point, p: &Point) -> f64 {
    let a = (p.x - c.x).atan2(p.y - c.y);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separator_widths() {
        let sq = Square::new(Point::ORIGIN, 10.0);
        assert_eq!(separator_of(&sq, 2.0).unwrap().inner.width, 6.0);
        let sep = separator_of(&Square::new(Point::ORIGIN, 4.1), 2.0).unwrap();
        assert!((sep.inner.width - 0.1).abs() < 1e-12);
        assert!(matches!(
            separator_of(&Square::new(Point::ORIGIN, 4.0), 2.0),
            Err(GeometryError::DegenerateSeparator { .. })
        ));
    }

    #[test]
    fn pinwheel_rects_tile_the_frame() {
        let sep = separator_of(&Square::new(Point::new(1.0, -2.0), 10.0), 2.0).unwrap();
        let area: f64 = sep.rects().iter().map(|r| r.width() * r.height()).sum();
        assert!((area - (100.0 - 36.0)).abs() < 1e-9);
        for r in sep.rects() {
            assert!((r.width().min(r.height()) - 2.0).abs() < 1e-12);
            assert!((r.width().max(r.height()) - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrant_assignment_is_half_open() {
        let sq = Square::new(Point::ORIGIN, 4.0);
        assert_eq!(sq.quadrant_of(&Point::new(-1.0, -1.0)), 0);
        assert_eq!(sq.quadrant_of(&Point::new(0.0, -1.0)), 1);
        assert_eq!(sq.quadrant_of(&Point::new(-1.0, 0.0)), 2);
        assert_eq!(sq.quadrant_of(&Point::new(0.0, 0.0)), 3);
    }

    #[test]
    fn clockwise_angle_starts_upward() {
        let c = Point::ORIGIN;
        assert_eq!(clockwise_angle(&c, &Point::new(0.0, 1.0)), 0.0);
        assert!((clockwise_angle(&c, &Point::new(1.0, 0.0)) - PI / 2.0).abs() < 1e-12);
        assert!((clockwise_angle(&c, &Point::new(0.0, -1.0)) - PI).abs() < 1e-12);
        assert!((clockwise_angle(&c, &Point::new(-1.0, 0.0)) - 1.5 * PI).abs() < 1e-12);
    }
}
