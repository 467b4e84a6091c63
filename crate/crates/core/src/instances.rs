//! Instance families and the on-disk instance format.

use crate::geometry::{is_admissible, GeometryError, InstanceMetrics, Point, REL_TOL};
use crate::sim::{LazyRobot, SimError, World, WorldConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("ecc = {ecc} outside the admissible range [{lo}, {hi}]")]
    EccRange { ecc: f64, lo: f64, hi: f64 },
    #[error("generated instance fails verification: {0}")]
    Verification(String),
    #[error("cannot parse instance at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("unsupported instance format_version {0}")]
    Version(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Connected,
    GridOfDisks,
    Rectilinear,
    EnergyTrap,
    Custom,
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "connected" => Ok(Family::Connected),
            "grid-of-disks" => Ok(Family::GridOfDisks),
            "rectilinear" => Ok(Family::Rectilinear),
            "energy-trap" => Ok(Family::EnergyTrap),
            "custom" => Ok(Family::Custom),
            _ => Err(format!("unknown family {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub format_version: u32,
    pub family: Family,
    /// Number of sleeping robots, lazy ones and their followers included.
    pub n: usize,
    pub ell_hint: i64,
    pub rho_hint: i64,
    pub seed: u64,
    pub positions: Vec<Point>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lazy: Vec<LazyRobot>,
}

impl Instance {
    pub fn new(
        family: Family,
        ell: i64,
        rho: i64,
        seed: u64,
        positions: Vec<Point>,
        lazy: Vec<LazyRobot>,
    ) -> Self {
        let n = positions.len() + lazy.iter().map(|l| 1 + l.followers).sum::<usize>();
        Instance {
            format_version: INSTANCE_FORMAT_VERSION,
            family,
            n,
            ell_hint: ell,
            rho_hint: rho,
            seed,
            positions,
            lazy,
        }
    }

    pub fn is_lazy(&self) -> bool {
        !self.lazy.is_empty()
    }

    pub fn world(&self, config: WorldConfig) -> Result<World, SimError> {
        World::new(&self.positions, &self.lazy, config)
    }

    /// Metrics of the fixed positions at the hinted ℓ.
    pub fn metrics(&self) -> Result<InstanceMetrics, GeometryError> {
        InstanceMetrics::compute(&self.positions, Point::ORIGIN, self.ell_hint as f64)
    }

    /// Hints hold: ℓ* ≤ ell_hint and ρ* ≤ rho_hint (fixed positions only).
    pub fn verify_hints(&self) -> Result<InstanceMetrics, InstanceError> {
        let m = self.metrics()?;
        let (ell, rho) = (self.ell_hint as f64, self.rho_hint as f64);
        if m.ell_star > ell * (1.0 + REL_TOL) {
            return Err(InstanceError::Verification(format!(
                "ell* = {} exceeds {ell}",
                m.ell_star
            )));
        }
        if m.rho_star > rho * (1.0 + REL_TOL) {
            return Err(InstanceError::Verification(format!(
                "rho* = {} exceeds {rho}",
                m.rho_star
            )));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
        let version = value.get("format_version").and_then(|v| v.as_u64());
        match version {
            Some(v) if v == INSTANCE_FORMAT_VERSION as u64 => {}
            Some(v) => return Err(InstanceError::Version(v as u32)),
            None => {
                return Err(InstanceError::Parse {
                    line: 1,
                    column: 1,
                    msg: "missing field `format_version`".into(),
                })
            }
        }
        let inst: Instance = serde_json::from_str(text).map_err(parse_error)?;
        let declared =
            inst.positions.len() + inst.lazy.iter().map(|l| 1 + l.followers).sum::<usize>();
        if declared != inst.n {
            return Err(InstanceError::Parse {
                line: 1,
                column: 1,
                msg: format!(
                    "field `n` is {} but the document lists {declared} robots",
                    inst.n
                ),
            });
        }
        Ok(inst)
    }
}

fn parse_error(e: serde_json::Error) -> InstanceError {
    InstanceError::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    }
}

pub fn write_instance(instance: &Instance, path: &Path) -> Result<(), InstanceError> {
    std::fs::write(path, instance.to_json() + "\n")?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<Instance, InstanceError> {
    Instance::from_json(&std::fs::read_to_string(path)?)
}

fn check_admissible(ell: i64, rho: i64, n: usize) -> Result<(), InstanceError> {
    if is_admissible(ell, rho, n as i64) {
        Ok(())
    } else {
        Err(InstanceError::Inadmissible(format!(
            "need 1 <= ell <= rho <= n ell, got ell = {ell}, rho = {rho}, n = {n}"
        )))
    }
}

/// Random growth: each new point is uniform in the union of ℓ-balls around
/// the points so far (source included), clipped to the disk of radius ρ.
pub fn gen_connected(n: usize, ell: i64, rho: i64, seed: u64) -> Result<Instance, InstanceError> {
    check_admissible(ell, rho, n)?;
    let (l, r) = (ell as f64, rho as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Point> = vec![Point::ORIGIN];
    let mut grid: std::collections::HashMap<(i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    let cell = |p: &Point| ((p.x / l).floor() as i64, (p.y / l).floor() as i64);
    grid.entry(cell(&Point::ORIGIN)).or_default().push(0);
    let mut seen: HashSet<(u64, u64)> = HashSet::from([Point::ORIGIN.key()]);
    while pts.len() < n + 1 {
        let q = pts[rng.gen_range(0..pts.len())];
        let (rad, ang) = (l * rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>());
        let p = Point::new(q.x + rad * ang.cos(), q.y + rad * ang.sin());
        if p.norm() > r || rad >= l || seen.contains(&p.key()) {
            continue;
        }
        // Accepting with probability 1/(cover count) makes the union uniform.
        let (cx, cy) = cell(&p);
        let mut cover = 0usize;
        for gx in cx - 1..=cx + 1 {
            for gy in cy - 1..=cy + 1 {
                if let Some(v) = grid.get(&(gx, gy)) {
                    cover += v.iter().filter(|&&j| pts[j].dist(&p) < l).count();
                }
            }
        }
        if cover == 0 || rng.gen_range(0..cover) != 0 {
            continue;
        }
        seen.insert(p.key());
        grid.entry(cell(&p)).or_default().push(pts.len());
        pts.push(p);
    }
    pts.remove(0);
    let inst = Instance::new(Family::Connected, ell, rho, seed, pts, Vec::new());
    if n > 0 {
        inst.verify_hints()?;
    }
    Ok(inst)
}

/// Pitch of the adversary grid for a lazy region of radius `radius`.
pub fn lazy_resolution(radius: f64) -> f64 {
    (radius / 8.0).min(0.25)
}

/// Disk centers on the (ℓ/2)ℤ² lattice within ρ − ℓ/4 of the source, source excluded.
pub fn disk_centers(ell: f64, rho: f64) -> Vec<Point> {
    let h = ell / 2.0;
    let k = ((rho - ell / 4.0) / h).floor() as i64;
    let mut out = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let c = Point::new(i as f64 * h, j as f64 * h);
            if (i, j) != (0, 0) && c.norm() <= rho - ell / 4.0 + REL_TOL {
                out.push(c);
            }
        }
    }
    out
}

/// Lazy robots in disjoint disks of radius ℓ/4 on a connected set of lattice
/// centers grown breadth-first from the vertical column above the source.
pub fn gen_grid_of_disks(
    ell: i64,
    rho: i64,
    n: usize,
    seed: u64,
) -> Result<Instance, InstanceError> {
    check_admissible(ell, rho, n)?;
    let (l, r) = (ell as f64, rho as f64);
    let h = l / 2.0;
    let centers = disk_centers(l, r);
    let index: std::collections::HashMap<(i64, i64), usize> = centers
        .iter()
        .enumerate()
        .map(|(i, c)| (((c.x / h).round() as i64, (c.y / h).round() as i64), i))
        .collect();
    let m = n.min(centers.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<(i64, i64)> = Vec::with_capacity(m);
    let mut taken: BTreeSet<(i64, i64)> = BTreeSet::new();
    let column = (r / l).floor() as i64;
    for j in 1..=column {
        if chosen.len() == m || !index.contains_key(&(0, j)) {
            break;
        }
        chosen.push((0, j));
        taken.insert((0, j));
    }
    let mut frontier: VecDeque<(i64, i64)> = chosen.iter().copied().collect();
    while chosen.len() < m {
        let Some(c) = frontier.pop_front() else { break };
        let mut nbrs = vec![
            (c.0 + 1, c.1),
            (c.0 - 1, c.1),
            (c.0, c.1 + 1),
            (c.0, c.1 - 1),
        ];
        // Shuffle neighbor order so different seeds give different shapes.
        for i in (1..nbrs.len()).rev() {
            nbrs.swap(i, rng.gen_range(0..=i));
        }
        for nb in nbrs {
            if chosen.len() < m && index.contains_key(&nb) && taken.insert(nb) {
                chosen.push(nb);
                frontier.push_back(nb);
            }
        }
    }
    let radius = l / 4.0;
    let res = lazy_resolution(radius);
    let mut lazy: Vec<LazyRobot> = chosen
        .iter()
        .map(|&(i, j)| LazyRobot {
            center: Point::new(i as f64 * h, j as f64 * h),
            radius,
            resolution: res,
            followers: 0,
        })
        .collect();
    if let Some(last) = lazy.last_mut() {
        last.followers = n - m;
    }
    Ok(Instance::new(
        Family::GridOfDisks,
        ell,
        rho,
        seed,
        Vec::new(),
        lazy,
    ))
}

/// Arithmetic of the rectilinear path, without range checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectilinearLayout {
    pub rho: f64,
    pub b: f64,
    pub ecc: f64,
    /// Vertical segment length B + 1.
    pub v: f64,
    /// Horizontal segment length ρ/√2.
    pub h: f64,
    /// Number of full sections.
    pub j: usize,
}

impl RectilinearLayout {
    pub fn new(rho: f64, b: f64, ecc: f64) -> Self {
        let v = b + 1.0;
        let h = rho / SQRT_2;
        let j = (ecc / (h + v)).floor() as usize;
        RectilinearLayout {
            rho,
            b,
            ecc,
            v,
            h,
            j,
        }
    }

    pub fn u(&self, j: usize) -> Point {
        Point::new(0.0, j as f64 * self.v)
    }

    pub fn v_point(&self, j: usize) -> Point {
        Point::new(self.h, j as f64 * self.v)
    }

    /// Corners of the path from the source, far enough to hold arc length `ecc`.
    pub fn corners(&self) -> Vec<Point> {
        let mut out = vec![self.u(0)];
        for j in 0..=self.j {
            if j % 2 == 0 {
                out.push(self.v_point(j));
                out.push(self.v_point(j + 1));
            } else {
                out.push(self.u(j));
                out.push(self.u(j + 1));
            }
        }
        out
    }

    /// Admissible eccentricities for `n` robots at spacing `ell`.
    pub fn ecc_range(rho: f64, b: f64, n: usize, ell: f64) -> (f64, f64) {
        let hi = (n as f64 * ell - rho / 3.0).min((rho * rho / (2.0 * (b + 1.0))).floor() + 1.0);
        (rho, hi)
    }
}

/// Points at pitch just under ℓ along a rectilinear path of arc length `ecc`,
/// plus a straight tail to (ρ, 0) so that ρ* = ρ.
pub fn gen_rectilinear_path(
    ell: i64,
    rho: i64,
    n: usize,
    b: f64,
    ecc: f64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    check_admissible(ell, rho, n)?;
    let (l, r) = (ell as f64, rho as f64);
    if b <= l {
        return Err(InstanceError::Inadmissible(format!(
            "need B > ell, got B = {b}, ell = {ell}"
        )));
    }
    let (lo, hi) = RectilinearLayout::ecc_range(r, b, n, l);
    if !(ecc >= lo - REL_TOL && ecc <= hi + REL_TOL) {
        return Err(InstanceError::EccRange { ecc, lo, hi });
    }
    let lay = RectilinearLayout::new(r, b, ecc);
    let mut pts = path_points(&lay, l);
    let mut keys: HashSet<(u64, u64)> = pts.iter().map(Point::key).collect();
    if pts.len() > n {
        return Err(InstanceError::Verification(format!(
            "the path needs {} robots, only {n} available",
            pts.len()
        )));
    }
    // Surplus robots go on the first horizontal segment, away from its far corner.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let room = lay.h - 0.75 * l;
    while pts.len() < n {
        if room <= 0.0 {
            return Err(InstanceError::Inadmissible(
                "no room for surplus robots".into(),
            ));
        }
        let p = Point::new(rng.gen_range(0.0..room), 0.0);
        if p.x > 0.0 && keys.insert(p.key()) {
            pts.push(p);
        }
    }
    let inst = Instance::new(Family::Rectilinear, ell, rho, seed, pts, Vec::new());
    let m = inst.verify_hints()?;
    let e = m
        .ecc
        .ok_or_else(|| InstanceError::Verification("disconnected".into()))?;
    if (e - ecc).abs() > 1e-6 * ecc.max(1.0) || (m.rho_star - r).abs() > 1e-6 * r {
        return Err(InstanceError::Verification(format!(
            "ecc = {e}, rho* = {}",
            m.rho_star
        )));
    }
    Ok(inst)
}

/// Path points of the layout at pitch just under `l`, deduplicated.
fn path_points(lay: &RectilinearLayout, l: f64) -> Vec<Point> {
    let (r, ecc) = (lay.rho, lay.ecc);
    let pitch = l * (1.0 - 1e-6);
    let corners = lay.corners();
    let mut pts: Vec<Point> = Vec::new();
    let mut covered = 0.0;
    for w in corners.windows(2) {
        let (a, c) = (w[0], w[1]);
        let len = a.dist(&c);
        let stop = (ecc - covered).min(len);
        if stop <= 0.0 {
            break;
        }
        let end = a.lerp(&c, stop / len);
        fill_segment(&mut pts, &a, &end, pitch, stop < len);
        covered += stop;
    }
    let v0 = lay.v_point(0);
    let w0 = Point::new(r, 0.0);
    let far = pts.iter().map(Point::norm).fold(0.0, f64::max);
    if far < r * (1.0 - REL_TOL) {
        fill_segment(&mut pts, &v0, &w0, pitch, true);
    }
    pts.retain(|p| p.norm() > 0.0);
    let mut keys: HashSet<(u64, u64)> = HashSet::new();
    pts.retain(|p| keys.insert(p.key()));
    pts
}

/// Largest eccentricity in the admissible range whose path fits in `n` robots.
pub fn realizable_ecc_max(rho: f64, b: f64, n: usize, ell: f64) -> Option<f64> {
    let (lo, hi) = RectilinearLayout::ecc_range(rho, b, n, ell);
    let fits = |e: f64| path_points(&RectilinearLayout::new(rho, b, e), ell).len() <= n;
    if hi < lo || !fits(lo) {
        return None;
    }
    if fits(hi) {
        return Some(hi);
    }
    let (mut a, mut z) = (lo, hi);
    for _ in 0..60 {
        let m = (a + z) / 2.0;
        if fits(m) {
            a = m;
        } else {
            z = m;
        }
    }
    Some(a)
}

/// Points on `[a, b]` at pitch from both ends, never closer than the pitch to
/// `a` (a corner) nor to `b` unless `b` is a path end, which gets a point.
fn fill_segment(out: &mut Vec<Point>, a: &Point, b: &Point, pitch: f64, end_point: bool) {
    let len = a.dist(b);
    out.push(*a);
    if end_point {
        let k = (len / pitch).ceil().max(1.0) as usize;
        for i in 1..=k {
            out.push(a.lerp(b, i as f64 / k as f64));
        }
        return;
    }
    if len <= pitch {
        return;
    }
    let inner = len - 2.0 * pitch;
    if inner <= 0.0 {
        out.push(a.lerp(b, 0.5));
        return;
    }
    let k = (inner / pitch).ceil() as usize;
    for i in 0..=k {
        out.push(a.lerp(b, (pitch + inner * i as f64 / k.max(1) as f64) / len));
    }
}

/// One lazy robot owning the disk of radius ℓ around the source, with `n − 1`
/// followers co-located with it.
pub fn gen_energy_trap(ell: i64, n: usize) -> Result<Instance, InstanceError> {
    if ell < 1 || n < 1 {
        return Err(InstanceError::Inadmissible(format!(
            "need ell >= 1 and n >= 1, got ell = {ell}, n = {n}"
        )));
    }
    let l = ell as f64;
    let lazy = LazyRobot {
        center: Point::ORIGIN,
        radius: l,
        resolution: lazy_resolution(l),
        followers: n - 1,
    };
    Ok(Instance::new(
        Family::EnergyTrap,
        ell,
        ell,
        0,
        Vec::new(),
        vec![lazy],
    ))
}

/// Budget under which no algorithm can uncover the trap.
pub fn energy_trap_budget(ell: f64) -> f64 {
    PI * (ell * ell - 1.0) / 2.0 - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_example() {
        let lay = RectilinearLayout::new(10.0, 4.0, 25.0);
        assert_eq!(lay.v, 5.0);
        assert!((lay.h - 7.0710678).abs() < 1e-6);
        assert_eq!(lay.j, 2);
        assert_eq!(lay.u(1), Point::new(0.0, 5.0));
        assert!((lay.v_point(1).x - 7.0710678).abs() < 1e-6);
    }

    #[test]
    fn single_point() {
        let inst = gen_connected(1, 3, 3, 9).unwrap();
        assert_eq!(inst.positions.len(), 1);
        assert!(inst.positions[0].norm() <= 3.0);
    }
}
