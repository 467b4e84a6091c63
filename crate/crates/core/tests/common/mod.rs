//! Corpus and sampling checks shared by the integration tests.

#![allow(dead_code)]

use freeze_swarm::geometry::{is_covered, sampling_cardinality_bound, Point, Square};
use freeze_swarm::oracles::coverage_scan;
use freeze_swarm::sampling::{dfsampling, Sampling, SamplingTask};
use freeze_swarm::sim::{World, WorldConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sets of at most seven sleeping positions, with the start at the origin.
pub fn tiny_corpus() -> Vec<Vec<Point>> {
    let mut out: Vec<Vec<Point>> = vec![
        vec![Point::new(1.0, 0.0)],
        vec![Point::new(2.0, 0.0), Point::new(-2.0, 0.0)],
        vec![
            Point::new(1.0, 1.0),
            Point::new(2.0, 2.0),
            Point::new(3.0, 3.0),
        ],
        (0..4).map(|i| Point::new(i as f64 + 1.0, 0.0)).collect(),
        vec![
            Point::new(3.0, 0.0),
            Point::new(-3.0, 0.0),
            Point::new(0.0, 3.0),
            Point::new(0.0, -3.0),
        ],
        (0..6)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / 3.0;
                Point::new(2.0 * a.cos(), 2.0 * a.sin())
            })
            .collect(),
        vec![
            Point::new(0.5, 0.1),
            Point::new(0.6, 0.2),
            Point::new(5.0, 5.0),
            Point::new(5.1, 5.2),
            Point::new(-4.0, 1.0),
            Point::new(-4.2, 1.3),
            Point::new(0.0, -6.0),
        ],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=7 {
        for _ in 0..12 {
            let spread = rng.gen_range(1.0..20.0);
            out.push(
                (0..n)
                    .map(|_| {
                        Point::new(
                            rng.gen_range(-spread..spread),
                            rng.gen_range(-spread..spread),
                        )
                    })
                    .collect(),
            );
        }
    }
    out
}

/// `n` uniform points in the square of width `w` centered at `c`.
pub fn uniform_square(rng: &mut ChaCha8Rng, c: Point, w: f64, n: usize) -> Vec<Point> {
    let h = w / 2.0;
    (0..n)
        .map(|_| Point::new(c.x + rng.gen_range(-h..h), c.y + rng.gen_range(-h..h)))
        .filter(|p| p.key() != c.key())
        .collect()
}

/// Positions reachable from `s` through hops of length at most `r` inside `sq`.
pub fn component(s: Point, pts: &[Point], r: f64, sq: &Square) -> Vec<Point> {
    let inside: Vec<Point> = pts.iter().copied().filter(|p| sq.contains(p)).collect();
    let mut seen = vec![false; inside.len()];
    let mut stack = vec![s];
    let mut out = Vec::new();
    while let Some(v) = stack.pop() {
        for (i, p) in inside.iter().enumerate() {
            if !seen[i] && v.dist(p) <= r * (1.0 + 1e-9) {
                seen[i] = true;
                out.push(*p);
                stack.push(*p);
            }
        }
    }
    out
}

pub struct SamplingCase {
    pub sampling: Sampling,
    pub positions: Vec<Point>,
    pub square: Square,
    pub ell: f64,
    pub target: usize,
}

/// DFSampling from the source at the center of a uniform random square.
pub fn run_sampling_case(seed: u64, ell: f64, width: f64, n: usize) -> SamplingCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let square = Square::new(Point::ORIGIN, width);
    let positions = uniform_square(&mut rng, Point::ORIGIN, width, n);
    let config = WorldConfig {
        ell,
        ..WorldConfig::default()
    };
    let mut world = World::new(&positions, &[], config).unwrap();
    let s = world.source();
    let target = 4 * ell.round() as usize;
    let native = |p: &Point| square.contains(p);
    let task = SamplingTask {
        square,
        ell,
        seeds: vec![Point::ORIGIN],
        known_awake: vec![Point::ORIGIN],
        target,
        counted: Vec::new(),
        explored: Vec::new(),
        native: &native,
    };
    let run = dfsampling(&mut world, &task, &[s]).unwrap();
    SamplingCase {
        sampling: run.sampling,
        positions,
        square,
        ell,
        target,
    }
}

/// Separation, size-xor-covered and cardinality gates of one sampling.
pub fn sampling_gate(c: &SamplingCase) -> Result<(), String> {
    let pts = &c.sampling.points;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            if a.dist(b) <= c.ell {
                return Err(format!("samples {a} and {b} are within {}", c.ell));
            }
        }
    }
    let full = pts.len() == c.target;
    if full == c.sampling.covered_flag {
        return Err(format!(
            "size {} vs covered flag {}",
            pts.len(),
            c.sampling.covered_flag
        ));
    }
    if c.sampling.covered_flag {
        let reach = component(Point::ORIGIN, &c.positions, c.ell, &c.square);
        if !is_covered(&reach, pts, 2.0 * c.ell) || !coverage_scan(&reach, pts, 2.0 * c.ell) {
            return Err("covered flag set but a reachable robot is uncovered".into());
        }
    }
    if pts.len() as f64 > sampling_cardinality_bound(c.square.width, c.ell) {
        return Err(format!(
            "{} samples exceed the cardinality bound",
            pts.len()
        ));
    }
    Ok(())
}
