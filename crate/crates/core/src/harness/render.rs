//! Static SVG of a run: robots, trajectories colored by round, round squares.

use crate::geometry::Point;
use crate::sim::{EventKind, RoundRecord, Trace};
use std::collections::BTreeMap;
use std::fmt::Write;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const SIZE: f64 = 800.0;

/// Robot id to (robot, polylines tagged with their round).
type Paths = BTreeMap<(u64, u64), (Point, Vec<(usize, Vec<Point>)>)>;

struct Frame {
    lo: Point,
    scale: f64,
    height: f64,
}

impl Frame {
    fn map(&self, p: &Point) -> (f64, f64) {
        (
            (p.x - self.lo.x) * self.scale + 10.0,
            self.height - (p.y - self.lo.y) * self.scale - 10.0,
        )
    }
}

fn round_at(rounds: &[RoundRecord], t: f64) -> usize {
    rounds
        .iter()
        .filter(|r| r.start <= t)
        .map(|r| r.k)
        .max()
        .unwrap_or(0)
}

/// Renders the trace. `initial` lists sleeping positions when known; without
/// it the woken robots stand in. Partitioning rounds draw their four quadrants.
pub fn render_svg(trace: &Trace, rounds: &[RoundRecord], initial: Option<&[Point]>) -> String {
    let source = trace.header.source;
    let mut starts: Vec<Point> = match initial {
        Some(p) => p.to_vec(),
        None => trace
            .events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Wake { target } => Some(*target),
                _ => None,
            })
            .collect(),
    };
    starts.sort_by(|a, b| a.lex_cmp(b));
    starts.dedup_by(|a, b| a.key() == b.key());
    // Per-robot paths, split whenever the round changes.
    let mut paths: Paths = BTreeMap::new();
    let mut finals: BTreeMap<(u64, u64), Point> = BTreeMap::new();
    for e in &trace.events {
        match &e.kind {
            EventKind::MoveStart { from, to } => {
                let k = round_at(rounds, e.time);
                let entry = paths
                    .entry(e.robot.key())
                    .or_insert_with(|| (e.robot, Vec::new()));
                match entry.1.last_mut() {
                    Some((rk, pts))
                        if *rk == k && pts.last().is_some_and(|q| q.key() == from.key()) =>
                    {
                        pts.push(*to)
                    }
                    _ => entry.1.push((k, vec![*from, *to])),
                }
                if e.robot.key() != source.key() {
                    finals.insert(e.robot.key(), *to);
                }
            }
            EventKind::Wake { target } => {
                finals.entry(target.key()).or_insert(*target);
            }
            _ => {}
        }
    }
    let mut all: Vec<Point> = vec![source];
    all.extend(starts.iter().copied());
    for (_, segs) in paths.values() {
        for (_, pts) in segs {
            all.extend(pts.iter().copied());
        }
    }
    for r in rounds {
        all.push(r.square.lower_left());
        all.push(r.square.upper_right());
    }
    let (mut lo, mut hi) = (source, source);
    for p in &all {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(2.0);
    let scale = (SIZE - 20.0) / span;
    let frame = Frame {
        lo,
        scale,
        height: SIZE,
    };
    let dot = (3.0f64).min(scale * 0.2).max(0.8);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for r in rounds {
        let color = PALETTE[r.k % PALETTE.len()];
        let sq = r.square;
        let (x, y) = frame.map(&Point::new(sq.lower_left().x, sq.upper_right().y));
        let w = sq.width * scale;
        let _ = writeln!(
            s,
            r#"<rect class="round {}" x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{w:.3}" fill="none" stroke="{color}" stroke-width="0.8"/>"#,
            r.kind
        );
        if r.kind == "partition" {
            for q in sq.quadrants() {
                let (x, y) = frame.map(&Point::new(q.lower_left().x, q.upper_right().y));
                let w = q.width * scale;
                let _ = writeln!(
                    s,
                    r#"<rect class="subsquare" x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{w:.3}" fill="none" stroke="{color}" stroke-width="0.4" stroke-dasharray="4 2"/>"#
                );
            }
        }
    }
    for (_, segs) in paths.values() {
        for (k, pts) in segs {
            let color = PALETTE[k % PALETTE.len()];
            let coords: Vec<String> = pts
                .iter()
                .map(|p| {
                    let (x, y) = frame.map(p);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline class="path" points="{}" fill="none" stroke="{color}" stroke-width="0.6"/>"#,
                coords.join(" ")
            );
        }
    }
    for p in &starts {
        let (x, y) = frame.map(p);
        let _ = writeln!(
            s,
            r##"<circle class="initial" cx="{x:.3}" cy="{y:.3}" r="{dot:.3}" fill="#333"/>"##
        );
    }
    for p in finals.values() {
        let (x, y) = frame.map(p);
        let _ = writeln!(
            s,
            r##"<circle class="awake" cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="none" stroke="#000" stroke-width="0.5"/>"##,
            dot * 1.6
        );
    }
    let (x, y) = frame.map(&source);
    let _ = writeln!(
        s,
        r##"<circle class="source" cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="#d62728"/>"##,
        dot * 1.8
    );
    s.push_str("</svg>\n");
    s
}
