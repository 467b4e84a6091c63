//! Wake-up trees over known sleeping positions and their distributed propagation.

use crate::error::AlgoError;
use crate::exploration::{execute, explore_single};
use crate::geometry::{clockwise_angle, Point, Square};
use crate::sim::World;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub position: Point,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn leaf(position: Point) -> Self {
        TreeNode {
            position,
            children: Vec::new(),
        }
    }

    /// Weighted depth of the subtree below this node.
    pub fn depth(&self) -> f64 {
        self.children
            .iter()
            .map(|c| self.position.dist(&c.position) + c.depth())
            .fold(0.0, f64::max)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TreeNode::size).sum::<usize>()
    }

    fn collect(&self, out: &mut Vec<Point>) {
        out.push(self.position);
        for c in &self.children {
            c.collect(out);
        }
    }
}

/// Root is the initiating awake robot; every other node is a sleeper.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WakeUpTree {
    pub root: TreeNode,
}

impl WakeUpTree {
    pub fn depth(&self) -> f64 {
        self.root.depth()
    }

    /// Sleeping positions covered by the tree.
    pub fn nodes(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for c in &self.root.children {
            c.collect(&mut out);
        }
        out
    }

    /// Root has exactly one child and every other node at most two.
    pub fn is_valid(&self) -> bool {
        fn ok(n: &TreeNode) -> bool {
            n.children.len() <= 2 && n.children.iter().all(ok)
        }
        self.root.children.len() == 1 && ok(&self.root.children[0])
    }
}

fn cmp_f(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

/// Target order inside a sector: nearest to the apex, then angle, then id.
fn nearest(apex: &Point, pts: &[Point]) -> usize {
    (0..pts.len())
        .min_by(|&i, &j| {
            let (a, b) = (&pts[i], &pts[j]);
            cmp_f(apex.dist(a), apex.dist(b))
                .then(cmp_f(clockwise_angle(apex, a), clockwise_angle(apex, b)))
                .then(a.lex_cmp(b))
        })
        .expect("non-empty")
}

/// Splits points by the bisector of their smallest enclosing angular interval around `apex`.
fn split(apex: &Point, pts: Vec<Point>) -> (Vec<Point>, Vec<Point>) {
    let mut by_angle: Vec<(f64, Point)> = pts
        .into_iter()
        .map(|p| (clockwise_angle(apex, &p), p))
        .collect();
    by_angle.sort_by(|a, b| {
        cmp_f(a.0, b.0)
            .then(cmp_f(apex.dist(&a.1), apex.dist(&b.1)))
            .then(a.1.lex_cmp(&b.1))
    });
    let n = by_angle.len();
    // The interval starts right after the widest angular gap.
    let mut start = 0;
    let mut widest = -1.0;
    for i in 0..n {
        let next = if i + 1 < n {
            by_angle[i + 1].0
        } else {
            by_angle[0].0 + 2.0 * PI
        };
        let gap = next - by_angle[i].0;
        if gap > widest {
            widest = gap;
            start = (i + 1) % n;
        }
    }
    let base = by_angle[start].0;
    let offset = |a: f64| (a - base).rem_euclid(2.0 * PI);
    let mut rotated: Vec<(f64, Point)> = (0..n)
        .map(|k| by_angle[(start + k) % n])
        .map(|(a, p)| (offset(a), p))
        .collect();
    rotated.sort_by(|a, b| {
        cmp_f(a.0, b.0)
            .then(cmp_f(apex.dist(&a.1), apex.dist(&b.1)))
            .then(a.1.lex_cmp(&b.1))
    });
    let span = rotated[n - 1].0;
    let mut cut = rotated
        .iter()
        .position(|(a, _)| *a > span / 2.0)
        .unwrap_or(n);
    if cut == 0 || cut == n {
        cut = n.div_ceil(2);
    }
    let second = rotated.split_off(cut);
    (
        rotated.into_iter().map(|x| x.1).collect(),
        second.into_iter().map(|x| x.1).collect(),
    )
}

/// Subtree woken from a robot standing at the previous node.
fn grow(apex: &Point, mut pts: Vec<Point>) -> TreeNode {
    let i = nearest(apex, &pts);
    let target = pts.swap_remove(i);
    let mut node = TreeNode::leaf(target);
    match pts.len() {
        0 => {}
        1 => node.children.push(TreeNode::leaf(pts[0])),
        2 => {
            pts.sort_by(|a, b| cmp_f(target.dist(a), target.dist(b)).then(a.lex_cmp(b)));
            node.children.push(TreeNode::leaf(pts[0]));
            node.children.push(TreeNode::leaf(pts[1]));
        }
        _ => {
            let (a, b) = split(apex, pts);
            for half in [a, b] {
                if !half.is_empty() {
                    node.children.push(grow(apex, half));
                }
            }
        }
    }
    node
}

/// Recursive sector splitting around `start`.
pub fn build_tree(start: Point, sleeping: &[Point]) -> Result<WakeUpTree, AlgoError> {
    if sleeping.is_empty() {
        return Err(AlgoError::NothingToWake);
    }
    let mut pts = sleeping.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup_by(|a, b| a.key() == b.key());
    Ok(WakeUpTree {
        root: TreeNode {
            position: start,
            children: vec![grow(&start, pts)],
        },
    })
}

/// Result of propagating a tree through the engine.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Propagation {
    /// Robots woken, in wake order.
    pub woken: Vec<usize>,
    pub last_wake: f64,
}

/// Executes the propagation protocol from robot `initiator` standing at the root.
/// The woken robot continues with the first child and the waker with the second.
pub fn propagate(
    world: &mut World,
    tree: &WakeUpTree,
    initiator: usize,
) -> Result<Propagation, AlgoError> {
    let mut out = Propagation {
        woken: Vec::new(),
        last_wake: world.clock(initiator),
    };
    let mut stack: Vec<(usize, &TreeNode)> =
        tree.root.children.iter().map(|c| (initiator, c)).collect();
    while let Some((r, node)) = stack.pop() {
        world.go(r, node.position)?;
        if !world.is_active(r) {
            continue;
        }
        let Some(j) = world.wake(r, node.position)? else {
            continue;
        };
        out.woken.push(j);
        out.last_wake = out.last_wake.max(world.clock(j));
        match node.children.as_slice() {
            [] => {}
            [only] => stack.push((j, only)),
            [first, second] => {
                stack.push((r, second));
                stack.push((j, first));
            }
            _ => unreachable!("tree nodes have at most two children"),
        }
    }
    Ok(out)
}

/// Outcome of waking a square from the inside.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SquareWake {
    pub woken: Vec<usize>,
    pub leader: Option<usize>,
    pub finish_time: f64,
}

/// Bound on [`explore_and_wake_square`] for a width-`r` square.
pub fn explore_and_wake_bound(r: f64) -> f64 {
    r * r + (10.0 + std::f64::consts::SQRT_2) * r
}

/// Everybody walks to the lower-left corner; the least id explores the square
/// alone, goes to the center and wakes the sleepers accepted by `native`.
pub fn explore_and_wake_square(
    world: &mut World,
    square: &Square,
    awake: &[usize],
    native: &dyn Fn(&Point) -> bool,
) -> Result<SquareWake, AlgoError> {
    let mut team: Vec<usize> = awake
        .iter()
        .copied()
        .filter(|&i| world.is_active(i))
        .collect();
    if awake.is_empty() {
        return Err(AlgoError::EmptyTeam);
    }
    team.sort_by(|a, b| world.id(*a).lex_cmp(&world.id(*b)));
    let corner = square.lower_left();
    for &r in &team {
        world.go(r, corner)?;
    }
    let Some(&leader) = team.iter().find(|&&r| world.is_active(r)) else {
        return Ok(SquareWake::default());
    };
    let plan = explore_single(square.rect(), corner, square.center)?;
    execute(world, &plan, &[leader])?;
    let targets: Vec<Point> = world
        .known_sleeping(leader)
        .into_iter()
        .filter(|p| square.contains(p) && native(p))
        .collect();
    let mut woken = Vec::new();
    if !targets.is_empty() && world.is_active(leader) {
        let tree = build_tree(world.position(leader), &targets)?;
        woken = propagate(world, &tree, leader)?.woken;
    }
    let finish = woken
        .iter()
        .chain(std::iter::once(&leader))
        .map(|&i| world.clock(i))
        .fold(0.0, f64::max);
    Ok(SquareWake {
        woken,
        leader: Some(leader),
        finish_time: finish,
    })
}
