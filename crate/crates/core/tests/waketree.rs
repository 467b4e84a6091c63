mod common;

use common::{tiny_corpus, uniform_square};
use freeze_swarm::geometry::{Point, Square};
use freeze_swarm::oracles::optimal_wakeup_bruteforce;
use freeze_swarm::sim::{sleeping_key, MemValue, World, WorldConfig};
use freeze_swarm::waketree::{
    build_tree, explore_and_wake_bound, explore_and_wake_square, propagate, WakeUpTree,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn covers(tree: &WakeUpTree, pts: &[Point]) -> bool {
    let mut got: Vec<_> = tree.nodes().iter().map(Point::key).collect();
    let mut want: Vec<_> = pts.iter().map(Point::key).collect();
    got.sort();
    want.sort();
    want.dedup();
    got == want
}

#[test]
fn tree_is_never_better_than_optimum_on_corpus() {
    for pts in tiny_corpus() {
        let tree = build_tree(Point::ORIGIN, &pts).unwrap();
        assert!(tree.is_valid());
        assert!(covers(&tree, &pts));
        let opt = optimal_wakeup_bruteforce(Point::ORIGIN, &pts).unwrap();
        assert!(
            tree.depth() >= opt - 1e-9 * opt.max(1.0),
            "{pts:?}: tree {} < optimum {opt}",
            tree.depth()
        );
    }
}

#[test]
fn depth_within_five_widths_on_random_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let r = rng.gen_range(1.0..100.0);
        let n = rng.gen_range(1..=200);
        let pts = uniform_square(&mut rng, Point::ORIGIN, r, n);
        let h = r / 2.0;
        let start = Point::new(rng.gen_range(-h..h), rng.gen_range(-h..h));
        let tree = build_tree(start, &pts).unwrap();
        assert!(
            tree.depth() <= 5.0 * r,
            "width {r}, n {n}: depth {}",
            tree.depth()
        );
    }
}

#[test]
fn propagation_time_equals_depth_on_corpus() {
    for pts in tiny_corpus() {
        let tree = build_tree(Point::ORIGIN, &pts).unwrap();
        let mut world = World::new(&pts, &[], WorldConfig::default()).unwrap();
        let s = world.source();
        for p in &pts {
            world.remember(s, sleeping_key(p), MemValue::Point(*p));
        }
        let out = propagate(&mut world, &tree, s).unwrap();
        assert_eq!(out.woken.len(), tree.nodes().len());
        assert!(
            close(out.last_wake, tree.depth()),
            "{} vs {}",
            out.last_wake,
            tree.depth()
        );
    }
}

#[test]
fn explore_and_wake_square_wakes_everything_native() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let r = rng.gen_range(2.0..12.0);
        let sq = Square::new(Point::new(r / 2.0, r / 2.0), r);
        let pts = uniform_square(&mut rng, sq.center, r * 0.999, 30);
        let mut world = World::new(&pts, &[], WorldConfig::default()).unwrap();
        let s = world.source();
        let out = explore_and_wake_square(&mut world, &sq, &[s], &|_| true).unwrap();
        assert_eq!(out.woken.len(), pts.len());
        assert!(out.finish_time <= explore_and_wake_bound(r) + 1e-9);
    }
}

proptest! {
    #[test]
    fn optimum_sandwich(raw in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..=6)) {
        let pts: Vec<Point> = raw.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let tree = build_tree(Point::ORIGIN, &pts).unwrap();
        let opt = optimal_wakeup_bruteforce(Point::ORIGIN, &pts).unwrap();
        let far = pts.iter().map(Point::norm).fold(0.0, f64::max);
        prop_assert!(tree.depth() >= opt - 1e-9 * opt.max(1.0));
        prop_assert!(opt >= far - 1e-9);
    }

    #[test]
    fn trees_are_binary_and_complete(raw in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..80)) {
        let pts: Vec<Point> = raw.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let tree = build_tree(Point::new(1.0, -1.0), &pts).unwrap();
        prop_assert!(tree.is_valid());
        prop_assert!(covers(&tree, &pts));
    }
}
