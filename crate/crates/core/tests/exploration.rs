use freeze_swarm::exploration::{
    execute, execute_separator, explore_separator, explore_team, single_bound, sweep_waypoints,
};
use freeze_swarm::geometry::{separator_of, Point, Rect, Square};
use freeze_swarm::oracles::coverage_scan;
use freeze_swarm::sim::{World, WorldConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_in(rng: &mut ChaCha8Rng, r: &Rect, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            Point::new(
                rng.gen_range(r.lo.x..=r.hi.x),
                rng.gen_range(r.lo.y..=r.hi.y),
            )
        })
        .filter(|p| p.key() != Point::ORIGIN.key())
        .collect()
}

#[test]
fn single_robot_sees_every_sleeper_in_the_rectangle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let w = rng.gen_range(0.5..25.0);
        let h = rng.gen_range(0.5..25.0);
        let rect = Rect::new(Point::ORIGIN, Point::new(w, h));
        let inside = random_in(&mut rng, &rect, 60);
        let mut world = World::new(&inside, &[], WorldConfig::default()).unwrap();
        let s = world.source();
        let plan = explore_team(rect, 1, Point::ORIGIN, rect.center()).unwrap();
        let out = execute(&mut world, &plan, &[s]).unwrap();
        let mut want: Vec<_> = inside.iter().map(Point::key).collect();
        want.sort();
        want.dedup();
        let got: Vec<_> = out.sleeping.iter().map(Point::key).collect();
        let mut got_sorted = got.clone();
        got_sorted.sort();
        assert_eq!(got_sorted, want);
        assert!(plan.path_length(0) <= single_bound(w, h) + 1e-9);
        assert!(out.finish_time <= plan.bound + 1e-9);
    }
}

#[test]
fn team_exploration_meets_its_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in [2usize, 3, 5, 8] {
        let rect = Rect::new(Point::new(-10.0, -6.0), Point::new(10.0, 6.0));
        let pts = random_in(&mut rng, &rect, 100);
        let mut world = World::new(&pts, &[], WorldConfig::default()).unwrap();
        let s = world.source();
        // Recruit k - 1 helpers co-located with the source.
        let mut team = vec![s];
        let mut helpers: Vec<Point> = pts.clone();
        helpers.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        for p in helpers.into_iter().take(k - 1) {
            world.go(s, p).unwrap();
            world.look(s).unwrap();
            let j = world.wake(s, p).unwrap().unwrap();
            team.push(j);
        }
        for &r in &team {
            world.go(r, Point::ORIGIN).unwrap();
        }
        let t0 = team.iter().map(|&r| world.clock(r)).fold(0.0, f64::max);
        let plan = explore_team(rect, k, Point::ORIGIN, Point::ORIGIN).unwrap();
        let out = execute(&mut world, &plan, &team).unwrap();
        assert!(out.finish_time - t0 <= plan.bound + 1e-9);
        for &r in &team {
            assert!((world.clock(r) - out.finish_time).abs() < 1e-9);
        }
        let asleep: Vec<Point> = pts
            .iter()
            .copied()
            .filter(|p| !out.sleeping.iter().any(|q| q.key() == p.key()))
            .filter(|p| world.index_of(p).is_some_and(|i| world.is_sleeping(i)))
            .collect();
        assert!(asleep.is_empty(), "missed {asleep:?}");
    }
}

#[test]
fn separator_exploration_reports_only_frame_sleepers() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sq = Square::new(Point::ORIGIN, 24.0);
    let sep = separator_of(&sq, 2.0).unwrap();
    let pts = random_in(&mut rng, &sq.rect(), 200);
    let mut world = World::new(&pts, &[], WorldConfig::default()).unwrap();
    let s = world.source();
    let plan = explore_separator(&sep, 1, Point::ORIGIN, Point::ORIGIN).unwrap();
    let out = execute_separator(&mut world, &plan, &[s]).unwrap();
    let mut want: Vec<_> = pts
        .iter()
        .filter(|p| sep.contains(p))
        .map(Point::key)
        .collect();
    want.sort();
    let mut got: Vec<_> = out.sleeping.iter().map(Point::key).collect();
    got.sort();
    assert_eq!(got, want);
    assert!(out.finish_time <= plan.bound + 1e-9);
}

proptest! {
    #[test]
    fn waypoints_cover_rectangles(w in 0.1f64..30.0, h in 0.1f64..30.0, seed in 0u64..1000) {
        let rect = Rect::new(Point::new(-1.0, 2.0), Point::new(-1.0 + w, 2.0 + h));
        let wps = sweep_waypoints(&rect);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut probes = random_in(&mut rng, &rect, 200);
        probes.extend([rect.lo, rect.hi, Point::new(rect.lo.x, rect.hi.y), Point::new(rect.hi.x, rect.lo.y)]);
        prop_assert!(coverage_scan(&probes, &wps, 1.0 + 1e-9));
        prop_assert!(wps.iter().all(|p| rect.contains(p)));
    }
}
