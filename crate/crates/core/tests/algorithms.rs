use freeze_swarm::geometry::Point;
use freeze_swarm::instances::{gen_connected, gen_rectilinear_path, Family, Instance};
use freeze_swarm::oracles::replay_validate;
use freeze_swarm::run::{run, Algo, RunError, RunParams};
use freeze_swarm::separator::round_count_bound;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_run(inst: &Instance, algo: Algo, params: &RunParams) -> freeze_swarm::sim::RunSummary {
    let params = RunParams {
        record: true,
        ..params.clone()
    };
    let out = run(inst, algo, &params).unwrap();
    assert!(out.error.is_none(), "{algo}: {:?}", out.error);
    assert!(
        out.summary.complete,
        "{algo} left {:?}",
        out.summary.still_sleeping
    );
    assert_eq!(out.summary.wake_events, inst.n);
    let report = replay_validate(&out.trace, inst, Some(&out.summary));
    assert!(report.passed(), "{algo}: {:?}", report.verdict);
    out.summary
}

#[test]
fn every_algorithm_wakes_small_connected_instances() {
    for (n, ell, rho, seed) in [
        (20, 1, 8, 1),
        (150, 2, 16, 2),
        (300, 4, 32, 3),
        (80, 8, 64, 4),
    ] {
        let inst = gen_connected(n, ell, rho, seed).unwrap();
        for algo in Algo::ALL {
            check_run(&inst, algo, &RunParams::default());
        }
    }
}

#[test]
fn every_algorithm_wakes_rectilinear_paths() {
    let inst = gen_rectilinear_path(2, 32, 300, 4.0, 60.0, 1).unwrap();
    for algo in Algo::ALL {
        check_run(&inst, algo, &RunParams::default());
    }
}

#[test]
fn aseparator_round_count_stays_within_bound() {
    for (n, ell, rho, seed) in [(400, 1, 16, 5), (600, 2, 64, 6), (300, 4, 128, 7)] {
        let inst = gen_connected(n, ell, rho, seed).unwrap();
        let s = check_run(&inst, Algo::Aseparator, &RunParams::default());
        assert!(s.round_count() >= 1);
        assert!(s.round_count() as f64 <= round_count_bound(ell as f64, rho as f64));
    }
}

#[test]
fn aseparator_terminates_in_one_round_when_the_radius_is_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (ell, n) in [(8.0f64, 40), (16.0, 300), (8.0, 200)] {
        let reach = ell.powf(1.5) / 8.0;
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                let r = reach * rng.gen::<f64>().sqrt();
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                Point::new(r * a.cos(), r * a.sin())
            })
            .collect();
        let inst = Instance::new(Family::Custom, ell as i64, ell as i64, 0, pts, Vec::new());
        let s = check_run(&inst, Algo::Aseparator, &RunParams::default());
        assert_eq!(s.round_count(), 1, "ell {ell}, n {n}");
    }
}

#[test]
fn budget_limits_are_respected() {
    let inst = gen_connected(200, 2, 32, 9).unwrap();
    for algo in Algo::ALL {
        let out = run(
            &inst,
            algo,
            &RunParams {
                budget: Some(10.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.violation().is_none(), "{algo}: {:?}", out.error);
        assert!(out.summary.max_energy <= 10.0 + 1e-9);
    }
}

#[test]
fn inadmissible_parameters_are_refused() {
    let inst = gen_connected(20, 2, 8, 1).unwrap();
    let low_ell = RunParams {
        ell: Some(0.5),
        ..Default::default()
    };
    assert!(matches!(
        run(&inst, Algo::Agrid, &low_ell),
        Err(RunError::Inadmissible(_))
    ));
    let low_rho = RunParams {
        rho: Some(1.0),
        ..Default::default()
    };
    assert!(matches!(
        run(&inst, Algo::Aseparator, &low_rho),
        Err(RunError::Inadmissible(_))
    ));
}
