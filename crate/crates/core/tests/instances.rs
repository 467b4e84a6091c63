use freeze_swarm::geometry::Point;
use freeze_swarm::instances::{
    disk_centers, energy_trap_budget, gen_connected, gen_energy_trap, gen_grid_of_disks,
    gen_rectilinear_path, read_instance, realizable_ecc_max, write_instance, Family, Instance,
    RectilinearLayout,
};
use freeze_swarm::oracles::metrics_bruteforce;
use proptest::prelude::*;

fn chain_holds(inst: &Instance) {
    let m = inst.verify_hints().unwrap();
    let ell = inst.ell_hint as f64;
    let (ls, rs, ecc) = metrics_bruteforce(&inst.positions, Point::ORIGIN, ell);
    assert!((m.ell_star - ls).abs() <= 1e-9 * ls.max(1.0));
    assert!((m.rho_star - rs).abs() <= 1e-9 * rs.max(1.0));
    let e = m
        .ecc
        .expect("generated instances are connected at the hinted ell");
    assert!((e - ecc).abs() <= 1e-9 * ecc.max(1.0));
    assert!(m.chain_holds(), "{m:?}");
    assert!(e <= 12.0 * m.rho_star * m.rho_star / ell * (1.0 + 1e-9));
}

#[test]
fn connected_instances_satisfy_the_metrics_chain() {
    for (n, ell, rho, seed) in [
        (50, 1, 16, 1),
        (300, 2, 32, 2),
        (120, 4, 64, 3),
        (400, 8, 128, 4),
    ] {
        let inst = gen_connected(n, ell, rho, seed).unwrap();
        assert_eq!(inst.positions.len(), n);
        assert_eq!(inst.family, Family::Connected);
        chain_holds(&inst);
    }
}

#[test]
fn rectilinear_paths_hit_the_requested_eccentricity() {
    for (ell, rho, n) in [(1, 32, 400), (2, 64, 400), (4, 32, 400)] {
        let b = 2.0 * ell as f64;
        let (lo, _) = RectilinearLayout::ecc_range(rho as f64, b, n, ell as f64);
        let hi = realizable_ecc_max(rho as f64, b, n, ell as f64).unwrap();
        assert!(hi >= lo);
        for f in [0.0, 0.5, 1.0] {
            let ecc = lo + f * (hi - lo);
            let inst = gen_rectilinear_path(ell, rho, n, b, ecc, 1).unwrap();
            assert_eq!(inst.positions.len(), n);
            let m = inst.metrics().unwrap();
            assert!((m.ecc.unwrap() - ecc).abs() <= 1e-6 * ecc);
            assert!((m.rho_star - rho as f64).abs() <= 1e-6 * rho as f64);
            chain_holds(&inst);
        }
    }
}

#[test]
fn rectilinear_rejects_out_of_range_eccentricity() {
    let (lo, hi) = RectilinearLayout::ecc_range(32.0, 2.5, 400, 1.0);
    assert!(gen_rectilinear_path(1, 32, 400, 2.5, lo - 1.0, 1).is_err());
    assert!(gen_rectilinear_path(1, 32, 400, 2.5, hi + 1.0, 1).is_err());
}

#[test]
fn grid_of_disks_places_disjoint_lazy_robots() {
    let inst = gen_grid_of_disks(8, 64, 200, 1).unwrap();
    assert!(inst.is_lazy());
    assert_eq!(inst.n, 200);
    let centers = disk_centers(8.0, 64.0);
    assert_eq!(inst.lazy.len(), 200.min(centers.len()));
    for (i, a) in inst.lazy.iter().enumerate() {
        assert!(a.center.norm() + a.radius <= 64.0 + 1e-9);
        for b in &inst.lazy[i + 1..] {
            assert!(a.center.dist(&b.center) >= a.radius + b.radius - 1e-9);
        }
    }
    let all = gen_grid_of_disks(8, 64, 1000, 1).unwrap();
    assert_eq!(all.lazy.len(), centers.len());
    assert_eq!(all.n, 1000);
}

#[test]
fn energy_trap_is_one_lazy_disk() {
    let inst = gen_energy_trap(4, 10).unwrap();
    assert_eq!(inst.lazy.len(), 1);
    assert_eq!(inst.n, 10);
    assert_eq!(inst.lazy[0].radius, 4.0);
    assert!((energy_trap_budget(1.0) + 1.0).abs() < 1e-12);
}

#[test]
fn instance_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    for inst in [
        gen_connected(30, 2, 16, 5).unwrap(),
        gen_grid_of_disks(4, 16, 20, 2).unwrap(),
    ] {
        write_instance(&inst, &path).unwrap();
        assert_eq!(read_instance(&path).unwrap(), inst);
    }
}

#[test]
fn inadmissible_tuples_are_rejected() {
    assert!(gen_connected(10, 2, 1, 1).is_err());
    assert!(gen_connected(2, 1, 8, 1).is_err());
    assert!(gen_grid_of_disks(0, 8, 10, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn generated_instances_keep_their_hints(n in 16usize..200, ell in 1i64..6, rf in 1i64..4, seed in 0u64..500) {
        let rho = (ell * 4 * rf).min(n as i64 * ell);
        let inst = gen_connected(n, ell, rho, seed).unwrap();
        chain_holds(&inst);
    }
}
