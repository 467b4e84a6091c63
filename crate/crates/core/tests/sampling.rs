mod common;

use common::{run_sampling_case, sampling_gate};
use freeze_swarm::geometry::Point;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn dense_square_reaches_target() {
    let c = run_sampling_case(1, 2.0, 30.0, 400);
    assert_eq!(c.sampling.points.len(), 8);
    sampling_gate(&c).unwrap();
}

#[test]
fn sparse_square_is_covered() {
    let c = run_sampling_case(2, 4.0, 12.0, 6);
    sampling_gate(&c).unwrap();
}

#[test]
fn empty_square_samples_only_the_seed() {
    let c = run_sampling_case(3, 1.0, 10.0, 0);
    assert_eq!(c.sampling.points, vec![Point::ORIGIN]);
    assert!(c.sampling.covered_flag);
}

#[test]
fn sampling_gates_on_random_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..150 {
        let ell = [1.0, 2.0, 3.0, 4.0, 8.0][rng.gen_range(0..5)];
        let width = rng.gen_range(2.0 * ell..12.0 * ell);
        let n = rng.gen_range(0..200);
        sampling_gate(&run_sampling_case(seed, ell, width, n)).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn sampling_invariants(seed in 0u64..10_000, ell in 1usize..6, wf in 2.0f64..10.0, n in 0usize..120) {
        let ell = ell as f64;
        let c = run_sampling_case(seed, ell, wf * ell, n);
        prop_assert!(sampling_gate(&c).is_ok(), "{:?}", sampling_gate(&c));
    }
}
