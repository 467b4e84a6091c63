use freeze_swarm::harness::bounds::{
    awave_energy_formula, clog, pinned_budget, verdicts, Bound, Constants,
};
use freeze_swarm::harness::render::render_svg;
use freeze_swarm::harness::sweep::{
    expand, fit, pin_value, read_csv, run_point, run_sweep, write_csv, BudgetSpec, GridPoint,
    RowStatus, SweepConfig,
};
use freeze_swarm::instances::{gen_connected, Family};
use freeze_swarm::run::{run, Algo, RunParams};

fn small_config() -> SweepConfig {
    SweepConfig {
        algorithms: Algo::ALL.to_vec(),
        families: vec![Family::Connected],
        ells: vec![1, 2],
        rhos: vec![8, 16],
        ns: vec![60],
        seeds: vec![1, 2],
        budgets: vec![BudgetSpec::Unbounded],
        rect_b_factors: Vec::new(),
        ecc_fractions: Vec::new(),
        constants: Constants::pinned(),
        csv_out: None,
    }
}

#[test]
fn connected_preset_spans_two_hundred_instances() {
    let points = expand(&SweepConfig::connected_acceptance());
    assert_eq!(points.len(), 200);
    assert!(points.iter().all(|p| p.is_ok()));
    assert!(points.iter().flatten().all(|p| p.n <= 1000));
}

#[test]
fn rectilinear_preset_is_admissible_everywhere() {
    for p in expand(&SweepConfig::rectilinear_acceptance()) {
        let p = p.unwrap();
        p.generate().unwrap();
    }
}

#[test]
fn sweep_rows_survive_a_csv_round_trip() {
    let results = run_sweep(&small_config());
    assert_eq!(results.len(), 24);
    assert!(results.iter().all(|r| r.row.status == RowStatus::Complete));
    let rows: Vec<_> = results.iter().map(|r| r.row.clone()).collect();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let back = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, rows);
    let fits = fit(&results, &Constants::pinned());
    assert!(fits.iter().all(|f| f.samples > 0 && f.max_ratio > 0.0));
}

#[test]
fn inadmissible_grid_points_are_skipped() {
    let mut c = small_config();
    c.rhos = vec![1];
    c.ells = vec![2];
    let results = run_sweep(&c);
    assert!(results.iter().all(|r| r.row.status == RowStatus::Skipped));
}

#[test]
fn verdict_ratios_match_their_formulas() {
    let inst = gen_connected(120, 2, 16, 3).unwrap();
    let c = Constants::pinned();
    let out = run(&inst, Algo::Awave, &RunParams::default()).unwrap();
    let v = verdicts(Algo::Awave, &out.summary, &c);
    let energy = v.iter().find(|x| x.bound == Bound::AwaveEnergy).unwrap();
    let f = 16.0 * clog(4.0);
    assert!((energy.ratio - out.summary.max_energy / f).abs() < 1e-12);
    assert_eq!(awave_energy_formula(2.0), f);
    let ecc = out.summary.metrics.unwrap().ecc.unwrap();
    let make = v.iter().find(|x| x.bound == Bound::AwaveMakespan).unwrap();
    let g = ecc + 16.0 * clog(ecc / 4.0);
    assert!((make.ratio - out.summary.makespan_last_wake / g).abs() < 1e-12);
}

#[test]
fn pinned_budget_run_reports_its_budget() {
    let c = Constants::pinned();
    let p = GridPoint {
        family: Family::Connected,
        ell: 2,
        rho: 16,
        n: 80,
        seed: 4,
        b: 0.0,
        ecc: 0.0,
    };
    let inst = p.generate().unwrap();
    let r = run_point(&p, &inst, Algo::Agrid, BudgetSpec::PinnedEnergy, &c);
    assert!(r.row.budgeted);
    assert_eq!(Some(r.row.budget), pinned_budget(Algo::Agrid, 2.0, &c));
    assert_eq!(r.row.energy_exhausted, 0);
}

#[test]
fn pinning_rounds_up_to_four_digits() {
    assert_eq!(pin_value(59.6547), 59.66);
    assert_eq!(pin_value(150.3976), 150.4);
    assert_eq!(pin_value(0.012341), 0.01235);
    assert_eq!(pin_value(2.0), 2.0);
}

#[test]
fn rendering_is_deterministic_and_draws_subsquares() {
    let inst = gen_connected(200, 1, 16, 2).unwrap();
    let params = RunParams {
        record: true,
        ..Default::default()
    };
    let out = run(&inst, Algo::Aseparator, &params).unwrap();
    let a = render_svg(&out.trace, &out.summary.rounds, Some(&inst.positions));
    let b = render_svg(&out.trace, &out.summary.rounds, Some(&inst.positions));
    assert_eq!(a, b);
    assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
    let partitions = out
        .summary
        .rounds
        .iter()
        .filter(|r| r.kind == "partition")
        .count();
    assert_eq!(a.matches(r#"class="subsquare""#).count(), 4 * partitions);
    assert_eq!(
        a.matches(r#"class="initial""#).count(),
        inst.positions.len()
    );
}
