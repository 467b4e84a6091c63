//! One line per acceptance criterion; exits non-zero when any criterion fails.

mod common;

use common::{run_sampling_case, sampling_gate, tiny_corpus, uniform_square};
use freeze_swarm::geometry::{InstanceMetrics, Point};
use freeze_swarm::harness::bounds::{Bound, Constants};
use freeze_swarm::harness::rho::rho_study;
use freeze_swarm::harness::sweep::{
    expand, fit, run_sweep, BudgetSpec, RowStatus, SweepConfig, SweepResult,
};
use freeze_swarm::instances::{
    disk_centers, energy_trap_budget, gen_connected, gen_energy_trap, gen_grid_of_disks, Family,
    Instance,
};
use freeze_swarm::oracles::optimal_wakeup_bruteforce;
use freeze_swarm::run::{run, Algo, RunParams};
use freeze_swarm::separator::round_count_bound;
use freeze_swarm::sim::{sleeping_key, MemValue, World, WorldConfig};
use freeze_swarm::waketree::{build_tree, propagate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Outcome = Result<String, String>;

fn gate(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fit_gate(results: &[SweepResult], c: &Constants, bounds: &[Bound]) -> Outcome {
    let fits = fit(results, c);
    let mut ok = true;
    let mut parts = Vec::new();
    for b in bounds {
        match fits.iter().find(|f| f.bound == *b) {
            Some(f) => {
                ok &= f.pass;
                parts.push(format!(
                    "{} max ratio {:.4} vs pinned {} over {} runs",
                    b.name(),
                    f.max_ratio,
                    f.pinned,
                    f.samples
                ));
            }
            None => {
                ok = false;
                parts.push(format!("{} has no samples", b.name()));
            }
        }
    }
    gate(ok, parts.join("; "))
}

fn completeness(results: &[SweepResult], secs: f64) -> Outcome {
    let instances = expand(&SweepConfig::connected_acceptance()).len();
    let complete = results
        .iter()
        .filter(|r| r.row.status == RowStatus::Complete)
        .count();
    let bad: Vec<String> = results
        .iter()
        .filter(|r| r.row.status != RowStatus::Complete)
        .take(3)
        .map(|r| {
            format!(
                "{} l={} r={} n={} s={}: {}",
                r.row.algorithm, r.row.ell, r.row.rho, r.row.n, r.row.seed, r.row.note
            )
        })
        .collect();
    gate(
        complete == results.len() && results.len() == 3 * instances && secs < 300.0,
        format!(
            "{complete}/{} runs on {instances} instances complete in {secs:.1} s {}",
            results.len(),
            bad.join(" | ")
        ),
    )
}

fn single_round_cases() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut out = Vec::new();
    for (ell, n) in [(4.0f64, 30), (8.0, 60), (8.0, 300), (16.0, 500)] {
        let reach = ell.powf(1.5) / 8.0;
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                let r = reach * rng.gen::<f64>().sqrt();
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                Point::new(r * a.cos(), r * a.sin())
            })
            .collect();
        out.push(Instance::new(
            Family::Custom,
            ell as i64,
            ell as i64,
            0,
            pts,
            Vec::new(),
        ));
    }
    out
}

fn round_structure(results: &[SweepResult], c: &Constants) -> Outcome {
    let durations = fit_gate(results, c, &[Bound::RoundDuration]);
    let sep: Vec<&SweepResult> = results
        .iter()
        .filter(|r| r.row.algorithm == Algo::Aseparator)
        .collect();
    let over = sep
        .iter()
        .filter(|r| r.row.rounds as f64 > round_count_bound(r.row.ell as f64, r.row.rho as f64))
        .count();
    let max_rounds = sep.iter().map(|r| r.row.rounds).max().unwrap_or(0);
    let mut single = 0;
    let cases = single_round_cases();
    for inst in &cases {
        let out = run(inst, Algo::Aseparator, &RunParams::default()).unwrap();
        let m = inst.metrics().unwrap();
        if out.summary.complete
            && out.summary.round_count() == 1
            && m.rho_star <= (inst.ell_hint as f64).powf(1.5) / 8.0
        {
            single += 1;
        }
    }
    let ok = durations.is_ok() && over == 0 && single == cases.len();
    let d = durations.unwrap_or_else(|e| e);
    gate(
        ok,
        format!(
            "{d}; {over} runs over the round-count bound (max {max_rounds} rounds); {single}/{} small-radius runs end after one round",
            cases.len()
        ),
    )
}

fn energy(results: &[SweepResult], c: &Constants) -> Outcome {
    let fits = fit_gate(results, c, &[Bound::AgridEnergy, Bound::AwaveEnergy]);
    let mut config = SweepConfig::connected_acceptance();
    config.algorithms = vec![Algo::Agrid, Algo::Awave];
    config.budgets = vec![BudgetSpec::PinnedEnergy];
    let capped = run_sweep(&config);
    let exhausted: usize = capped.iter().map(|r| r.row.energy_exhausted).sum();
    let incomplete = capped
        .iter()
        .filter(|r| r.row.status != RowStatus::Complete)
        .count();
    let ok = fits.is_ok() && exhausted == 0 && incomplete == 0;
    let d = fits.unwrap_or_else(|e| e);
    gate(
        ok,
        format!(
            "{d}; budgeted re-run: {} runs, {exhausted} exhausted, {incomplete} incomplete",
            capped.len()
        ),
    )
}

fn rectilinear(c: &Constants) -> (Outcome, Vec<SweepResult>) {
    let results = run_sweep(&SweepConfig::rectilinear_acceptance());
    let complete = results.iter().all(|r| r.row.status == RowStatus::Complete);
    let fits = fit_gate(&results, c, &[Bound::AgridMakespan, Bound::AwaveMakespan]);
    let out = match fits {
        Ok(d) if complete => Ok(format!("{} runs; {d}", results.len())),
        Ok(d) => Err(format!("incomplete runs; {d}")),
        Err(d) => Err(d),
    };
    (out, results)
}

fn lower_bound() -> (Outcome, Vec<InstanceMetrics>) {
    let (ell, rho) = (8i64, 64i64);
    let centers = disk_centers(ell as f64, rho as f64).len();
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    let mut metrics = Vec::new();
    let mut runs = 0;
    for n in [100usize, 400, 1000] {
        for seed in [1u64, 2] {
            let inst = gen_grid_of_disks(ell, rho, n, seed).unwrap();
            let m = n.min(centers) as f64;
            let l = ell as f64;
            let lb = 0.5 * (std::f64::consts::PI * l * l / 32.0) * (m + 1.0).ln();
            for algo in Algo::ALL {
                let out = run(&inst, algo, &RunParams::default()).unwrap();
                runs += 1;
                let s = &out.summary;
                worst = worst.min(s.makespan_last_wake / lb);
                if !s.complete || s.makespan_last_wake < lb {
                    failures.push(format!("{algo} n={n} seed={seed}"));
                }
                metrics.extend(s.metrics);
            }
        }
    }
    (
        gate(
            failures.is_empty(),
            format!(
                "{runs} runs, |C*| = {centers}, smallest makespan / lower bound {worst:.2} {}",
                failures.join(" ")
            ),
        ),
        metrics,
    )
}

fn energy_trap() -> Outcome {
    let mut bad = Vec::new();
    let mut runs = 0;
    for ell in [2i64, 4, 8] {
        for n in [1usize, 10] {
            let inst = gen_energy_trap(ell, n).unwrap();
            let params = RunParams {
                budget: Some(energy_trap_budget(ell as f64)),
                ..Default::default()
            };
            for algo in Algo::ALL {
                runs += 1;
                let out = run(&inst, algo, &params).unwrap();
                if out.summary.complete || out.summary.wake_events != 0 || out.violation().is_some()
                {
                    bad.push(format!("{algo} l={ell} n={n}"));
                }
            }
        }
    }
    gate(
        bad.is_empty(),
        format!(
            "{runs} budgeted runs, {} woke a robot {}",
            bad.len(),
            bad.join(" ")
        ),
    )
}

fn tree_gates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let r = rng.gen_range(1.0..100.0);
        let n = rng.gen_range(1..=200);
        let pts = uniform_square(&mut rng, Point::ORIGIN, r, n);
        let h = r / 2.0;
        let start = Point::new(rng.gen_range(-h..h), rng.gen_range(-h..h));
        let tree = build_tree(start, &pts).unwrap();
        worst = worst.max(tree.depth() / r);
    }
    let corpus = tiny_corpus();
    let mut below = 0;
    let mut mismatch = 0;
    for pts in &corpus {
        let tree = build_tree(Point::ORIGIN, pts).unwrap();
        let opt = optimal_wakeup_bruteforce(Point::ORIGIN, pts).unwrap();
        if tree.depth() < opt - 1e-9 * opt.max(1.0) {
            below += 1;
        }
        let mut world = World::new(pts, &[], WorldConfig::default()).unwrap();
        let s = world.source();
        for p in pts {
            world.remember(s, sleeping_key(p), MemValue::Point(*p));
        }
        let out = propagate(&mut world, &tree, s).unwrap();
        let d = tree.depth();
        if (out.last_wake - d).abs() > 1e-9 * d.max(1.0) {
            mismatch += 1;
        }
    }
    gate(
        worst <= 5.0 && below == 0 && mismatch == 0,
        format!(
            "max depth / R {worst:.3} over 1000 squares; {} corpus sets, {below} below optimum, {mismatch} propagation mismatches",
            corpus.len()
        ),
    )
}

fn sampling_gates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = Vec::new();
    let cases = 400;
    for seed in 0..cases {
        let ell = [1.0, 2.0, 3.0, 4.0, 8.0][rng.gen_range(0..5)];
        let width = rng.gen_range(2.0 * ell..12.0 * ell);
        let n = rng.gen_range(0..300);
        if let Err(e) = sampling_gate(&run_sampling_case(seed, ell, width, n)) {
            failures.push(format!("seed {seed}: {e}"));
        }
    }
    gate(
        failures.is_empty(),
        format!(
            "{cases} samplings, {} failures {}",
            failures.len(),
            failures.join(" | ")
        ),
    )
}

fn chain_ok(m: &InstanceMetrics, ell: f64) -> bool {
    m.chain_holds()
        && m.ecc
            .is_some_and(|e| e <= 12.0 * m.rho_star * m.rho_star / ell * (1.0 + 1e-9))
}

fn metrics_chain(lazy: &[InstanceMetrics]) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    let configs = [
        SweepConfig::connected_acceptance(),
        SweepConfig::rectilinear_acceptance(),
    ];
    for config in &configs {
        for p in expand(config).into_iter().flatten() {
            let inst = p.generate().unwrap();
            checked += 1;
            match inst.verify_hints() {
                Ok(m) if chain_ok(&m, p.ell as f64) => {}
                _ => bad.push(format!(
                    "{:?} l={} r={} s={}",
                    p.family, p.ell, p.rho, p.seed
                )),
            }
        }
    }
    for m in lazy {
        checked += 1;
        if !chain_ok(m, m.ecc_ell) {
            bad.push("lazy instance".into());
        }
    }
    gate(
        bad.is_empty(),
        format!(
            "{checked} instances, {} violations {}",
            bad.len(),
            bad.join(" ")
        ),
    )
}

fn determinism() -> Outcome {
    let mut instances: Vec<Instance> = Vec::new();
    for (n, ell, rho) in [(300, 1, 16), (300, 2, 32), (800, 4, 64), (300, 8, 128)] {
        for seed in [1u64, 2] {
            instances.push(gen_connected(n, ell, rho, seed).unwrap());
        }
    }
    instances.push(gen_grid_of_disks(4, 32, 150, 3).unwrap());
    let params = RunParams {
        record: true,
        ..Default::default()
    };
    let mut runs = 0;
    let mut differing = Vec::new();
    for inst in &instances {
        for algo in Algo::ALL {
            let a = run(inst, algo, &params).unwrap();
            let b = run(inst, algo, &params).unwrap();
            runs += 1;
            if a.trace.to_jsonl() != b.trace.to_jsonl()
                || a.summary.to_json() != b.summary.to_json()
            {
                differing.push(format!("{algo} seed {}", inst.seed));
            }
        }
    }
    gate(
        differing.is_empty(),
        format!(
            "{runs} run pairs, {} differ {}",
            differing.len(),
            differing.join(" ")
        ),
    )
}

fn rho_estimation(c: &Constants) -> Outcome {
    let rows = rho_study(c);
    let errors = rows.iter().filter(|r| r.is_err()).count();
    let ok_rows: Vec<_> = rows.into_iter().flatten().collect();
    let out_of_range = ok_rows.iter().filter(|r| !r.in_range).count();
    let over = ok_rows.iter().filter(|r| !r.overcost.pass).count();
    let worst = ok_rows.iter().map(|r| r.overcost.ratio).fold(0.0, f64::max);
    gate(
        errors == 0 && out_of_range == 0 && over == 0 && ok_rows.len() == 100,
        format!(
            "{} instances, {errors} errors, {out_of_range} estimates outside [rho*, 3 rho*], overcost max ratio {worst:.4} vs pinned {} ({over} over)",
            ok_rows.len(),
            c.c_rho_overcost
        ),
    )
}

fn main() {
    let c = Constants::pinned();
    let mut lines: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |k: usize, name: &'static str, out: Outcome| {
        let (tag, detail) = match &out {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {k:>2} {tag} {name}: {}", detail.trim_end());
        lines.push((k, name, out));
    };

    let started = Instant::now();
    let connected = run_sweep(&SweepConfig::connected_acceptance());
    let secs = started.elapsed().as_secs_f64();
    report(1, "completeness", completeness(&connected, secs));
    report(
        2,
        "aseparator makespan",
        fit_gate(&connected, &c, &[Bound::AseparatorMakespan]),
    );
    report(3, "round structure", round_structure(&connected, &c));
    report(4, "energy", energy(&connected, &c));
    let (rect, _) = rectilinear(&c);
    report(5, "rectilinear makespan", rect);
    let (lb, lazy_metrics) = lower_bound();
    report(6, "lower bound", lb);
    report(7, "energy impossibility", energy_trap());
    report(8, "wake-up tree", tree_gates());
    report(9, "sampling", sampling_gates());
    report(10, "metrics chain", metrics_chain(&lazy_metrics));
    report(11, "determinism", determinism());
    report(12, "rho estimation", rho_estimation(&c));

    let failed: Vec<usize> = lines
        .iter()
        .filter(|(_, _, o)| o.is_err())
        .map(|(k, _, _)| *k)
        .collect();
    println!(
        "acceptance: {}/{} criteria pass in {:.1} s",
        lines.len() - failed.len(),
        lines.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
