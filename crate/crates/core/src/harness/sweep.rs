//! Parameter sweeps: grid expansion, parallel execution, CSV rows and fits.

use super::bounds::{pinned_budget, verdicts, Bound, BoundVerdict, Constants};
use crate::geometry::is_admissible;
use crate::instances::{
    energy_trap_budget, gen_connected, gen_energy_trap, gen_grid_of_disks, gen_rectilinear_path,
    realizable_ecc_max, Family, Instance, InstanceError, RectilinearLayout,
};
use crate::run::{run, Algo, RunParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "FREEZE_SWARM_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetSpec {
    Unbounded,
    Fixed(f64),
    /// The energy-trap threshold π(ℓ²−1)/2 − 1.
    TrapThreshold,
    /// The cap implied by the pinned energy constants (unbounded for Aseparator).
    PinnedEnergy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub algorithms: Vec<Algo>,
    pub families: Vec<Family>,
    pub ells: Vec<i64>,
    pub rhos: Vec<i64>,
    pub ns: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "unbounded")]
    pub budgets: Vec<BudgetSpec>,
    /// `B` of the rectilinear family, as a multiple of ℓ.
    #[serde(default)]
    pub rect_b_factors: Vec<f64>,
    /// Positions inside the admissible eccentricity range, 0 = low end, 1 = high end.
    #[serde(default)]
    pub ecc_fractions: Vec<f64>,
    #[serde(default = "Constants::pinned")]
    pub constants: Constants,
    #[serde(default)]
    pub csv_out: Option<std::path::PathBuf>,
}

fn unbounded() -> Vec<BudgetSpec> {
    vec![BudgetSpec::Unbounded]
}

/// One instance to generate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub family: Family,
    pub ell: i64,
    pub rho: i64,
    pub n: usize,
    pub seed: u64,
    pub b: f64,
    pub ecc: f64,
}

impl GridPoint {
    pub fn generate(&self) -> Result<Instance, InstanceError> {
        match self.family {
            Family::Connected => gen_connected(self.n, self.ell, self.rho, self.seed),
            Family::GridOfDisks => gen_grid_of_disks(self.ell, self.rho, self.n, self.seed),
            Family::Rectilinear => {
                gen_rectilinear_path(self.ell, self.rho, self.n, self.b, self.ecc, self.seed)
            }
            Family::EnergyTrap => gen_energy_trap(self.ell, self.n),
            Family::Custom => Err(InstanceError::Inadmissible(
                "custom instances are not generated".into(),
            )),
        }
    }
}

/// Expands the grid; inadmissible points come back with the reason.
pub fn expand(config: &SweepConfig) -> Vec<Result<GridPoint, (GridPoint, String)>> {
    let mut out = Vec::new();
    for &family in &config.families {
        for &ell in &config.ells {
            for &rho in &config.rhos {
                for &n in &config.ns {
                    for &seed in &config.seeds {
                        let base = GridPoint {
                            family,
                            ell,
                            rho,
                            n,
                            seed,
                            b: 0.0,
                            ecc: 0.0,
                        };
                        if family == Family::EnergyTrap {
                            out.push(Ok(GridPoint { rho: ell, ..base }));
                            continue;
                        }
                        if !is_admissible(ell, rho, n as i64) {
                            out.push(Err((
                                base,
                                format!("({ell}, {rho}, {n}) is not admissible"),
                            )));
                            continue;
                        }
                        if family != Family::Rectilinear {
                            out.push(Ok(base));
                            continue;
                        }
                        for &bf in &config.rect_b_factors {
                            let b = bf * ell as f64;
                            let (lo, spec_hi) =
                                RectilinearLayout::ecc_range(rho as f64, b, n, ell as f64);
                            let hi =
                                realizable_ecc_max(rho as f64, b, n, ell as f64).unwrap_or(spec_hi);
                            for &f in &config.ecc_fractions {
                                let p = GridPoint {
                                    b,
                                    ecc: lo + f * (hi - lo),
                                    ..base.clone()
                                };
                                if hi < lo {
                                    out.push(Err((
                                        p,
                                        format!("empty eccentricity range [{lo}, {hi}]"),
                                    )));
                                } else {
                                    out.push(Ok(p));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // Energy-trap points do not depend on rho or seed.
    let mut seen = Vec::new();
    out.retain(|r| match r {
        Ok(p) if p.family == Family::EnergyTrap => {
            let key = (p.ell, p.n);
            if seen.contains(&key) {
                false
            } else {
                seen.push(key);
                true
            }
        }
        _ => true,
    });
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Complete,
    Incomplete,
    Error,
    Skipped,
}

/// One CSV row; every numeric cell is finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub schema_version: u32,
    pub algorithm: Algo,
    pub family: Family,
    pub ell: i64,
    pub rho: i64,
    pub n: usize,
    pub seed: u64,
    pub rect_b: f64,
    pub ecc_target: f64,
    pub budgeted: bool,
    pub budget: f64,
    pub status: RowStatus,
    pub wake_events: usize,
    pub still_sleeping: usize,
    pub makespan_last_wake: f64,
    pub makespan_last_action: f64,
    pub max_energy: f64,
    pub total_energy: f64,
    pub energy_exhausted: usize,
    pub rounds: usize,
    pub metrics_known: bool,
    pub ell_star: f64,
    pub rho_star: f64,
    pub ecc: f64,
    pub makespan_bound: String,
    pub makespan_ratio: f64,
    pub makespan_limit: f64,
    pub makespan_pass: bool,
    pub energy_bound: String,
    pub energy_ratio: f64,
    pub energy_limit: f64,
    pub energy_pass: bool,
    /// Worst round duration over `R + ℓ²`.
    pub round_ratio: f64,
    pub elapsed_ms: f64,
    pub note: String,
}

fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

/// A row plus the typed verdicts it was built from.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub row: SweepRow,
    pub verdicts: Vec<BoundVerdict>,
}

fn budget_value(spec: BudgetSpec, algo: Algo, ell: f64, constants: &Constants) -> Option<f64> {
    match spec {
        BudgetSpec::Unbounded => None,
        BudgetSpec::Fixed(b) => Some(b),
        BudgetSpec::TrapThreshold => Some(energy_trap_budget(ell)),
        BudgetSpec::PinnedEnergy => pinned_budget(algo, ell, constants),
    }
}

fn empty_row(p: &GridPoint, algo: Algo, status: RowStatus, note: String) -> SweepRow {
    SweepRow {
        schema_version: CSV_SCHEMA_VERSION,
        algorithm: algo,
        family: p.family,
        ell: p.ell,
        rho: p.rho,
        n: p.n,
        seed: p.seed,
        rect_b: p.b,
        ecc_target: p.ecc,
        budgeted: false,
        budget: 0.0,
        status,
        wake_events: 0,
        still_sleeping: 0,
        makespan_last_wake: 0.0,
        makespan_last_action: 0.0,
        max_energy: 0.0,
        total_energy: 0.0,
        energy_exhausted: 0,
        rounds: 0,
        metrics_known: false,
        ell_star: 0.0,
        rho_star: 0.0,
        ecc: 0.0,
        makespan_bound: String::new(),
        makespan_ratio: 0.0,
        makespan_limit: 0.0,
        makespan_pass: true,
        energy_bound: String::new(),
        energy_ratio: 0.0,
        energy_limit: 0.0,
        energy_pass: true,
        round_ratio: 0.0,
        elapsed_ms: 0.0,
        note,
    }
}

/// Runs one algorithm on one generated instance and builds its row.
pub fn run_point(
    p: &GridPoint,
    instance: &Instance,
    algo: Algo,
    budget: BudgetSpec,
    c: &Constants,
) -> SweepResult {
    let ell = p.ell as f64;
    let b = budget_value(budget, algo, ell, c);
    let params = RunParams {
        budget: b,
        ..Default::default()
    };
    let started = std::time::Instant::now();
    let out = match run(instance, algo, &params) {
        Ok(o) => o,
        Err(e) => {
            return SweepResult {
                row: empty_row(p, algo, RowStatus::Error, e.to_string()),
                verdicts: Vec::new(),
            }
        }
    };
    let s = &out.summary;
    let v = verdicts(algo, s, c);
    let status = if out.violation().is_some() {
        RowStatus::Error
    } else if s.complete {
        RowStatus::Complete
    } else {
        RowStatus::Incomplete
    };
    let mut row = empty_row(
        p,
        algo,
        status,
        out.error
            .as_ref()
            .map(|e| e.to_string())
            .unwrap_or_default(),
    );
    row.budgeted = b.is_some();
    row.budget = finite(b.unwrap_or(0.0));
    row.wake_events = s.wake_events;
    row.still_sleeping = s.still_sleeping.len() + s.unresolved_lazy;
    row.makespan_last_wake = finite(s.makespan_last_wake);
    row.makespan_last_action = finite(s.makespan_last_action);
    row.max_energy = finite(s.max_energy);
    row.total_energy = finite(s.total_energy);
    row.energy_exhausted = s.energy_exhausted.len();
    row.rounds = s.round_count();
    if let Some(m) = s.metrics {
        row.metrics_known = m.ecc.is_some();
        row.ell_star = finite(m.ell_star);
        row.rho_star = finite(m.rho_star);
        row.ecc = finite(m.ecc.unwrap_or(0.0));
    }
    for x in &v {
        if x.bound == Bound::RoundDuration {
            row.round_ratio = finite(x.ratio);
            continue;
        }
        let energy = matches!(x.bound, Bound::AgridEnergy | Bound::AwaveEnergy);
        let (name, ratio, limit, pass) = if energy {
            (
                &mut row.energy_bound,
                &mut row.energy_ratio,
                &mut row.energy_limit,
                &mut row.energy_pass,
            )
        } else {
            (
                &mut row.makespan_bound,
                &mut row.makespan_ratio,
                &mut row.makespan_limit,
                &mut row.makespan_pass,
            )
        };
        *name = x.bound.name().to_string();
        *ratio = finite(x.ratio);
        *limit = finite(x.limit());
        *pass = x.pass;
    }
    row.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    SweepResult { row, verdicts: v }
}

fn pool() -> Option<rayon::ThreadPool> {
    let threads = std::env::var(THREADS_ENV).ok()?.parse::<usize>().ok()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .ok()
}

/// Every (grid point, budget, algorithm) of the sweep, in grid order.
pub fn run_sweep(config: &SweepConfig) -> Vec<SweepResult> {
    let points = expand(config);
    let mut jobs: Vec<(usize, GridPoint, BudgetSpec, Algo)> = Vec::new();
    let mut rows: Vec<(usize, SweepResult)> = Vec::new();
    let mut slot = 0;
    for p in points {
        for &budget in &config.budgets {
            for &algo in &config.algorithms {
                match &p {
                    Ok(g) => jobs.push((slot, g.clone(), budget, algo)),
                    Err((g, why)) => rows.push((
                        slot,
                        SweepResult {
                            row: empty_row(g, algo, RowStatus::Skipped, why.clone()),
                            verdicts: Vec::new(),
                        },
                    )),
                }
                slot += 1;
            }
        }
    }
    let work = |jobs: &[(usize, GridPoint, BudgetSpec, Algo)]| -> Vec<(usize, SweepResult)> {
        jobs.par_iter()
            .map(|(i, g, budget, algo)| {
                let r = match g.generate() {
                    Ok(inst) => run_point(g, &inst, *algo, *budget, &config.constants),
                    Err(e) => SweepResult {
                        row: empty_row(g, *algo, RowStatus::Error, e.to_string()),
                        verdicts: Vec::new(),
                    },
                };
                (*i, r)
            })
            .collect()
    };
    let done = match pool() {
        Some(p) => p.install(|| work(&jobs)),
        None => work(&jobs),
    };
    rows.extend(done);
    rows.sort_by_key(|(i, _)| *i);
    rows.into_iter().map(|(_, r)| r).collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}

/// Largest observed ratio per bound against its pinned constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub bound: Bound,
    pub samples: usize,
    pub max_ratio: f64,
    pub pinned: f64,
    pub pass: bool,
}

/// Fits over completed rows only.
pub fn fit(results: &[SweepResult], constants: &Constants) -> Vec<FitSummary> {
    let mut by: BTreeMap<Bound, (usize, f64)> = BTreeMap::new();
    for r in results
        .iter()
        .filter(|r| r.row.status == RowStatus::Complete)
    {
        for v in &r.verdicts {
            let e = by.entry(v.bound).or_insert((0, 0.0));
            e.0 += 1;
            e.1 = e.1.max(v.ratio);
        }
    }
    by.into_iter()
        .map(|(bound, (samples, max_ratio))| {
            let pinned = constants.get(bound);
            FitSummary {
                bound,
                samples,
                max_ratio,
                pinned,
                pass: max_ratio <= pinned * (1.0 + constants.tolerance),
            }
        })
        .collect()
}

/// Rounds up to four significant digits, for pinning fitted constants.
pub fn pin_value(x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let exp = x.log10().floor() as i32 - 3;
    let up = (x / 10f64.powi(exp)).ceil();
    format!("{up}e{exp}")
        .parse()
        .expect("formatted float parses")
}

impl SweepConfig {
    /// Random connected instances: ℓ ∈ {1, 2, 4, 8}, ρ ∈ {16, …, 256}, 200 instances.
    pub fn connected_acceptance() -> Self {
        SweepConfig {
            algorithms: Algo::ALL.to_vec(),
            families: vec![Family::Connected],
            ells: vec![1, 2, 4, 8],
            rhos: vec![16, 32, 64, 128, 256],
            ns: vec![300, 800],
            seeds: (1..=5).collect(),
            budgets: unbounded(),
            rect_b_factors: Vec::new(),
            ecc_fractions: Vec::new(),
            constants: Constants::pinned(),
            csv_out: None,
        }
    }

    /// Rectilinear paths with the eccentricity swept through its range.
    pub fn rectilinear_acceptance() -> Self {
        SweepConfig {
            algorithms: vec![Algo::Agrid, Algo::Awave],
            families: vec![Family::Rectilinear],
            ells: vec![1, 2, 4],
            rhos: vec![32, 64],
            ns: vec![400],
            seeds: vec![1],
            budgets: unbounded(),
            rect_b_factors: vec![2.0],
            ecc_fractions: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            constants: Constants::pinned(),
            csv_out: None,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "connected" => Some(Self::connected_acceptance()),
            "rectilinear" => Some(Self::rectilinear_acceptance()),
            _ => None,
        }
    }
}
