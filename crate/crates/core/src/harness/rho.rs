//! Radius estimation measured against the true radius on connected instances.

use super::bounds::{rho_overcost_formula, Bound, BoundVerdict, Constants};
use crate::instances::{gen_connected, Instance};
use crate::separator::estimate_rho;
use crate::sim::WorldConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoRow {
    pub ell: i64,
    pub rho: i64,
    pub n: usize,
    pub seed: u64,
    pub rho_star: f64,
    pub estimate: f64,
    pub exact: bool,
    pub duration: f64,
    /// `ρ* ≤ estimate ≤ 3ρ*`.
    pub in_range: bool,
    pub overcost: BoundVerdict,
}

/// The 100 instances of the study: ℓ ∈ {1, 2, 4, 8}, ρ ∈ {16, …, 256}, five seeds.
pub fn rho_grid() -> Vec<(i64, i64, usize, u64)> {
    let mut out = Vec::new();
    for ell in [1, 2, 4, 8] {
        for rho in [16, 32, 64, 128, 256] {
            for seed in 1..=5 {
                out.push((ell, rho, 300, seed));
            }
        }
    }
    out
}

pub fn rho_row(instance: &Instance, constants: &Constants) -> Result<RhoRow, String> {
    let ell = instance.ell_hint as f64;
    let rho_star = instance.metrics().map_err(|e| e.to_string())?.rho_star;
    let config = WorldConfig {
        budget: None,
        record: false,
        track_discovery: false,
        ell,
    };
    let mut world = instance.world(config).map_err(|e| e.to_string())?;
    let est = estimate_rho(&mut world, ell).map_err(|e| e.to_string())?;
    let tol = 1e-9 * rho_star.max(1.0);
    let in_range = est.estimate >= rho_star - tol && est.estimate <= 3.0 * rho_star + tol;
    let overcost = BoundVerdict::new(
        Bound::RhoOvercost,
        est.duration,
        rho_overcost_formula(ell, est.estimate),
        constants,
    );
    Ok(RhoRow {
        ell: instance.ell_hint,
        rho: instance.rho_hint,
        n: instance.n,
        seed: instance.seed,
        rho_star,
        estimate: est.estimate,
        exact: est.exact,
        duration: est.duration,
        in_range,
        overcost,
    })
}

pub fn rho_study(constants: &Constants) -> Vec<Result<RhoRow, String>> {
    rho_grid()
        .into_par_iter()
        .map(|(ell, rho, n, seed)| {
            let inst = gen_connected(n, ell, rho, seed).map_err(|e| e.to_string())?;
            rho_row(&inst, constants)
        })
        .collect()
}
