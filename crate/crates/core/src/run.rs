//! One (instance, algorithm) execution from start to summary.

use crate::error::AlgoError;
use crate::grid_wave::{run_agrid, run_awave};
use crate::instances::Instance;
use crate::separator::run_aseparator;
use crate::sim::{RunSummary, SimError, Trace, WorldConfig};
use serde::{Deserialize, Serialize};

const MAX_PASSES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Aseparator,
    Agrid,
    Awave,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Aseparator, Algo::Agrid, Algo::Awave];

    pub fn name(&self) -> &'static str {
        match self {
            Algo::Aseparator => "aseparator",
            Algo::Agrid => "agrid",
            Algo::Awave => "awave",
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

/// Knobs of a run; unset values fall back to the instance hints.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub ell: Option<f64>,
    pub rho: Option<f64>,
    pub budget: Option<f64>,
    pub record: bool,
    pub track_discovery: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trace: Trace,
    pub summary: RunSummary,
    /// Error that stopped the algorithm early, if any.
    pub error: Option<AlgoError>,
}

impl RunOutcome {
    /// Stopped by something other than running out of energy.
    pub fn violation(&self) -> Option<&AlgoError> {
        match &self.error {
            Some(AlgoError::Sim(SimError::EnergyExhausted { .. })) | None => None,
            Some(e) => Some(e),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub fn run(instance: &Instance, algo: Algo, params: &RunParams) -> Result<RunOutcome, RunError> {
    let ell = params.ell.unwrap_or(instance.ell_hint as f64);
    let rho = params.rho.unwrap_or(instance.rho_hint as f64);
    if !(ell >= 1.0) || !ell.is_finite() {
        return Err(RunError::Inadmissible(format!("need ell >= 1, got {ell}")));
    }
    if algo == Algo::Aseparator && !(rho >= ell && rho.is_finite()) {
        return Err(RunError::Inadmissible(format!(
            "need ell <= rho, got ell = {ell}, rho = {rho}"
        )));
    }
    if params.budget.is_some_and(|b| !(b >= 0.0)) {
        return Err(RunError::Inadmissible("budget must be non-negative".into()));
    }
    let config = WorldConfig {
        budget: params.budget,
        record: params.record,
        track_discovery: params.track_discovery,
        ell,
    };
    // Teams are executed one after another, so a look may be committed before
    // an earlier-in-time wake elsewhere. Re-run with the wake times of the
    // previous pass until every look agrees with them.
    let mut prophecy = Default::default();
    let mut passes = 0;
    let (world, result) = loop {
        passes += 1;
        let mut world = instance.world(config.clone())?;
        world.set_prophecy(prophecy);
        let mut result = match algo {
            Algo::Aseparator => run_aseparator(&mut world, ell, rho),
            Algo::Agrid => run_agrid(&mut world, ell),
            Algo::Awave => run_awave(&mut world, ell),
        };
        if world.looks_consistent() {
            break (world, result);
        }
        if passes == MAX_PASSES {
            if result.is_ok() {
                result = Err(AlgoError::Inconsistent(passes));
            }
            break (world, result);
        }
        prophecy = world.wake_times();
    };
    let used_rho = (algo == Algo::Aseparator).then_some(rho);
    let (trace, mut summary) = world.finalize(algo.name(), used_rho);
    summary.passes = passes;
    Ok(RunOutcome {
        trace,
        summary,
        error: result.err(),
    })
}
