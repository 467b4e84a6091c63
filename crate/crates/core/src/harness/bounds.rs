//! Closed-form bounds and the pinned constants that turn them into gates.

use crate::run::Algo;
use crate::sim::RunSummary;
use serde::{Deserialize, Serialize};

const PINNED: &str = include_str!("../../baselines/constants.json");

/// `log₂(1 + x)`, the logarithm used in every bound.
pub fn clog(x: f64) -> f64 {
    (1.0 + x).log2()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c1_aseparator_makespan: f64,
    pub c_round_duration: f64,
    pub c2_agrid_energy: f64,
    pub c3_awave_energy: f64,
    pub c_agrid_makespan: f64,
    pub c_awave_makespan: f64,
    pub c_rho_overcost: f64,
    /// Allowed regression over a pinned constant, as a fraction.
    pub tolerance: f64,
}

impl Constants {
    pub fn pinned() -> Self {
        serde_json::from_str(PINNED).expect("baselines/constants.json is valid")
    }

    pub fn get(&self, bound: Bound) -> f64 {
        match bound {
            Bound::AseparatorMakespan => self.c1_aseparator_makespan,
            Bound::RoundDuration => self.c_round_duration,
            Bound::AgridEnergy => self.c2_agrid_energy,
            Bound::AwaveEnergy => self.c3_awave_energy,
            Bound::AgridMakespan => self.c_agrid_makespan,
            Bound::AwaveMakespan => self.c_awave_makespan,
            Bound::RhoOvercost => self.c_rho_overcost,
        }
    }

    pub fn set(&mut self, bound: Bound, value: f64) {
        let slot = match bound {
            Bound::AseparatorMakespan => &mut self.c1_aseparator_makespan,
            Bound::RoundDuration => &mut self.c_round_duration,
            Bound::AgridEnergy => &mut self.c2_agrid_energy,
            Bound::AwaveEnergy => &mut self.c3_awave_energy,
            Bound::AgridMakespan => &mut self.c_agrid_makespan,
            Bound::AwaveMakespan => &mut self.c_awave_makespan,
            Bound::RhoOvercost => &mut self.c_rho_overcost,
        };
        *slot = value;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("constants serialize")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `ρ + ℓ²·clog(ρ/ℓ)`.
    AseparatorMakespan,
    /// `R + ℓ²` per partitioning round.
    RoundDuration,
    /// `ℓ²`.
    AgridEnergy,
    /// `ℓ'²·clog(ℓ')` with `ℓ' = max(ℓ, 4)`.
    AwaveEnergy,
    /// `ℓ·ecc_ℓ`.
    AgridMakespan,
    /// `ecc_ℓ + ℓ'²·clog(ecc_ℓ/ℓ')`.
    AwaveMakespan,
    /// `ℓ²·clog(ℓ) + estimate`.
    RhoOvercost,
}

impl Bound {
    pub const ALL: [Bound; 7] = [
        Bound::AseparatorMakespan,
        Bound::RoundDuration,
        Bound::AgridEnergy,
        Bound::AwaveEnergy,
        Bound::AgridMakespan,
        Bound::AwaveMakespan,
        Bound::RhoOvercost,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Bound::AseparatorMakespan => "aseparator_makespan",
            Bound::RoundDuration => "round_duration",
            Bound::AgridEnergy => "agrid_energy",
            Bound::AwaveEnergy => "awave_energy",
            Bound::AgridMakespan => "agrid_makespan",
            Bound::AwaveMakespan => "awave_makespan",
            Bound::RhoOvercost => "rho_overcost",
        }
    }
}

pub fn aseparator_makespan_formula(ell: f64, rho: f64) -> f64 {
    rho + ell * ell * clog(rho / ell)
}

pub fn round_duration_formula(width: f64, ell: f64) -> f64 {
    width + ell * ell
}

pub fn agrid_energy_formula(ell: f64) -> f64 {
    ell * ell
}

pub fn awave_energy_formula(ell: f64) -> f64 {
    let l = ell.max(4.0);
    l * l * clog(l)
}

pub fn agrid_makespan_formula(ell: f64, ecc: f64) -> f64 {
    ell * ecc
}

pub fn awave_makespan_formula(ell: f64, ecc: f64) -> f64 {
    let l = ell.max(4.0);
    ecc + l * l * clog(ecc / l)
}

pub fn rho_overcost_formula(ell: f64, estimate: f64) -> f64 {
    ell * ell * clog(ell) + estimate
}

/// One measured quantity against `C · formula`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub bound: Bound,
    pub measured: f64,
    /// Value of the formula without the constant.
    pub formula: f64,
    pub constant: f64,
    /// `measured / formula`, the quantity the constant is fitted to.
    pub ratio: f64,
    pub pass: bool,
}

impl BoundVerdict {
    pub fn new(bound: Bound, measured: f64, formula: f64, constants: &Constants) -> Self {
        let constant = constants.get(bound);
        let ratio = if formula > 0.0 {
            measured / formula
        } else {
            0.0
        };
        let pass = measured <= constant * (1.0 + constants.tolerance) * formula;
        BoundVerdict {
            bound,
            measured,
            formula,
            constant,
            ratio,
            pass,
        }
    }

    /// `C · formula`.
    pub fn limit(&self) -> f64 {
        self.constant * self.formula
    }
}

/// The makespan and energy verdicts that apply to a run of `algo`.
pub fn verdicts(algo: Algo, summary: &RunSummary, constants: &Constants) -> Vec<BoundVerdict> {
    let ell = summary.ell;
    let ecc = summary.metrics.and_then(|m| m.ecc);
    let mut out = Vec::new();
    match algo {
        Algo::Aseparator => {
            if let Some(rho) = summary.rho {
                let f = aseparator_makespan_formula(ell, rho);
                out.push(BoundVerdict::new(
                    Bound::AseparatorMakespan,
                    summary.makespan_last_wake,
                    f,
                    constants,
                ));
            }
            let worst = summary
                .rounds
                .iter()
                .map(|r| {
                    BoundVerdict::new(
                        Bound::RoundDuration,
                        r.end - r.start,
                        round_duration_formula(r.square.width, ell),
                        constants,
                    )
                })
                .max_by(|a, b| a.ratio.total_cmp(&b.ratio));
            out.extend(worst);
        }
        Algo::Agrid => {
            let f = agrid_energy_formula(ell);
            out.push(BoundVerdict::new(
                Bound::AgridEnergy,
                summary.max_energy,
                f,
                constants,
            ));
            if let Some(e) = ecc {
                let f = agrid_makespan_formula(ell, e);
                out.push(BoundVerdict::new(
                    Bound::AgridMakespan,
                    summary.makespan_last_wake,
                    f,
                    constants,
                ));
            }
        }
        Algo::Awave => {
            let f = awave_energy_formula(ell);
            out.push(BoundVerdict::new(
                Bound::AwaveEnergy,
                summary.max_energy,
                f,
                constants,
            ));
            if let Some(e) = ecc {
                let f = awave_makespan_formula(ell, e);
                out.push(BoundVerdict::new(
                    Bound::AwaveMakespan,
                    summary.makespan_last_wake,
                    f,
                    constants,
                ));
            }
        }
    }
    out
}

/// Hard energy cap implied by the pinned constants, if the algorithm has one.
pub fn pinned_budget(algo: Algo, ell: f64, constants: &Constants) -> Option<f64> {
    match algo {
        Algo::Aseparator => None,
        Algo::Agrid => Some(constants.c2_agrid_energy * agrid_energy_formula(ell)),
        Algo::Awave => Some(constants.c3_awave_energy * awave_energy_formula(ell)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_constants_parse() {
        let c = Constants::pinned();
        assert!(c.tolerance > 0.0);
        for b in Bound::ALL {
            assert!(c.get(b) > 0.0, "{}", b.name());
        }
    }

    #[test]
    fn clog_of_one_is_one() {
        assert_eq!(clog(1.0), 1.0);
        assert_eq!(clog(0.0), 0.0);
    }
}
