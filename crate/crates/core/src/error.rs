//! Error type shared by the algorithm modules.

use crate::geometry::{GeometryError, Point};
use crate::sim::SimError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgoError {
    #[error("empty team")]
    EmptyTeam,
    #[error("nothing to wake")]
    NothingToWake,
    #[error("{point} lies outside the {region}")]
    Outside { point: Point, region: &'static str },
    #[error("team of {team} robots does not match a plan for {plan}")]
    TeamMismatch { team: usize, plan: usize },
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("looks still disagree with wake times after {0} passes")]
    Inconsistent(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
