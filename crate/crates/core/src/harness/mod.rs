//! Bound gates, sweeps and rendering used by the CLI and the acceptance suite.

pub mod bounds;
pub mod render;
pub mod rho;
pub mod sweep;

pub use bounds::{BoundVerdict, Constants};
pub use render::render_svg;
pub use sweep::{run_sweep, SweepConfig, SweepRow};
