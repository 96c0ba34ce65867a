//! Multi-agent aerial coverage of urban worlds.
//!
//! Buildings are prisms on a rectangular ground plane and every agent
//! carries a downward sensor that only observes at one optimal altitude.
//! The crate provides the world model, six coverage planners (lawnmower
//! sweeps, three ergodic variants, Voronoi and grid partitions), the
//! fly-over repair that lifts paths over buildings, a fixed-step
//! simulation engine and the probe-based coverage metrics.

pub mod engine;
pub mod env;
pub mod ergodic;
pub mod error;
pub mod geom;
pub mod lawnmower;
pub mod metrics;
pub mod partition;
pub mod traj;

pub use env::{generate_environment, Building, EnvFamily, EnvSpec, Environment};
pub use error::{CoverageError, Result};
pub use geom::{GroundGrid, Point2, Point3, Rect};
pub use traj::{MultiPath, Sample, Trajectory};
