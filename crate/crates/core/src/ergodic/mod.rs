//! Spectral ergodic coverage.
//!
//! Agents steer so that the time average of their ground positions matches
//! a target density in the cosine basis of the ground rectangle.

pub mod basis;
pub mod control;
pub mod planner;
pub mod state;
pub mod target;

pub use basis::{basis_f_k, grad_f_k, normalizer_h_k, Mode, ModeGrid, Weighting};
pub use control::{avoid_control_step, bump_alpha, control_step, ergodic_gradient, repulsive_field};
pub use planner::{
    multi_ergodic, run_team, single_erg_avoid_obs, single_ergodic, variant_team, ErgodicParams, ErgodicTeam,
    ErgodicVariant, Sharing,
};
pub use state::ErgodicState;
pub use target::{TargetDistribution, TargetKind};
