//! Upper bounds on one-way and two-way distillable entanglement and on
//! quantum capacity, obtained by removing the largest anti-degradable (or
//! PPT) component from a state or channel with semidefinite programming.
//!
//! The crate is organized bottom-up:
//!
//! * [`qmat`] dense complex linear algebra and entropies,
//! * [`sdp`] a Hermitian SDP model and a homogeneous self-dual interior-point solver,
//! * [`channels`] Kraus/Choi channel representations and constructors,
//! * [`state_bounds`] state-level squeezing and entanglement bounds,
//! * [`channel_bounds`] channel squeezing, capacity bounds and diamond norms,
//! * [`experiments`] dataset generation for the parameter sweeps.

pub mod channel_bounds;
pub mod channels;
pub mod error;
pub mod experiments;
pub mod qmat;
pub mod report;
pub mod sdp;
pub mod state_bounds;

pub use error::{Error, Result};
pub use qmat::{CMat, DensityOperator};
