//! Surrogate-assisted serviceability analysis of a four-span reinforced
//! concrete rail bridge deck.
//!
//! The crate is organised bottom-up:
//!
//! * [`beam_model`] fixed bridge description and cracked-section rebar stress,
//! * [`fe_solver`] Timoshenko beam FE solver, moving-load moment envelope and
//!   the scalar response `q(x)` (maximum rebar tensile stress),
//! * [`doe`] Latin Hypercube designs and input-space maps,
//! * [`kriging`], [`pce`], [`svr`] the three surrogate families,
//! * [`metrics`] validation metrics,
//! * [`pipeline`] datasets, the training-size campaign, limit-state
//!   classification and failure probability.

pub mod beam_model;
pub mod doe;
mod error;
pub mod fe_solver;
pub mod kriging;
pub(crate) mod linalg;
pub mod metrics;
pub(crate) mod optim;
pub mod pce;
pub mod pipeline;
pub mod svr;

pub use error::{Error, Result};
