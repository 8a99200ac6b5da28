//! Simulation toolkit for the (max,rand) catastrophe fitness model.
//!
//! Every site of a (truncated) line carries a fitness in `(0,1)`. At each
//! step the environment is normal with probability `p`, in which case each
//! site keeps the larger of its fitness and a fresh uniform, or a catastrophe
//! strikes and every site is redrawn. The crate provides:
//!
//! * [`env`]: counter-based randomness and the renewal trace of catastrophes,
//! * [`analytic`]: closed-form time-`t` and stationary laws,
//! * [`chain`]: the mixing chains `Θ_t(u)` of the (max,rand), (max,min) and
//!   Erdős systems,
//! * [`field`]: site-field simulators, the coupling and a Bak-Sneppen ring,
//! * [`stats`]: empirical CDFs, KS distances, histograms and estimators.

pub mod analytic;
pub mod chain;
pub mod env;
mod error;
pub mod field;
pub mod stats;

pub use error::{Error, Result};
