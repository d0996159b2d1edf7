//! Wind-electrolyser dispatch simulation and levelised cost of hydrogen.
//!
//! A year of half-hourly wind power is allocated between the electrolyser,
//! grid export and curtailment under one of several deployment rules. The
//! resulting flows drive the annualised electrolyser, compressor,
//! interconnection and electricity costs, and the LCOH in £/kg and £/MWh (HHV).
//!
//! ```
//! use h2path::profiles::synth_profile;
//! use h2path::scenarios::{evaluate, preset, UseCase};
//!
//! let profile = synth_profile(0.4883, 10.0, 42, 17_520).unwrap();
//! let (eval, _ledger) = evaluate(&preset(UseCase::IIIa), &profile).unwrap();
//! assert!(eval.costs.lcoh_per_kg > 0.0);
//! ```

// `!(x > 0.0)` is used on purpose throughout validation so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispatch;
pub mod econ;
pub mod error;
pub mod plant;
pub mod profiles;
pub mod scenarios;

pub use error::{Error, Result};
