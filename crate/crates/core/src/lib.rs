//! Second-order time-convolutionless (TCL2) dynamics of open quantum systems
//! and the Kraus channels they generate.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] — dense complex matrices, density operators, system Hamiltonians;
//! * [`bath`] — bath correlation functions for discrete, ohmic and markovian reservoirs;
//! * [`tcl`] — the TCL2 and Lindblad generators;
//! * [`ode`] — adaptive integration of the master equation on a time grid;
//! * [`kraus`] — Born-order channel matrices and canonical Kraus operators;
//! * [`dephasing`] — the closed-form pure-dephasing channel;
//! * [`oracle`] — exact system+bath evolution for small truncated baths;
//! * [`scenario`], [`report`], [`cli`] — the scenario runner behind the `tclkraus` binary.

// `!(x >= 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod cli;
pub mod dephasing;
pub mod error;
pub mod io;
pub mod kraus;
pub mod linalg;
pub mod metrics;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod scenario;
pub mod tcl;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
