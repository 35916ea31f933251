//! Sensitivity engine and simulator for detecting a single target spin with
//! probe-spin ensembles.
//!
//! Three probe strategies are modelled: a single probe spin, a separable
//! ensemble of probes, and a GHZ-entangled ensemble. The crate is organised as
//!
//! * [`physical_model`]: units, parameters, dipolar couplings, lattices and the
//!   continuum coupling integral;
//! * [`sensitivity`]: closed-form uncertainties, geometry optimisation, ratio
//!   sweeps and detection times;
//! * [`oracle`]: exact small-system density-matrix dynamics used to check the
//!   closed forms, including a rotating-wave check against the full dipolar
//!   Hamiltonian;
//! * [`measurement`]: Monte Carlo simulation of the repeated Ramsey sequence;
//! * [`config`], [`commands`], [`verify`]: the command-line front end.
//!
//! Units are fixed everywhere: lengths in μm, times in s, angular frequencies
//! in rad/s, densities in μm⁻³ and the dipolar constant in rad·μm³/s.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod measurement;
pub mod oracle;
pub mod physical_model;
pub mod sensitivity;
pub mod verify;

pub use error::{Error, Result};
pub use physical_model::{
    CylinderGeometry, LatticeMode, PhysicalParams, ReducedGeometry, SpinLattice, SpinSite,
    TargetState,
};
pub use sensitivity::{Branch, Protocol};
