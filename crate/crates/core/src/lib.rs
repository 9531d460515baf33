//! Completely positive two-level evolution for neutron interferometry,
//! fringe models, and extraction of the dissipative constants from fitted
//! count data.
//!
//! Energies and rates are in GeV, times in GeV^-1 (natural units).

pub mod bloch;
pub mod config;
pub mod estimate;
pub mod evolution;
pub mod fitting;
pub mod generator;
pub mod interference;
pub mod pipeline;
pub mod sinc;
pub mod units;
