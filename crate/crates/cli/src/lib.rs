//! Scenario-driven front end for the QND nonlinearity-broadcasting
//! simulator: declarative JSON scenarios in, CSV/JSON artifacts out.

pub mod artifacts;
pub mod runner;
pub mod scenario;
