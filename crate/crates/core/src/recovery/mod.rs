//! ADMM recovery solvers.

mod config;
mod onebit;
mod report;
mod rhtc;

pub use config::{default_lambda, Regularizer, SolverConfig};
pub use onebit::{
    gnobhtc, gnobrhtc, onebit_l_update, onebit_observe, onebit_stationarity, ObservationSet,
};
pub use report::{kkt_diagnostics, AdmmState, KktRecord, SolveReport, Status};
pub use rhtc::{gnhtc, gnrhtc};

#[cfg(test)]
mod tests;
