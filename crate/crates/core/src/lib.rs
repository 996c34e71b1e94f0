//! Monopoly equilibrium engine for an integrated sensing and communication
//! (ISAC) service.
//!
//! A single operator sells sensing power `P_r` and communication rate `R_c`
//! to a representative user with quasilinear utility, producing the rate from
//! transmit power `P_c` and bandwidth `W_c` bought at unit prices `w_p` and
//! `w_w`. The crate evaluates the model, solves the profit-maximizing
//! allocation and sweeps one parameter at a time.
pub mod cli;
pub mod model;
pub mod solver;
pub mod specfun;
pub mod statics;

pub use model::{Allocation, ModelError, ModelParams, Parameter, PriceQuote};
pub use solver::{Equilibrium, SolverConfig, SolverError};
pub use statics::{Direction, Output, SweepParameter, SweepResult, SweepSpec};
