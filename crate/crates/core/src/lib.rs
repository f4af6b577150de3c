//! Exact reachability analysis and minimal witnessing subsystems for
//! probabilistic timed automata.

pub mod dbm;
pub mod model;
pub mod numeric;
pub mod parser;
pub mod region;
pub mod volume;
pub mod milp;
pub mod quotient;
pub mod reach;
pub mod farkas;
pub mod minwit;
