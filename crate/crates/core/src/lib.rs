pub mod cli;
pub mod compat;
pub mod incext;
pub mod models;
pub mod quantum;
pub mod ratbool;
pub mod scenario;
pub mod verdict;
