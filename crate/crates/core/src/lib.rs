pub mod behavior;
pub mod config;
pub mod error;
pub mod measurement;
pub mod scenario;
pub mod state;
pub mod compose;
pub mod oracle;
pub mod quantum;
pub mod experiments;
pub mod io;
pub mod expression;
pub mod seeds;
pub mod cli;
