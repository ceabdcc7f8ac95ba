//! Trembled repeated prisoner's dilemma: exact payoffs of finite-automaton
//! strategies, replicator dynamics on the resulting payoff matrices, basin
//! bounds around strict Nash vertices and subgame-perfection checks.

pub mod basin;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod payoff;
pub mod replicator;
pub mod robustness;
pub mod strategy;

pub use error::{Error, Result};
