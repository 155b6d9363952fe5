//! Iterated three-player quantum game with evolving agents.
//!
//! Each round three agents play a move on a qubit drawn from a fixed or
//! random source. In the quantum variant the register is entangled before the
//! moves and disentangled before measurement; the classical variant drops both
//! entangling gates. Agents keep an exponentially discounted score of their
//! payoffs and switch moves when it falls below a threshold.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod game;
pub mod qcircuit;
pub mod rng;

pub use error::{Error, Result};
pub use game::{Move, PayoffTable, SourceBit, SourceSpec, StrategyProfile, Variant};
pub use evolve::ThresholdRule;
pub use rng::RandomStream;
