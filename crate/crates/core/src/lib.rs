//! Quantum-control optimization toolkit.
//!
//! Prepares target states on closed (Schrödinger) and open (Lindblad)
//! quantum systems with piecewise-constant pulses. Optimizers include a
//! curriculum-driven deep Q-network agent with two ablation variants,
//! plus gradient-descent and genetic-algorithm baselines. The `harness`
//! module wires everything into reproducible, seeded experiment batches
//! with CSV/JSON/SVG outputs.

pub mod baselines;
pub mod curriculum;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod rl;
pub mod systems;

pub use error::{Error, Result};
