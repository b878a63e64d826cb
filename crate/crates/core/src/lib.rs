// SPDX-License-Identifier: Apache-2.0

//! Dense state-vector simulation of nonlinear quantum neurons.
//!
//! The crate is organised bottom-up:
//!
//! * [`statevec`] and [`matrix`] hold the simulation substrate,
//! * [`circuits`] describes gate lists, the inverse QFT, controlled powers
//!   and resource counting,
//! * [`fixedpoint`] converts between reals and register codes,
//! * [`oracles`] realises Boolean functions as circuits (assignment and
//!   phase/QFT constructions) and as minimal phase oracles,
//! * [`neuron`] builds the basis-encoded and amplitude-encoded neurons,
//! * [`activations`] and [`qnn`] provide the activation tables and the
//!   small feedforward network trained on XOR,
//! * [`noise`] runs Monte-Carlo trajectories with Pauli and readout errors,
//! * [`cli`] exposes everything as reproducible CSV/JSON artifacts.
//!
//! Data-parallel loops (shot batches, noisy trajectories, batch forward
//! passes, large gate kernels) go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod activations;
pub mod circuits;
pub mod cli;
pub mod error;
pub mod exec;
pub mod fixedpoint;
pub mod matrix;
pub mod neuron;
pub mod noise;
pub mod oracles;
pub mod qnn;
pub mod statevec;

pub use error::{Error, Result};
pub use exec::Execution;

/// Default number of shots used by every shot-based command.
pub const DEFAULT_SHOTS: u64 = 8192;
