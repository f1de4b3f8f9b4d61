//! Quantum-circuit generative modeling on a dense statevector simulator.
//!
//! * [`statevector`] and [`gates`]: n-qubit pure states and the unitaries
//!   acting on them (qubit 0 is the most significant bit everywhere).
//! * [`ansatz`]: the layered `RY` + controlled-rotation circuit.
//! * [`sampling`] and [`gradients`]: Born probabilities, measurement
//!   sampling and exact shift-rule gradients.
//! * [`mle`] and [`qgan`]: Born-machine likelihood training and quantum
//!   GAN training.
//! * [`datasets`]: targets and divergences; [`io`] and [`config`]: file
//!   formats; [`cli`]: the `qgen` command-line tool.
//!
//! The `parallel` feature (default) runs gradient sweeps, discriminator
//! evaluations and large gate applications on rayon. See [`exec`].

pub mod ansatz;
pub mod cli;
pub mod config;
pub mod datasets;
pub mod error;
pub mod exec;
pub mod gates;
pub mod gradients;
pub mod io;
pub mod mle;
pub mod optim;
pub mod qgan;
pub mod rng;
pub mod sampling;
pub mod statevector;

pub use ansatz::{InputKind, LayeredAnsatz, ParamVector};
pub use error::{Error, Result};
pub use exec::Execution;
pub use sampling::{Distribution, SampleSet};
pub use statevector::{BitString, StateVector};
