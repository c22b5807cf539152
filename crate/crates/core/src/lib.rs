//! Variational quantum linear solver simulator with a classical optimizer
//! benchmark harness.
//!
//! The crate is layered bottom-up: [`quantum`] simulates circuits,
//! [`problem`] defines linear systems and the ansatz, [`cost`] evaluates the
//! local cost function and its gradient under a noise backend, [`optim`]
//! holds the eight optimizers, and [`bench`] runs experiment matrices and
//! summarizes them.

pub mod bench;
pub mod cost;
pub mod optim;
pub mod problem;
pub mod quantum;
