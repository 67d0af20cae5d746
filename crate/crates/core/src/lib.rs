//! Minibatch optimal transport.
//!
//! Exact, entropic and Gromov-Wasserstein kernels ([`ot`]), minibatch
//! estimators and lifted plans ([`minibatch`]), the 1D closed form
//! ([`analytic_1d`]), concentration diagnostics ([`diagnostics`]), gradient
//! flows ([`gradflow`]) and full-image color transfer ([`color`]).

pub mod analytic_1d;
pub mod color;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod gradflow;
pub mod io;
pub mod minibatch;
pub mod numeric;
pub mod ot;
pub mod rng;
pub mod types;

pub use error::{Error, Result};
pub use types::{CostMatrix, KernelResult, PlanStorage, PointCloud, ProbVector, TransportPlan};
