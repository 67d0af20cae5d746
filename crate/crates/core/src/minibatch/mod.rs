//! Minibatch OT losses: reweighting, sampling laws, complete and incomplete
//! estimators, debiasing and lifted transport plans.

mod batch;
mod estimator;
mod law;
mod plan;
mod reweight;
mod spec;

pub use estimator::{complete_loss, debiased_loss, incomplete_loss, Estimate, Mode, ENUMERATION_LIMIT};
pub use law::{ordered_support, sample_tuple, tuple_probability, TupleSampler};
pub use plan::{averaged_plan, incomplete_plan, LiftedPlan};
pub use reweight::{reweight, reweight_normalized, reweight_uniform};
pub use spec::{Kernel, Law, MinibatchSpec, Reweight};

pub(crate) use batch::{eval_batch, Problem};
pub(crate) use estimator::{check_inputs, PairDraws};
pub(crate) use reweight::reweight_raw;
