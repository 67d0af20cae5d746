//! Discrete optimal transport kernels.

mod cost;
mod exact;
mod gw;
mod one_d;
pub(crate) mod simplex;
mod sinkhorn;

pub use cost::build_cost_matrix;
pub use exact::solve_exact_ot;
pub use gw::{solve_gw, GW_MAX_ITER, GW_TOLERANCE};
pub use one_d::wasserstein_1d;
pub use sinkhorn::{sinkhorn_divergence, solve_entropic, SINKHORN_MAX_ITER, SINKHORN_TOLERANCE};

pub(crate) use cost::{batch_cost, ground_cost, sq_dist};
pub(crate) use exact::exact_raw;
pub(crate) use gw::gw_raw;
pub(crate) use sinkhorn::sinkhorn_raw;
