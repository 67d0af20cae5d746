use ndarray::Array2;

use super::simplex;
use crate::error::{Error, Result};
use crate::numeric::tree_sum;
use crate::types::{CostMatrix, KernelResult, ProbVector, TransportPlan};

pub(crate) fn check_problem(a: &ProbVector, b: &ProbVector, c: &CostMatrix) -> Result<()> {
    let (r, s) = c.shape();
    if a.len() != r || b.len() != s {
        return Err(Error::ShapeMismatch(format!(
            "weights of length {} and {} against a {r}x{s} cost matrix",
            a.len(),
            b.len()
        )));
    }
    let (ma, mb) = (tree_sum(a.as_slice()), tree_sum(b.as_slice()));
    if (ma - mb).abs() > 1e-9 {
        return Err(Error::InfeasibleMarginals(ma, mb));
    }
    Ok(())
}

/// Exact plan on raw slices: `(value, sparse entries, pivots)`.
pub(crate) fn exact_raw(a: &[f64], b: &[f64], c: &Array2<f64>) -> (f64, Vec<(usize, usize, f64)>, usize) {
    let flow = simplex::transport(a, b, c, usize::MAX);
    let terms: Vec<f64> = flow.entries.iter().map(|&(i, j, v)| v * c[[i, j]]).collect();
    (tree_sum(&terms), flow.entries, flow.iterations)
}

/// Solves the Kantorovich problem `min <P, C>` over couplings of `a` and `b`.
///
/// The returned plan is a vertex of the transport polytope, so it has at most
/// `n1 + n2 - 1` nonzero entries.
pub fn solve_exact_ot(a: &ProbVector, b: &ProbVector, c: &CostMatrix) -> Result<KernelResult> {
    check_problem(a, b, c)?;
    let flow = simplex::transport(a.as_slice(), b.as_slice(), c.entries(), usize::MAX);
    let value = tree_sum(&flow.entries.iter().map(|&(i, j, v)| v * c.entries()[[i, j]]).collect::<Vec<_>>());
    let (r, s) = c.shape();
    let plan = TransportPlan::sparse(r, s, flow.entries, a.clone(), b.clone());
    Ok(KernelResult { value, plan: Some(plan), iterations: flow.iterations, converged: flow.converged })
}
