use ndarray::Array2;

use super::exact::check_problem;
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, tree_sum};
use crate::types::{CostMatrix, KernelResult, ProbVector, TransportPlan};

pub const SINKHORN_TOLERANCE: f64 = 1e-9;
pub const SINKHORN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub(crate) struct Sinkhorn {
    pub value: f64,
    pub plan: Array2<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Log-domain Sinkhorn iterations on the dual potentials `(f, g)`.
///
/// The value is the dual objective `<f,a> + <g,b> - eps (sum(P) - 1)`, which
/// equals `<P,C> + eps KL(P | a b^T)` at the fixed point.
pub(crate) fn sinkhorn_raw(a: &[f64], b: &[f64], c: &Array2<f64>, eps: f64) -> Sinkhorn {
    let (n1, n2) = c.dim();
    let la: Vec<f64> = a.iter().map(|v| v.ln()).collect();
    let lb: Vec<f64> = b.iter().map(|v| v.ln()).collect();
    let mut f = vec![0.0; n1];
    let mut g = vec![0.0; n2];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < SINKHORN_MAX_ITER {
        iterations += 1;
        for i in 0..n1 {
            if a[i] > 0.0 {
                f[i] = -eps * log_sum_exp((0..n2).map(|j| lb[j] + (g[j] - c[[i, j]]) / eps));
            }
        }
        for j in 0..n2 {
            if b[j] > 0.0 {
                g[j] = -eps * log_sum_exp((0..n1).map(|i| la[i] + (f[i] - c[[i, j]]) / eps));
            }
        }
        let violation: f64 = (0..n1)
            .filter(|&i| a[i] > 0.0)
            .map(|i| {
                let row: f64 = (0..n2).map(|j| (la[i] + lb[j] + (f[i] + g[j] - c[[i, j]]) / eps).exp()).sum();
                (row - a[i]).abs()
            })
            .sum();
        if violation < SINKHORN_TOLERANCE {
            converged = true;
            break;
        }
    }

    let mut plan = Array2::zeros((n1, n2));
    for i in 0..n1 {
        for j in 0..n2 {
            if a[i] > 0.0 && b[j] > 0.0 {
                plan[[i, j]] = (la[i] + lb[j] + (f[i] + g[j] - c[[i, j]]) / eps).exp();
            }
        }
    }
    let fa: Vec<f64> = (0..n1).filter(|&i| a[i] > 0.0).map(|i| f[i] * a[i]).collect();
    let gb: Vec<f64> = (0..n2).filter(|&j| b[j] > 0.0).map(|j| g[j] * b[j]).collect();
    let mass = tree_sum(plan.as_slice().expect("standard layout"));
    let value = tree_sum(&fa) + tree_sum(&gb) - eps * (mass - 1.0);
    Sinkhorn { value, plan, iterations, converged }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("regularization must be positive, got {eps}")))
    }
}

/// Entropic OT `min <P,C> + eps H(P | a b^T)`, solved in the log domain.
///
/// Stops once the L1 violation of the row marginal drops below `1e-9` or after
/// 10,000 iterations; in the latter case `converged` is false.
pub fn solve_entropic(a: &ProbVector, b: &ProbVector, c: &CostMatrix, eps: f64) -> Result<KernelResult> {
    check_problem(a, b, c)?;
    check_eps(eps)?;
    let s = sinkhorn_raw(a.as_slice(), b.as_slice(), c.entries(), eps);
    let plan = TransportPlan::dense(s.plan, a.clone(), b.clone());
    Ok(KernelResult { value: s.value, plan: Some(plan), iterations: s.iterations, converged: s.converged })
}

/// `S(a,b) = W(a,b) - (W(a,a) + W(b,b)) / 2` for the entropic loss `W`.
pub fn sinkhorn_divergence(
    a: &ProbVector,
    b: &ProbVector,
    c_xy: &CostMatrix,
    c_xx: &CostMatrix,
    c_yy: &CostMatrix,
    eps: f64,
) -> Result<KernelResult> {
    check_problem(a, b, c_xy)?;
    check_problem(a, a, c_xx)?;
    check_problem(b, b, c_yy)?;
    check_eps(eps)?;
    let xy = sinkhorn_raw(a.as_slice(), b.as_slice(), c_xy.entries(), eps);
    let xx = sinkhorn_raw(a.as_slice(), a.as_slice(), c_xx.entries(), eps);
    let yy = sinkhorn_raw(b.as_slice(), b.as_slice(), c_yy.entries(), eps);
    Ok(KernelResult {
        value: xy.value - 0.5 * (xx.value + yy.value),
        plan: None,
        iterations: xy.iterations + xx.iterations + yy.iterations,
        converged: xy.converged && xx.converged && yy.converged,
    })
}
