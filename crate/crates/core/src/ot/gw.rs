use ndarray::Array2;

use super::exact::exact_raw;
use crate::error::{Error, Result};
use crate::numeric::tree_sum;
use crate::types::{CostMatrix, KernelResult, ProbVector, TransportPlan};

pub const GW_TOLERANCE: f64 = 1e-9;
pub const GW_MAX_ITER: usize = 1000;

#[derive(Debug, Clone)]
pub(crate) struct Gw {
    pub value: f64,
    pub plan: Array2<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// The linear map `P -> G(P)` with `G(P)_ij = sum_{i'j'} |C1_ii' - C2_jj'|^p P_i'j'`.
struct Tensor<'a> {
    c1: &'a Array2<f64>,
    c2: &'a Array2<f64>,
    p: f64,
    // p = 2 only: (C1 o C1) a 1^T + 1 b^T (C2 o C2)^T, valid for plans with marginals (a, b).
    constant: Option<Array2<f64>>,
}

impl<'a> Tensor<'a> {
    fn new(c1: &'a Array2<f64>, c2: &'a Array2<f64>, p: f64, a: &[f64], b: &[f64]) -> Self {
        let constant = (p == 2.0).then(|| {
            let r = c1.mapv(|v| v * v).dot(&ndarray::ArrayView1::from(a));
            let s = c2.mapv(|v| v * v).dot(&ndarray::ArrayView1::from(b));
            Array2::from_shape_fn((c1.nrows(), c2.nrows()), |(i, j)| r[i] + s[j])
        });
        Self { c1, c2, p, constant }
    }

    /// `G(P)` for a plan with the reference marginals.
    fn apply(&self, plan: &Array2<f64>) -> Array2<f64> {
        match &self.constant {
            Some(k) => k - &(self.c1.dot(plan).dot(&self.c2.t()) * 2.0),
            None => self.apply_generic(plan),
        }
    }

    /// `G(D)` for a direction with zero marginals.
    fn apply_direction(&self, d: &Array2<f64>) -> Array2<f64> {
        match &self.constant {
            Some(_) => self.c1.dot(d).dot(&self.c2.t()) * -2.0,
            None => self.apply_generic(d),
        }
    }

    fn apply_generic(&self, plan: &Array2<f64>) -> Array2<f64> {
        let (n1, n2) = plan.dim();
        let support: Vec<(usize, usize, f64)> = plan
            .indexed_iter()
            .filter(|(_, v)| **v != 0.0)
            .map(|((i, j), v)| (i, j, *v))
            .collect();
        Array2::from_shape_fn((n1, n2), |(i, j)| {
            support
                .iter()
                .map(|&(k, l, v)| (self.c1[[i, k]] - self.c2[[j, l]]).abs().powf(self.p) * v)
                .sum()
        })
    }
}

fn inner(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let terms: Vec<f64> = x.iter().zip(y.iter()).map(|(u, v)| u * v).collect();
    tree_sum(&terms)
}

/// Frank-Wolfe on the GW quadratic starting from the product coupling.
pub(crate) fn gw_raw(a: &[f64], b: &[f64], c1: &Array2<f64>, c2: &Array2<f64>, p: f64) -> Gw {
    let (n1, n2) = (a.len(), b.len());
    let tensor = Tensor::new(c1, c2, p, a, b);
    let mut plan = Array2::from_shape_fn((n1, n2), |(i, j)| a[i] * b[j]);
    let mut g = tensor.apply(&plan);
    let mut value = inner(&g, &plan);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < GW_MAX_ITER {
        iterations += 1;
        let (_, entries, _) = exact_raw(a, b, &g);
        let mut d = -&plan;
        for (i, j, v) in entries {
            d[[i, j]] += v;
        }
        let gd = tensor.apply_direction(&d);
        let quad = inner(&gd, &d);
        let lin = 2.0 * inner(&g, &d);
        let t = if quad > 0.0 {
            (-lin / (2.0 * quad)).clamp(0.0, 1.0)
        } else if quad + lin < 0.0 {
            1.0
        } else {
            0.0
        };
        if t == 0.0 {
            converged = true;
            break;
        }
        plan.scaled_add(t, &d);
        plan.mapv_inplace(|v| v.max(0.0));
        g = tensor.apply(&plan);
        let next = inner(&g, &plan);
        let decrease = value - next;
        value = next;
        if value <= 0.0 || decrease <= GW_TOLERANCE * value.abs() {
            converged = true;
            break;
        }
    }
    Gw { value: value.max(0.0), plan, iterations, converged }
}

fn check_intra(c: &CostMatrix, name: &str) -> Result<()> {
    if !c.is_square_symmetric_zero_diag() {
        return Err(Error::InvalidCost(format!("{name} must be square, symmetric, with zero diagonal")));
    }
    Ok(())
}

/// Gromov-Wasserstein discrepancy `sum |C1_ii' - C2_jj'|^p P_ij P_i'j'`, locally
/// minimized by conditional gradient with exact line search.
///
/// Each linear subproblem is an exact OT solve. Iteration stops when the
/// relative decrease of the objective falls below `1e-9` or after 1,000 steps.
pub fn solve_gw(a: &ProbVector, b: &ProbVector, c1: &CostMatrix, c2: &CostMatrix, p: f64) -> Result<KernelResult> {
    check_intra(c1, "C1")?;
    check_intra(c2, "C2")?;
    if c1.shape().0 != a.len() || c2.shape().0 != b.len() {
        return Err(Error::ShapeMismatch("intra-cost sizes must match the weight vectors".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("GW exponent must be >= 1, got {p}")));
    }
    let r = gw_raw(a.as_slice(), b.as_slice(), c1.entries(), c2.entries(), p);
    let plan = TransportPlan::dense(r.plan, a.clone(), b.clone());
    Ok(KernelResult { value: r.value, plan: Some(plan), iterations: r.iterations, converged: r.converged })
}
