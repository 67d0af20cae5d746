use ndarray::Array2;

use super::reweight::reweight_raw;
use super::spec::{Kernel, MinibatchSpec};
use crate::ot::{batch_cost, exact_raw, gw_raw, sinkhorn_raw};
use crate::types::PointCloud;

/// The two measures a minibatch loss compares.
#[derive(Clone, Copy)]
pub(crate) struct Problem<'a> {
    pub a: &'a [f64],
    pub b: &'a [f64],
    pub x: &'a PointCloud,
    pub y: &'a PointCloud,
}

/// Kernel value on one batch pair; `plan` is in batch-local indices.
pub(crate) struct BatchResult {
    pub value: f64,
    pub plan: Option<Vec<(usize, usize, f64)>>,
}

fn dense_entries(p: &Array2<f64>) -> Vec<(usize, usize, f64)> {
    p.indexed_iter().filter(|(_, v)| **v != 0.0).map(|((i, j), v)| (i, j, *v)).collect()
}

pub(crate) fn eval_batch(spec: &MinibatchSpec, prob: Problem<'_>, i: &[usize], j: &[usize], want_plan: bool) -> BatchResult {
    let wa = reweight_raw(spec.reweight, prob.a, i);
    let wb = reweight_raw(spec.reweight, prob.b, j);
    let p = spec.p;
    match spec.kernel {
        Kernel::Wasserstein | Kernel::WassersteinPow => {
            let c = batch_cost(prob.x, i, prob.y, j, p);
            let (v, entries, _) = exact_raw(&wa, &wb, &c);
            let value = if spec.kernel == Kernel::Wasserstein { v.max(0.0).powf(1.0 / p) } else { v };
            BatchResult { value, plan: want_plan.then_some(entries) }
        }
        Kernel::Entropic => {
            let c = batch_cost(prob.x, i, prob.y, j, p);
            let s = sinkhorn_raw(&wa, &wb, &c, spec.eps);
            BatchResult { value: s.value, plan: want_plan.then(|| dense_entries(&s.plan)) }
        }
        Kernel::Sinkhorn => {
            let cxy = batch_cost(prob.x, i, prob.y, j, p);
            let cxx = batch_cost(prob.x, i, prob.x, i, p);
            let cyy = batch_cost(prob.y, j, prob.y, j, p);
            let xy = sinkhorn_raw(&wa, &wb, &cxy, spec.eps).value;
            let xx = sinkhorn_raw(&wa, &wa, &cxx, spec.eps).value;
            let yy = sinkhorn_raw(&wb, &wb, &cyy, spec.eps).value;
            BatchResult { value: xy - 0.5 * (xx + yy), plan: None }
        }
        Kernel::GromovWasserstein => {
            let c1 = batch_cost(prob.x, i, prob.x, i, p);
            let c2 = batch_cost(prob.y, j, prob.y, j, p);
            let g = gw_raw(&wa, &wb, &c1, &c2, p);
            BatchResult { value: g.value, plan: want_plan.then(|| dense_entries(&g.plan)) }
        }
    }
}
