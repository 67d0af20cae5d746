use std::collections::HashMap;

use rayon::prelude::*;

use super::batch::{eval_batch, Problem};
use super::estimator::{check_inputs, supports, PairDraws};
use super::spec::MinibatchSpec;
use crate::error::{Error, Result};
use crate::types::{PointCloud, ProbVector, TransportPlan};

/// Batches solved together before their plans are merged.
const CHUNK: usize = 256;

/// An `n x n` sparse plan averaged over lifted batch plans.
#[derive(Debug, Clone)]
pub struct LiftedPlan {
    pub plan: TransportPlan,
    /// Number of `(I, J)` pairs averaged.
    pub batch_count: usize,
}

/// Accumulates `Q_I^T P Q_J` contributions in batch order.
struct Accumulator {
    map: HashMap<(usize, usize), f64>,
}

impl Accumulator {
    fn new() -> Self {
        Self { map: HashMap::new() }
    }

    fn add(&mut self, i: &[usize], j: &[usize], plan: &[(usize, usize, f64)], weight: f64) {
        for &(r, s, v) in plan {
            *self.map.entry((i[r], j[s])).or_insert(0.0) += weight * v;
        }
    }

    fn finish(self, a: &ProbVector, b: &ProbVector, batch_count: usize) -> LiftedPlan {
        let triplets: Vec<(usize, usize, f64)> = self.map.into_iter().map(|((i, j), v)| (i, j, v)).collect();
        LiftedPlan { plan: TransportPlan::sparse(a.len(), b.len(), triplets, a.clone(), b.clone()), batch_count }
    }
}

fn check_plan_kernel(spec: &MinibatchSpec) -> Result<()> {
    if spec.kernel.has_plan() {
        Ok(())
    } else {
        Err(Error::UnsupportedKernel(
            "the Sinkhorn divergence combines three plans and has no single plan to lift".into(),
        ))
    }
}

/// The averaged minibatch plan `E_{I,J}[Q_I^T P_{I,J} Q_J]` by exact enumeration.
pub fn averaged_plan(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, x: &PointCloud, y: &PointCloud) -> Result<LiftedPlan> {
    check_inputs(spec, a, b, x, y)?;
    check_plan_kernel(spec)?;
    let prob = Problem { a: a.as_slice(), b: b.as_slice(), x, y };
    let (sa, sb) = supports(spec, prob.a, prob.b)?;
    let nb = sb.len();
    let total = sa.len() * nb;
    let mut acc = Accumulator::new();
    for start in (0..total).step_by(CHUNK) {
        let end = (start + CHUNK).min(total);
        let plans: Vec<Vec<(usize, usize, f64)>> = (start..end)
            .into_par_iter()
            .map(|q| eval_batch(spec, prob, &sa[q / nb].0, &sb[q % nb].0, true).plan.expect("plan kernel"))
            .collect();
        for (q, plan) in (start..end).zip(&plans) {
            let (i, wi) = &sa[q / nb];
            let (j, wj) = &sb[q % nb];
            acc.add(i, j, plan, wi * wj);
        }
    }
    Ok(acc.finish(a, b, total))
}

/// The incomplete plan: `(1/k) sum_t Q_{I_t}^T P_t Q_{J_t}` over `k` seeded draws.
///
/// Uses the same batch draws as [`super::incomplete_loss`] with the same spec.
pub fn incomplete_plan(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, x: &PointCloud, y: &PointCloud) -> Result<LiftedPlan> {
    check_inputs(spec, a, b, x, y)?;
    check_plan_kernel(spec)?;
    let prob = Problem { a: a.as_slice(), b: b.as_slice(), x, y };
    let draws = PairDraws::new(spec, a, b, 0)?;
    let weight = 1.0 / spec.k as f64;
    let mut acc = Accumulator::new();
    for start in (0..spec.k).step_by(CHUNK) {
        let end = (start + CHUNK).min(spec.k);
        let solved: Vec<(Vec<usize>, Vec<usize>, Vec<(usize, usize, f64)>)> = (start..end)
            .into_par_iter()
            .map(|t| {
                let (i, j) = draws.draw(t);
                let plan = eval_batch(spec, prob, &i, &j, true).plan.expect("plan kernel");
                (i, j, plan)
            })
            .collect();
        for (i, j, plan) in &solved {
            acc.add(i, j, plan, weight);
        }
    }
    Ok(acc.finish(a, b, spec.k))
}
