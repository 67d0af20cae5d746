use rayon::prelude::*;

use super::batch::{eval_batch, Problem};
use super::law::{canonical_count, canonical_support, TupleSampler};
use super::spec::{Kernel, MinibatchSpec};
use crate::error::{Error, Result};
use crate::numeric::{sample_std, tree_sum};
use crate::rng::Streams;
use crate::types::{PointCloud, ProbVector};

/// Largest number of canonical tuple pairs the complete estimator enumerates.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Substream label for batch-pair draws.
pub(crate) const PAIR_LABEL: &str = "batch-pairs";

/// A loss estimate with its Monte-Carlo standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub batches: usize,
}

/// Which estimator a debiased loss is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Complete,
    Incomplete,
}

pub(crate) fn check_inputs(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, x: &PointCloud, y: &PointCloud) -> Result<()> {
    if a.len() != x.len() {
        return Err(Error::ShapeMismatch(format!("{} weights for {} points", a.len(), x.len())));
    }
    if b.len() != y.len() {
        return Err(Error::ShapeMismatch(format!("{} weights for {} points", b.len(), y.len())));
    }
    if spec.kernel != Kernel::GromovWasserstein && x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    spec.validate(a.len(), b.len())
}

fn check_budget(spec: &MinibatchSpec, n_a: usize, n_b: usize) -> Result<()> {
    let pairs = canonical_count(spec.law, n_a, spec.m) * canonical_count(spec.law, n_b, spec.m);
    if pairs > ENUMERATION_LIMIT {
        return Err(Error::EnumerationBudget { pairs, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

/// Canonical tuples of both sides with their probabilities.
pub(crate) type Supports = (Vec<(Vec<usize>, f64)>, Vec<(Vec<usize>, f64)>);

pub(crate) fn supports(spec: &MinibatchSpec, a: &[f64], b: &[f64]) -> Result<Supports> {
    check_budget(spec, a.len(), b.len())?;
    Ok((canonical_support(spec.law, a, spec.m), canonical_support(spec.law, b, spec.m)))
}

fn complete_raw(spec: &MinibatchSpec, prob: Problem<'_>) -> Result<f64> {
    let (sa, sb) = supports(spec, prob.a, prob.b)?;
    let nb = sb.len();
    let terms: Vec<f64> = (0..sa.len() * nb)
        .into_par_iter()
        .map(|q| {
            let (i, wi) = &sa[q / nb];
            let (j, wj) = &sb[q % nb];
            wi * wj * eval_batch(spec, prob, i, j, false).value
        })
        .collect();
    Ok(tree_sum(&terms))
}

/// The complete minibatch loss `E_{I,J}[h(w(a,I), w(b,J), C(I,J))]`, by exhaustive
/// enumeration.
///
/// Tuples are enumerated up to reordering: the kernel value does not depend on
/// the order of the batch elements, so each sorted tuple stands for all of its
/// orderings with their summed probability.
pub fn complete_loss(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, x: &PointCloud, y: &PointCloud) -> Result<f64> {
    check_inputs(spec, a, b, x, y)?;
    complete_raw(spec, Problem { a: a.as_slice(), b: b.as_slice(), x, y })
}

/// Draws of `(I, J)` for counters `0..k` on one term's substreams.
pub(crate) struct PairDraws {
    sa: TupleSampler,
    sb: TupleSampler,
    streams: Streams,
}

impl PairDraws {
    pub fn new(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, term: u64) -> Result<Self> {
        Ok(Self {
            sa: TupleSampler::new(spec.law, a, spec.m)?,
            sb: TupleSampler::new(spec.law, b, spec.m)?,
            streams: Streams::new(spec.seed, PAIR_LABEL, term),
        })
    }

    pub fn draw(&self, t: usize) -> (Vec<usize>, Vec<usize>) {
        let mut rng = self.streams.get(t as u64);
        let i = self.sa.sample(&mut rng);
        let j = self.sb.sample(&mut rng);
        (i, j)
    }
}

fn encode(t: &[usize], n: usize) -> u64 {
    t.iter().fold(0u64, |acc, &i| acc * n as u64 + i as u64)
}

fn incomplete_raw(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, prob: Problem<'_>, term: u64) -> Result<Estimate> {
    let draws = PairDraws::new(spec, a, b, term)?;
    let k = spec.k;
    let space_a = (a.len() as f64).powi(spec.m as i32);
    let space_b = (b.len() as f64).powi(spec.m as i32);

    let values: Vec<f64> = if space_a * space_b < k as f64 {
        // Few distinct batch pairs: evaluate each once and look the values up.
        let nb = space_b as u64;
        let pairs: Vec<(u64, Vec<usize>, Vec<usize>)> = (0..k)
            .into_par_iter()
            .map(|t| {
                let (i, j) = draws.draw(t);
                (encode(&i, a.len()) * nb + encode(&j, b.len()), i, j)
            })
            .collect();
        let mut unique: Vec<&(u64, Vec<usize>, Vec<usize>)> = pairs.iter().collect();
        unique.sort_unstable_by_key(|p| p.0);
        unique.dedup_by_key(|p| p.0);
        let table: Vec<(u64, f64)> = unique
            .par_iter()
            .map(|(key, i, j)| (*key, eval_batch(spec, prob, i, j, false).value))
            .collect();
        pairs
            .iter()
            .map(|(key, _, _)| table[table.binary_search_by_key(key, |e| e.0).expect("key was tabulated")].1)
            .collect()
    } else {
        (0..k)
            .into_par_iter()
            .map(|t| {
                let (i, j) = draws.draw(t);
                eval_batch(spec, prob, &i, &j, false).value
            })
            .collect()
    };
    Ok(Estimate { value: tree_sum(&values) / k as f64, std_error: sample_std(&values) / (k as f64).sqrt(), batches: k })
}

/// The incomplete estimator: average of the kernel over `k` seeded batch pairs.
pub fn incomplete_loss(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, x: &PointCloud, y: &PointCloud) -> Result<Estimate> {
    check_inputs(spec, a, b, x, y)?;
    incomplete_raw(spec, a, b, Problem { a: a.as_slice(), b: b.as_slice(), x, y }, 0)
}

/// `Lambda(a,b) = h(a,b) - (h(a,a) + h(b,b)) / 2`.
///
/// In incomplete mode the three terms use independent substreams 0, 1 and 2;
/// term 0 coincides with [`incomplete_loss`].
pub fn debiased_loss(
    spec: &MinibatchSpec,
    a: &ProbVector,
    b: &ProbVector,
    x: &PointCloud,
    y: &PointCloud,
    mode: Mode,
) -> Result<Estimate> {
    check_inputs(spec, a, b, x, y)?;
    let pab = Problem { a: a.as_slice(), b: b.as_slice(), x, y };
    let paa = Problem { a: a.as_slice(), b: a.as_slice(), x, y: x };
    let pbb = Problem { a: b.as_slice(), b: b.as_slice(), x: y, y };
    match mode {
        Mode::Complete => {
            let (ab, aa, bb) = (complete_raw(spec, pab)?, complete_raw(spec, paa)?, complete_raw(spec, pbb)?);
            Ok(Estimate { value: ab - 0.5 * (aa + bb), std_error: 0.0, batches: 0 })
        }
        Mode::Incomplete => {
            let ab = incomplete_raw(spec, a, b, pab, 0)?;
            let aa = incomplete_raw(spec, a, a, paa, 1)?;
            let bb = incomplete_raw(spec, b, b, pbb, 2)?;
            let se = (ab.std_error.powi(2) + 0.25 * (aa.std_error.powi(2) + bb.std_error.powi(2))).sqrt();
            Ok(Estimate { value: ab.value - 0.5 * (aa.value + bb.value), std_error: se, batches: 3 * spec.k })
        }
    }
}
