use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::spec::Law;
use crate::error::{Error, Result};
use crate::types::ProbVector;

/// `(n-m)!/(n-1)!`, the inverse of a falling factorial.
fn falling_ratio(n: usize, m: usize) -> f64 {
    (n - m + 1..n).fold(1.0, |acc, v| acc / v as f64)
}

fn has_repeats(tuple: &[usize]) -> bool {
    let mut s = tuple.to_vec();
    s.sort_unstable();
    s.windows(2).any(|w| w[0] == w[1])
}

/// Probability of the ordered tuple `I` under the law.
pub fn tuple_probability(law: Law, a: &ProbVector, tuple: &[usize]) -> f64 {
    tuple_probability_raw(law, a.as_slice(), tuple)
}

pub(crate) fn tuple_probability_raw(law: Law, a: &[f64], tuple: &[usize]) -> f64 {
    let m = tuple.len();
    match law {
        Law::WithReplacement => tuple.iter().map(|&i| a[i]).product(),
        Law::WithoutReplacement => {
            if m > a.len() || has_repeats(tuple) {
                0.0
            } else {
                let total: f64 = tuple.iter().map(|&i| a[i]).sum();
                total / m as f64 * falling_ratio(a.len(), m)
            }
        }
    }
}

/// Draws index tuples of a fixed size from one weight vector.
#[derive(Debug, Clone)]
pub struct TupleSampler {
    law: Law,
    m: usize,
    n: usize,
    weighted: Option<WeightedIndex<f64>>,
}

impl TupleSampler {
    pub fn new(law: Law, a: &ProbVector, m: usize) -> Result<Self> {
        let n = a.len();
        if m == 0 || (law == Law::WithoutReplacement && m > n) {
            return Err(Error::InvalidParameter(format!("cannot draw {m}-tuples from {n} indices")));
        }
        let weighted = if a.is_uniform() {
            None
        } else {
            Some(WeightedIndex::new(a.as_slice()).map_err(|e| Error::InvalidWeights(e.to_string()))?)
        };
        Ok(Self { law, m, n, weighted })
    }

    fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.weighted {
            Some(w) => w.sample(rng),
            None => rng.random_range(0..self.n),
        }
    }

    /// Without replacement: a uniform slot receives an index drawn from `a`, the
    /// other slots a uniformly random arrangement of distinct remaining indices.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        match self.law {
            Law::WithReplacement => (0..self.m).map(|_| self.draw_index(rng)).collect(),
            Law::WithoutReplacement => {
                let slot = rng.random_range(0..self.m);
                let special = self.draw_index(rng);
                let rest = rand::seq::index::sample(rng, self.n - 1, self.m - 1);
                let mut out = Vec::with_capacity(self.m);
                let mut it = rest.into_iter().map(|i| if i >= special { i + 1 } else { i });
                for s in 0..self.m {
                    if s == slot {
                        out.push(special);
                    } else {
                        out.push(it.next().expect("m - 1 remaining indices"));
                    }
                }
                out
            }
        }
    }
}

pub fn sample_tuple<R: Rng + ?Sized>(law: Law, a: &ProbVector, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    Ok(TupleSampler::new(law, a, m)?.sample(rng))
}

/// All ordered tuples with positive probability, in lexicographic order.
pub fn ordered_support(law: Law, a: &ProbVector, m: usize) -> Vec<(Vec<usize>, f64)> {
    let n = a.len();
    let mut out = Vec::new();
    let mut t = vec![0usize; m];
    loop {
        let p = tuple_probability_raw(law, a.as_slice(), &t);
        if p > 0.0 {
            out.push((t.clone(), p));
        }
        let mut pos = m;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            t[pos] += 1;
            if t[pos] < n {
                break;
            }
            t[pos] = 0;
        }
    }
}

/// Nondecreasing (with replacement) or increasing (without) tuples, each
/// carrying the total probability of its orderings.
pub(crate) fn canonical_support(law: Law, a: &[f64], m: usize) -> Vec<(Vec<usize>, f64)> {
    let n = a.len();
    let mut out = Vec::new();
    let strict = law == Law::WithoutReplacement;
    let mut t: Vec<usize> = if strict { (0..m).collect() } else { vec![0; m] };
    if strict && m > n {
        return out;
    }
    loop {
        let p = tuple_probability_raw(law, a, &t) * orderings(&t);
        if p > 0.0 {
            out.push((t.clone(), p));
        }
        // advance to the next combination
        let mut pos = m;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            let limit = if strict { n - (m - pos) } else { n - 1 };
            if t[pos] < limit {
                t[pos] += 1;
                for q in pos + 1..m {
                    t[q] = if strict { t[q - 1] + 1 } else { t[q - 1] };
                }
                break;
            }
        }
    }
}

/// Number of distinct orderings of a sorted tuple (a multinomial coefficient).
fn orderings(sorted: &[usize]) -> f64 {
    let mut r = 1.0;
    let mut run = 0;
    for (k, w) in sorted.iter().enumerate() {
        if k > 0 && sorted[k - 1] == *w {
            run += 1;
        } else {
            run = 1;
        }
        r *= (k + 1) as f64 / run as f64;
    }
    r
}

/// Number of canonical tuples enumerated by [`canonical_support`].
pub(crate) fn canonical_count(law: Law, n: usize, m: usize) -> f64 {
    let (top, k) = match law {
        Law::WithReplacement => (n + m - 1, m),
        Law::WithoutReplacement => (n, m),
    };
    if k > top {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (top - i) as f64 / (i + 1) as f64)
}
