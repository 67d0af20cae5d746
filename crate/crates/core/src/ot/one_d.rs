use crate::error::{Error, Result};
use crate::numeric::tree_sum;
use crate::types::{KernelResult, ProbVector, TransportPlan};

fn is_sorted(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

/// `W_p^p` between two measures on the line via the monotone (quantile) coupling.
///
/// For uniform weights of equal length this is `(1/n) sum |x_i - y_i|^p` with
/// plan `I / n`.
pub fn wasserstein_1d(a: &ProbVector, b: &ProbVector, x: &[f64], y: &[f64], p: f64) -> Result<KernelResult> {
    if a.len() != x.len() || b.len() != y.len() {
        return Err(Error::ShapeMismatch("weights and supports differ in length".into()));
    }
    if !is_sorted(x) || !is_sorted(y) {
        return Err(Error::Unsorted);
    }
    let entries = quantile_coupling(a.as_slice(), b.as_slice());
    let terms: Vec<f64> = entries.iter().map(|&(i, j, v)| v * (x[i] - y[j]).abs().powf(p)).collect();
    let plan = TransportPlan::sparse(x.len(), y.len(), entries, a.clone(), b.clone());
    Ok(KernelResult { value: tree_sum(&terms), plan: Some(plan), iterations: 0, converged: true })
}

/// North-west corner rule on sorted supports.
pub(crate) fn quantile_coupling(a: &[f64], b: &[f64]) -> Vec<(usize, usize, f64)> {
    if a.len() == b.len() && a == b {
        return a.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(i, v)| (i, i, *v)).collect();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0], b[0]);
    loop {
        let m = ra.min(rb);
        if m > 0.0 {
            out.push((i, j, m));
        }
        ra -= m;
        rb -= m;
        if ra <= rb {
            i += 1;
            if i == a.len() {
                break;
            }
            ra = a[i];
            if rb <= 0.0 {
                j += 1;
                if j == b.len() {
                    break;
                }
                rb = b[j];
            }
        } else {
            j += 1;
            if j == b.len() {
                break;
            }
            rb = b[j];
        }
    }
    out
}
