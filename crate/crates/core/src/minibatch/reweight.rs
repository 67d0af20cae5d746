use super::spec::Reweight;
use crate::types::ProbVector;

/// `w^U(a, I)`: uniform weights `1/m`.
pub fn reweight_uniform(_a: &ProbVector, tuple: &[usize]) -> ProbVector {
    ProbVector::uniform(tuple.len())
}

/// `w^W(a, I)`: `a_I / sum(a_I)`, or uniform when `a_I` has no mass.
pub fn reweight_normalized(a: &ProbVector, tuple: &[usize]) -> ProbVector {
    ProbVector::from_raw(normalized_raw(a.as_slice(), tuple))
}

pub fn reweight(kind: Reweight, a: &ProbVector, tuple: &[usize]) -> ProbVector {
    ProbVector::from_raw(reweight_raw(kind, a.as_slice(), tuple))
}

pub(crate) fn reweight_raw(kind: Reweight, a: &[f64], tuple: &[usize]) -> Vec<f64> {
    match kind {
        Reweight::Uniform => vec![1.0 / tuple.len() as f64; tuple.len()],
        Reweight::Normalized => normalized_raw(a, tuple),
    }
}

fn normalized_raw(a: &[f64], tuple: &[usize]) -> Vec<f64> {
    let total: f64 = tuple.iter().map(|&i| a[i]).sum();
    if total > 0.0 {
        tuple.iter().map(|&i| a[i] / total).collect()
    } else {
        vec![1.0 / tuple.len() as f64; tuple.len()]
    }
}
