#![allow(dead_code)]

use mbot::{PointCloud, ProbVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability vector with entries bounded away from zero.
pub fn random_weights(r: &mut impl Rng, n: usize) -> ProbVector {
    ProbVector::normalized((0..n).map(|_| r.random_range(0.1..1.0)).collect()).unwrap()
}

pub fn random_cloud(r: &mut impl Rng, n: usize, d: usize) -> PointCloud {
    PointCloud::from_flat(d, (0..n * d).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn sorted_line(r: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| r.random_range(0.0..10.0)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

pub fn dist_pow(x: &[f64], y: &[f64], p: f64) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt().powf(p)
}

/// Dense cost matrix computed directly from the definition.
pub fn naive_cost(x: &PointCloud, y: &PointCloud, p: f64) -> Vec<Vec<f64>> {
    x.iter().map(|xi| y.iter().map(|yj| dist_pow(xi, yj, p)).collect()).collect()
}

/// Uniform assignment problem by brute force over permutations.
pub fn assignment_value(c: &[Vec<f64>]) -> f64 {
    let n = c.len();
    permutations(n)
        .iter()
        .map(|s| (0..n).map(|i| c[i][s[i]]).sum::<f64>() / n as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Plain multiplicative Sinkhorn: returns the plan for the entropic problem
/// with reference measure `a (x) b`.
pub fn naive_sinkhorn(a: &[f64], b: &[f64], c: &[Vec<f64>], eps: f64, iters: usize) -> Vec<Vec<f64>> {
    let (n, m) = (a.len(), b.len());
    let k: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|j| a[i] * b[j] * (-c[i][j] / eps).exp()).collect()).collect();
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; m];
    for _ in 0..iters {
        for i in 0..n {
            u[i] = a[i] / (0..m).map(|j| k[i][j] * v[j]).sum::<f64>();
        }
        for j in 0..m {
            v[j] = b[j] / (0..n).map(|i| k[i][j] * u[i]).sum::<f64>();
        }
    }
    (0..n).map(|i| (0..m).map(|j| u[i] * k[i][j] * v[j]).collect()).collect()
}

/// `<P, C> + eps KL(P | a (x) b)`.
pub fn entropic_objective(p: &[Vec<f64>], a: &[f64], b: &[f64], c: &[Vec<f64>], eps: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            let v = p[i][j];
            if v > 0.0 {
                s += v * c[i][j] + eps * (v * (v / (a[i] * b[j])).ln() - v + a[i] * b[j]);
            } else {
                s += eps * a[i] * b[j];
            }
        }
    }
    s
}

/// Projects a positive matrix onto the couplings of `(a, b)` by iterative proportional fitting.
pub fn ipf(mut p: Vec<Vec<f64>>, a: &[f64], b: &[f64], iters: usize) -> Vec<Vec<f64>> {
    for _ in 0..iters {
        for (row, ai) in p.iter_mut().zip(a) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v *= ai / s);
        }
        for (j, bj) in b.iter().enumerate() {
            let s: f64 = p.iter().map(|r| r[j]).sum();
            p.iter_mut().for_each(|r| r[j] *= bj / s);
        }
    }
    p
}

/// The GW objective `sum |C1_ik - C2_jl|^p P_ij P_kl` by direct quadruple sum.
pub fn gw_objective(c1: &[Vec<f64>], c2: &[Vec<f64>], plan: &[Vec<f64>], p: f64) -> f64 {
    let (n1, n2) = (c1.len(), c2.len());
    let mut s = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            for k in 0..n1 {
                for l in 0..n2 {
                    s += (c1[i][k] - c2[j][l]).abs().powf(p) * plan[i][j] * plan[k][l];
                }
            }
        }
    }
    s
}

pub fn to_rows(a: &ndarray::Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

pub fn assert_matrix_close(a: &ndarray::Array2<f64>, b: &ndarray::Array2<f64>, tol: f64) {
    assert_eq!(a.dim(), b.dim());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}
