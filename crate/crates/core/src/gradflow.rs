//! Plan-based subgradients of minibatch losses and the Euler gradient flow.

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::minibatch::{check_inputs, reweight_raw, Kernel, MinibatchSpec, PairDraws};
use crate::numeric::tree_sum;
use crate::ot::{batch_cost, exact_raw, gw_raw, sinkhorn_raw};
use crate::rng::Streams;
use crate::types::{PointCloud, ProbVector};

/// Gradient of `|x - y|^p` with respect to `y`; the zero selection at `x = y` when `p <= 1`.
fn cost_grad_y(x: &[f64], y: &[f64], p: f64, out: &mut [f64], scale: f64) {
    if p == 2.0 {
        for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
            *o += scale * 2.0 * (yi - xi);
        }
        return;
    }
    let dist = crate::ot::sq_dist(x, y).sqrt();
    if dist == 0.0 {
        return;
    }
    let f = scale * p * dist.powf(p - 2.0);
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o += f * (yi - xi);
    }
}

/// Loss value and gradients with respect to both point clouds.
#[derive(Debug, Clone)]
pub struct LossGrad {
    pub value: f64,
    /// `n_a x d`, row-major like [`PointCloud`].
    pub grad_x: Vec<f64>,
    /// `n_b x d`.
    pub grad_y: Vec<f64>,
}

/// Gradient contributions of one batch, in batch-local rows.
struct BatchGrad {
    value: f64,
    gx: Vec<f64>,
    gy: Vec<f64>,
}

fn transport_grads(x: &PointCloud, i: &[usize], y: &PointCloud, j: &[usize], plan: &[(usize, usize, f64)], p: f64, scale: f64, gx: &mut [f64], gy: &mut [f64]) {
    let d = x.dim();
    for &(r, s, v) in plan {
        let (xp, yp) = (x.point(i[r]), y.point(j[s]));
        cost_grad_y(xp, yp, p, &mut gy[s * d..(s + 1) * d], scale * v);
        cost_grad_y(yp, xp, p, &mut gx[r * d..(r + 1) * d], scale * v);
    }
}

fn dense(plan: &Array2<f64>) -> Vec<(usize, usize, f64)> {
    plan.indexed_iter().filter(|(_, v)| **v != 0.0).map(|((i, j), v)| (i, j, *v)).collect()
}

fn batch_grad(spec: &MinibatchSpec, a: &[f64], b: &[f64], x: &PointCloud, y: &PointCloud, i: &[usize], j: &[usize]) -> BatchGrad {
    let d = x.dim();
    let m = i.len();
    let wa = reweight_raw(spec.reweight, a, i);
    let wb = reweight_raw(spec.reweight, b, j);
    let p = spec.p;
    let mut gx = vec![0.0; m * d];
    let mut gy = vec![0.0; j.len() * y.dim()];
    let value = match spec.kernel {
        Kernel::Wasserstein | Kernel::WassersteinPow => {
            let c = batch_cost(x, i, y, j, p);
            let (v, plan, _) = exact_raw(&wa, &wb, &c);
            if spec.kernel == Kernel::WassersteinPow {
                transport_grads(x, i, y, j, &plan, p, 1.0, &mut gx, &mut gy);
                v
            } else {
                let root = v.max(0.0).powf(1.0 / p);
                if v > 0.0 {
                    transport_grads(x, i, y, j, &plan, p, root / (p * v), &mut gx, &mut gy);
                }
                root
            }
        }
        Kernel::Entropic => {
            let c = batch_cost(x, i, y, j, p);
            let s = sinkhorn_raw(&wa, &wb, &c, spec.eps);
            transport_grads(x, i, y, j, &dense(&s.plan), p, 1.0, &mut gx, &mut gy);
            s.value
        }
        Kernel::Sinkhorn => {
            let xy = sinkhorn_raw(&wa, &wb, &batch_cost(x, i, y, j, p), spec.eps);
            let xx = sinkhorn_raw(&wa, &wa, &batch_cost(x, i, x, i, p), spec.eps);
            let yy = sinkhorn_raw(&wb, &wb, &batch_cost(y, j, y, j, p), spec.eps);
            transport_grads(x, i, y, j, &dense(&xy.plan), p, 1.0, &mut gx, &mut gy);
            let mut g2 = vec![0.0; m * d];
            transport_grads(x, i, x, i, &dense(&xx.plan), p, -0.5, &mut gx, &mut g2);
            gx.iter_mut().zip(&g2).for_each(|(u, v)| *u += v);
            let mut h2 = vec![0.0; gy.len()];
            transport_grads(y, j, y, j, &dense(&yy.plan), p, -0.5, &mut gy, &mut h2);
            gy.iter_mut().zip(&h2).for_each(|(u, v)| *u += v);
            xy.value - 0.5 * (xx.value + yy.value)
        }
        Kernel::GromovWasserstein => {
            let c1 = batch_cost(x, i, x, i, p);
            let c2 = batch_cost(y, j, y, j, p);
            let g = gw_raw(&wa, &wb, &c1, &c2, p);
            gw_grads(x, i, y, j, &c1, &c2, &g.plan, p, &mut gx, &mut gy);
            g.value
        }
    };
    BatchGrad { value, gx, gy }
}

/// Danskin gradient of `sum L(C1_kk', C2_ll') P_kl P_k'l'` at the returned plan.
#[allow(clippy::too_many_arguments)]
fn gw_grads(x: &PointCloud, i: &[usize], y: &PointCloud, j: &[usize], c1: &Array2<f64>, c2: &Array2<f64>, plan: &Array2<f64>, p: f64, gx: &mut [f64], gy: &mut [f64]) {
    let (m1, m2) = plan.dim();
    let r = plan.sum_axis(ndarray::Axis(1));
    let s = plan.sum_axis(ndarray::Axis(0));
    // dE/dC1_kk' = sum_{l,l'} L'(C1_kk' - C2_ll') P_kl P_k'l', and symmetrically for C2.
    let dl = |u: f64| if u == 0.0 { 0.0 } else { p * u.abs().powf(p - 1.0) * u.signum() };
    let mut d1 = Array2::<f64>::zeros((m1, m1));
    let mut d2 = Array2::<f64>::zeros((m2, m2));
    if p == 2.0 {
        // L' = 2 (C1 - C2): expand to avoid the quartic loop.
        let pc2pt = plan.dot(c2).dot(&plan.t());
        let ptc1p = plan.t().dot(c1).dot(plan);
        for k in 0..m1 {
            for q in 0..m1 {
                d1[[k, q]] = 2.0 * (c1[[k, q]] * r[k] * r[q] - pc2pt[[k, q]]);
            }
        }
        for l in 0..m2 {
            for q in 0..m2 {
                d2[[l, q]] = -2.0 * (ptc1p[[l, q]] - c2[[l, q]] * s[l] * s[q]);
            }
        }
    } else {
        for k in 0..m1 {
            for k2 in 0..m1 {
                for l in 0..m2 {
                    for l2 in 0..m2 {
                        let w = plan[[k, l]] * plan[[k2, l2]];
                        if w == 0.0 {
                            continue;
                        }
                        let g = dl(c1[[k, k2]] - c2[[l, l2]]) * w;
                        d1[[k, k2]] += g;
                        d2[[l, l2]] -= g;
                    }
                }
            }
        }
    }
    let d = x.dim();
    for k in 0..m1 {
        for q in 0..m1 {
            let w = d1[[k, q]];
            if w != 0.0 && k != q {
                // C1_kq depends on x_k (first argument) and x_q (second).
                cost_grad_y(x.point(i[q]), x.point(i[k]), p, &mut gx[k * d..(k + 1) * d], w);
                cost_grad_y(x.point(i[k]), x.point(i[q]), p, &mut gx[q * d..(q + 1) * d], w);
            }
        }
    }
    let e = y.dim();
    for l in 0..m2 {
        for q in 0..m2 {
            let w = d2[[l, q]];
            if w != 0.0 && l != q {
                cost_grad_y(y.point(j[q]), y.point(j[l]), p, &mut gy[l * e..(l + 1) * e], w);
                cost_grad_y(y.point(j[l]), y.point(j[q]), p, &mut gy[q * e..(q + 1) * e], w);
            }
        }
    }
}

/// Incomplete loss of one term and its gradients, on the term's substream.
fn term_grad(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, x: &PointCloud, y: &PointCloud, term: u64) -> Result<LossGrad> {
    let draws = PairDraws::new(spec, a, b, term)?;
    let k = spec.k;
    let results: Vec<(Vec<usize>, Vec<usize>, BatchGrad)> = (0..k)
        .into_par_iter()
        .map(|t| {
            let (i, j) = draws.draw(t);
            let g = batch_grad(spec, a.as_slice(), b.as_slice(), x, y, &i, &j);
            (i, j, g)
        })
        .collect();
    let (dx, dy) = (x.dim(), y.dim());
    let mut grad_x = vec![0.0; x.len() * dx];
    let mut grad_y = vec![0.0; y.len() * dy];
    let scale = 1.0 / k as f64;
    let mut values = Vec::with_capacity(k);
    for (i, j, g) in &results {
        values.push(g.value);
        for (r, &ii) in i.iter().enumerate() {
            for c in 0..dx {
                grad_x[ii * dx + c] += scale * g.gx[r * dx + c];
            }
        }
        for (s, &jj) in j.iter().enumerate() {
            for c in 0..dy {
                grad_y[jj * dy + c] += scale * g.gy[s * dy + c];
            }
        }
    }
    Ok(LossGrad { value: tree_sum(&values) / k as f64, grad_x, grad_y })
}

/// Incomplete minibatch loss and a subgradient with respect to both clouds.
///
/// Uses the same batch draws as [`crate::minibatch::incomplete_loss`] (and, when
/// `debiased`, as the incomplete [`crate::minibatch::debiased_loss`]), so the
/// gradient can be checked against finite differences of those values.
pub fn loss_and_grad(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, x: &PointCloud, y: &PointCloud, debiased: bool) -> Result<LossGrad> {
    check_inputs(spec, a, b, x, y)?;
    let mut out = term_grad(spec, a, b, x, y, 0)?;
    if debiased {
        let xx = term_grad(spec, a, a, x, x, 1)?;
        let yy = term_grad(spec, b, b, y, y, 2)?;
        out.value -= 0.5 * (xx.value + yy.value);
        for (g, (u, v)) in out.grad_x.iter_mut().zip(xx.grad_x.iter().zip(&xx.grad_y)) {
            *g -= 0.5 * (u + v);
        }
        for (g, (u, v)) in out.grad_y.iter_mut().zip(yy.grad_x.iter().zip(&yy.grad_y)) {
            *g -= 0.5 * (u + v);
        }
    }
    Ok(out)
}

/// Gradient with respect to the target support `Y` (an `n_b x d` matrix).
pub fn loss_grad_wrt_target(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, x: &PointCloud, y: &PointCloud, debiased: bool) -> Result<Array2<f64>> {
    let g = loss_and_grad(spec, a, b, x, y, debiased)?;
    Ok(Array2::from_shape_vec((y.len(), y.dim()), g.grad_y).expect("n x d"))
}

/// Gradient with respect to the source support `X` (an `n_a x d` matrix).
pub fn loss_grad_wrt_source(spec: &MinibatchSpec, a: &ProbVector, b: &ProbVector, x: &PointCloud, y: &PointCloud, debiased: bool) -> Result<Array2<f64>> {
    let g = loss_and_grad(spec, a, b, x, y, debiased)?;
    Ok(Array2::from_shape_vec((x.len(), x.dim()), g.grad_x).expect("n x d"))
}

/// Which loss drives a flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowLoss {
    Raw,
    Debiased,
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub spec: MinibatchSpec,
    pub step: f64,
    pub iterations: usize,
    pub loss: FlowLoss,
    /// Keep every `snapshot_stride`-th iterate (the initial and final ones are always kept).
    pub snapshot_stride: usize,
}

/// Consecutive loss increases that abort a flow.
pub const DIVERGENCE_PATIENCE: usize = 50;

#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    /// `(iteration, cloud)` pairs.
    pub snapshots: Vec<(usize, PointCloud)>,
    /// Minibatch loss estimate at each iteration, before the step.
    pub losses: Vec<f64>,
    pub final_cloud: PointCloud,
}

/// Euler scheme `X_{t+1} = X_t - step * m * grad_X loss(X_t, Y)` with uniform
/// weights and fresh batch draws at every iteration.
pub fn gradient_flow(x0: &PointCloud, y: &PointCloud, cfg: &FlowConfig) -> Result<FlowTrajectory> {
    if !(cfg.step > 0.0) || cfg.iterations == 0 || cfg.snapshot_stride == 0 {
        return Err(Error::InvalidParameter("flow needs step > 0, iterations >= 1 and stride >= 1".into()));
    }
    if x0.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x0.dim(), y.dim()));
    }
    let a = ProbVector::uniform(x0.len());
    let b = ProbVector::uniform(y.len());
    cfg.spec.validate(a.len(), b.len())?;
    let seeds = Streams::new(cfg.spec.seed, "flow-step", 0);
    let rate = cfg.step * cfg.spec.m as f64;

    let mut x = x0.clone();
    let mut snapshots = vec![(0, x.clone())];
    let mut losses = Vec::with_capacity(cfg.iterations);
    let mut increases = 0;
    for t in 0..cfg.iterations {
        let spec = cfg.spec.clone().with_seed(seeds.get(t as u64).random());
        let g = loss_and_grad(&spec, &a, &b, &x, y, cfg.loss == FlowLoss::Debiased)?;
        if !g.value.is_finite() || g.grad_x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite loss or gradient at iteration {t}")));
        }
        if let Some(&prev) = losses.last() {
            increases = if g.value > prev { increases + 1 } else { 0 };
            if increases >= DIVERGENCE_PATIENCE {
                return Err(Error::Numerical(format!(
                    "flow diverging: loss increased {DIVERGENCE_PATIENCE} consecutive steps (iteration {t}, loss {})",
                    g.value
                )));
            }
        }
        losses.push(g.value);
        for (v, gv) in x.as_flat_mut().iter_mut().zip(&g.grad_x) {
            *v -= rate * gv;
        }
        if (t + 1) % cfg.snapshot_stride == 0 || t + 1 == cfg.iterations {
            snapshots.push((t + 1, x.clone()));
        }
    }
    Ok(FlowTrajectory { snapshots, losses, final_cloud: x })
}
