use ndarray::Array2;

use crate::error::{Error, Result};
use crate::types::{CostMatrix, PointCloud};

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `|x - y|^p`; `p = 2` skips the square root so squared costs stay exact.
#[inline]
pub(crate) fn ground_cost(x: &[f64], y: &[f64], p: f64) -> f64 {
    let s = sq_dist(x, y);
    if p == 2.0 {
        s
    } else if p == 1.0 {
        s.sqrt()
    } else {
        s.sqrt().powf(p)
    }
}

/// Pairwise costs `C[i][j] = |x_i - y_j|^p`.
pub fn build_cost_matrix(x: &PointCloud, y: &PointCloud, p: f64) -> Result<CostMatrix> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("cost exponent must be >= 1, got {p}")));
    }
    Ok(CostMatrix::from_parts(cost_entries(x, y, p), p))
}

pub(crate) fn cost_entries(x: &PointCloud, y: &PointCloud, p: f64) -> Array2<f64> {
    let mut c = Array2::zeros((x.len(), y.len()));
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            c[[i, j]] = ground_cost(xi, yj, p);
        }
    }
    c
}

/// Costs between the sub-clouds `X(I)` and `Y(J)` without materializing them.
pub(crate) fn batch_cost(x: &PointCloud, i: &[usize], y: &PointCloud, j: &[usize], p: f64) -> Array2<f64> {
    let mut c = Array2::zeros((i.len(), j.len()));
    for (r, &ii) in i.iter().enumerate() {
        let xi = x.point(ii);
        for (s, &jj) in j.iter().enumerate() {
            c[[r, s]] = ground_cost(xi, y.point(jj), p);
        }
    }
    c
}
