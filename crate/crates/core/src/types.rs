//! Domain types shared by every solver: probability vectors, point clouds,
//! cost matrices and transport plans.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::numeric::tree_sum;

/// Tolerance on the total mass of a [`ProbVector`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// An element of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates nonnegativity and unit mass.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeights(format!("entry {w} is negative or not finite")));
        }
        let total = tree_sum(&weights);
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidWeights(format!("entries sum to {total}, expected 1")));
        }
        Ok(Self(weights))
    }

    /// Rescales nonnegative weights to unit mass.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeights(format!("entry {w} is negative or not finite")));
        }
        let total = tree_sum(&weights);
        if total <= 0.0 {
            return Err(Error::InvalidWeights("total mass is zero".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform vector needs at least one entry");
        Self(vec![1.0 / n as f64; n])
    }

    /// Wraps weights produced internally (already on the simplex up to rounding).
    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|w| *w >= 0.0));
        Self(weights)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.0.len() as f64;
        self.0.iter().all(|w| (w - u).abs() <= 1e-15)
    }

    /// Entries reordered by `perm` (entry `k` of the result is `self[perm[k]]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&i| self.0[i]).collect())
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `n` points of a common dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if points.is_empty() || dim == 0 {
            return Err(Error::InvalidParameter("point cloud needs n >= 1 points of dimension d >= 1".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch(dim, p.len()));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { dim, coords })
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates cannot be split into points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(Self { dim, coords })
    }

    /// Points on the real line.
    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        Self::from_flat(1, xs.to_vec())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// The sub-cloud `X(I)`; repeated indices give repeated points.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud { dim: self.dim, coords }
    }

    /// Applies `x -> R x + t` to every point; `rotation` is row-major `d x d`.
    pub fn affine(&self, rotation: &[f64], translation: &[f64]) -> PointCloud {
        let d = self.dim;
        assert_eq!(rotation.len(), d * d);
        assert_eq!(translation.len(), d);
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.iter() {
            for r in 0..d {
                let row = &rotation[r * d..(r + 1) * d];
                coords.push(row.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + translation[r]);
            }
        }
        PointCloud { dim: d, coords }
    }

    pub fn translated(&self, t: &[f64]) -> PointCloud {
        assert_eq!(t.len(), self.dim);
        let mut out = self.clone();
        for p in out.coords.chunks_exact_mut(self.dim) {
            for (x, dx) in p.iter_mut().zip(t) {
                *x += dx;
            }
        }
        out
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for p in self.iter() {
            for (acc, x) in m.iter_mut().zip(p) {
                *acc += x;
            }
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Mean squared distance to the centroid.
    pub fn second_moment(&self) -> f64 {
        let mu = self.mean();
        let total: f64 = self
            .iter()
            .map(|p| p.iter().zip(&mu).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
            .sum();
        total / self.len() as f64
    }
}

/// A matrix of pairwise costs `|x_i - y_j|^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Array2<f64>,
    power: f64,
}

impl CostMatrix {
    /// Wraps a user-supplied matrix; entries must be finite and nonnegative.
    pub fn new(entries: Array2<f64>, power: f64) -> Result<Self> {
        if entries.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidCost("entries must be finite and nonnegative".into()));
        }
        if !(power >= 1.0) {
            return Err(Error::InvalidParameter(format!("cost exponent {power} < 1")));
        }
        Ok(Self { entries, power })
    }

    pub(crate) fn from_parts(entries: Array2<f64>, power: f64) -> Self {
        Self { entries, power }
    }

    pub fn from_rows(rows: &[&[f64]], power: f64) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let flat: Vec<f64> = rows.iter().flat_map(|row| row.iter().copied()).collect();
        if flat.len() != r * c {
            return Err(Error::ShapeMismatch("ragged cost rows".into()));
        }
        let entries = Array2::from_shape_vec((r, c), flat).map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Self::new(entries, power)
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.dim()
    }

    pub fn is_square_symmetric_zero_diag(&self) -> bool {
        let (r, c) = self.shape();
        if r != c {
            return false;
        }
        (0..r).all(|i| self.entries[[i, i]] == 0.0 && (0..i).all(|j| self.entries[[i, j]] == self.entries[[j, i]]))
    }

    /// Median entry, used to scale entropic regularization.
    pub fn median(&self) -> f64 {
        let mut v: Vec<f64> = self.entries.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }
}

/// Storage of a transport plan.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanStorage {
    Dense(Array2<f64>),
    /// `(row, col, mass)` triplets sorted by `(row, col)` with no duplicates.
    Sparse(Vec<(usize, usize, f64)>),
}

/// A nonnegative matrix together with the marginals it is meant to couple.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    storage: PlanStorage,
    row_marginal: ProbVector,
    col_marginal: ProbVector,
}

impl TransportPlan {
    pub fn dense(matrix: Array2<f64>, row_marginal: ProbVector, col_marginal: ProbVector) -> Self {
        let (rows, cols) = matrix.dim();
        debug_assert_eq!(rows, row_marginal.len());
        debug_assert_eq!(cols, col_marginal.len());
        Self { rows, cols, storage: PlanStorage::Dense(matrix), row_marginal, col_marginal }
    }

    /// Builds sparse storage; triplets are sorted and duplicates summed.
    pub fn sparse(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
        row_marginal: ProbVector,
        col_marginal: ProbVector,
    ) -> Self {
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        Self { rows, cols, storage: PlanStorage::Sparse(merged), row_marginal, col_marginal }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn storage(&self) -> &PlanStorage {
        &self.storage
    }

    pub fn row_marginal(&self) -> &ProbVector {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &ProbVector {
        &self.col_marginal
    }

    /// Nonzero `(row, col, mass)` entries in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        match &self.storage {
            PlanStorage::Dense(m) => m
                .indexed_iter()
                .filter(|(_, v)| **v != 0.0)
                .map(|((i, j), v)| (i, j, *v))
                .collect(),
            PlanStorage::Sparse(t) => t.iter().filter(|e| e.2 != 0.0).copied().collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            PlanStorage::Dense(m) => m.iter().filter(|v| **v != 0.0).count(),
            PlanStorage::Sparse(t) => t.iter().filter(|e| e.2 != 0.0).count(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            PlanStorage::Dense(m) => m[[i, j]],
            PlanStorage::Sparse(t) => t
                .binary_search_by(|e| (e.0, e.1).cmp(&(i, j)))
                .map(|k| t[k].2)
                .unwrap_or(0.0),
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match &self.storage {
            PlanStorage::Dense(m) => m.clone(),
            PlanStorage::Sparse(t) => {
                let mut m = Array2::zeros((self.rows, self.cols));
                for &(i, j, v) in t {
                    m[[i, j]] += v;
                }
                m
            }
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.rows];
        for (i, _, v) in self.entries() {
            s[i] += v;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for (_, j, v) in self.entries() {
            s[j] += v;
        }
        s
    }

    pub fn total_mass(&self) -> f64 {
        let e: Vec<f64> = self.entries().into_iter().map(|e| e.2).collect();
        tree_sum(&e)
    }

    /// Largest absolute deviation of the row and column sums from the marginals.
    pub fn marginal_violation(&self) -> f64 {
        let r = self.row_sums().iter().zip(self.row_marginal.as_slice()).map(|(s, a)| (s - a).abs()).fold(0.0, f64::max);
        let c = self.col_sums().iter().zip(self.col_marginal.as_slice()).map(|(s, b)| (s - b).abs()).fold(0.0, f64::max);
        r.max(c)
    }

    /// Frobenius inner product with a cost matrix of the same shape.
    pub fn cost(&self, c: &Array2<f64>) -> f64 {
        let terms: Vec<f64> = self.entries().into_iter().map(|(i, j, v)| v * c[[i, j]]).collect();
        tree_sum(&terms)
    }
}

/// Output of a kernel solve.
#[derive(Debug, Clone)]
pub struct KernelResult {
    pub value: f64,
    pub plan: Option<TransportPlan>,
    pub iterations: usize,
    pub converged: bool,
}
