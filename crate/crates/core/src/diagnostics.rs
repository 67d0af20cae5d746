//! Local mean conditions, marginal errors, sparsity audits and the
//! deviation-bound harness.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::minibatch::{eval_batch, LiftedPlan, MinibatchSpec, PairDraws, Problem};
use crate::numeric::{log_log_slope, mean, quantile, tree_sum};
use crate::rng::Streams;
use crate::types::{PointCloud, ProbVector};

/// Which local average a [`LocCondition`] bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocKind {
    Arithmetic,
    Geometric,
}

/// `max_I mean(a_I) <= D / n^gamma` (or the geometric mean) over `m`-subsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocCondition {
    pub kind: LocKind,
    pub m: usize,
    pub gamma: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocCheck {
    pub holds: bool,
    /// The subset attaining the maximum (indices of the `m` largest weights).
    pub witness: Vec<usize>,
    pub statistic: f64,
    pub threshold: f64,
}

/// Local average of the entries of `a` at `subset` for the given kind.
pub fn local_average(kind: LocKind, a: &ProbVector, subset: &[usize]) -> f64 {
    let m = subset.len() as f64;
    match kind {
        LocKind::Arithmetic => subset.iter().map(|&i| a[i]).sum::<f64>() / m,
        LocKind::Geometric => {
            if subset.iter().any(|&i| a[i] == 0.0) {
                0.0
            } else {
                (subset.iter().map(|&i| a[i].ln()).sum::<f64>() / m).exp()
            }
        }
    }
}

/// Both averages are monotone in every entry, so the `m` largest weights
/// maximize them.
pub fn check_loc(a: &ProbVector, cond: LocCondition) -> Result<LocCheck> {
    let n = a.len();
    if cond.m == 0 || cond.m > n {
        return Err(Error::InvalidParameter(format!("need 1 <= m <= n, got m = {}, n = {n}", cond.m)));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]).then(i.cmp(&j)));
    let mut witness = order[..cond.m].to_vec();
    witness.sort_unstable();
    let statistic = local_average(cond.kind, a, &witness);
    let threshold = cond.d / (n as f64).powf(cond.gamma);
    Ok(LocCheck { holds: statistic <= threshold * (1.0 + 1e-12), witness, statistic, threshold })
}

/// Distances between the marginals of a lifted plan and `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalError {
    pub row_l1: f64,
    pub col_l1: f64,
    /// `max_i |P_(i) 1 - a_i|`.
    pub row_max: f64,
}

pub fn marginal_error(plan: &LiftedPlan, a: &ProbVector, b: &ProbVector) -> Result<MarginalError> {
    let (r, c) = plan.plan.shape();
    if r != a.len() || c != b.len() {
        return Err(Error::ShapeMismatch(format!("{r}x{c} plan against marginals of length {} and {}", a.len(), b.len())));
    }
    let rows = plan.plan.row_sums();
    let cols = plan.plan.col_sums();
    Ok(marginal_error_from_sums(&rows, &cols, a.as_slice(), b.as_slice()))
}

pub fn marginal_error_from_sums(rows: &[f64], cols: &[f64], a: &[f64], b: &[f64]) -> MarginalError {
    let rd: Vec<f64> = rows.iter().zip(a).map(|(s, w)| (s - w).abs()).collect();
    let cd: Vec<f64> = cols.iter().zip(b).map(|(s, w)| (s - w).abs()).collect();
    MarginalError { row_l1: tree_sum(&rd), col_l1: tree_sum(&cd), row_max: rd.iter().copied().fold(0.0, f64::max) }
}

/// The per-row deviation bound `sqrt(2 log(2/delta) / k)`.
pub fn row_deviation_bound(k: usize, delta: f64) -> f64 {
    (2.0 * (2.0 / delta).ln() / k as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityAudit {
    pub nnz: usize,
    /// `k (2m - 1)`.
    pub bound: usize,
    /// `1 - nnz / (n1 n2)`.
    pub share: f64,
}

pub fn sparsity_audit(plan: &LiftedPlan, m: usize, k: usize) -> SparsityAudit {
    let nnz = plan.plan.nnz();
    let (r, c) = plan.plan.shape();
    SparsityAudit { nnz, bound: k * (2 * m - 1), share: 1.0 - nnz as f64 / (r as f64 * c as f64) }
}

/// Data distribution for deviation experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataDistribution {
    /// Uniform on `[0,1]^d` (bounded case).
    UniformCube { d: usize },
    /// Standard isotropic Gaussian in `R^d` (sub-Gaussian case).
    Gaussian { d: usize },
}

impl DataDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> PointCloud {
        let (d, coords): (usize, Vec<f64>) = match *self {
            DataDistribution::UniformCube { d } => (d, (0..n * d).map(|_| rng.random::<f64>()).collect()),
            DataDistribution::Gaussian { d } => (d, (0..n * d).map(|_| StandardNormal.sample(rng)).collect()),
        };
        PointCloud::from_flat(d, coords).expect("n, d >= 1")
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, DataDistribution::UniformCube { .. })
    }
}

#[derive(Debug, Clone)]
pub struct DeviationConfig {
    pub distribution: DataDistribution,
    /// Kernel, batch size, law and reweighting; `k` and `seed` are ignored.
    pub spec: MinibatchSpec,
    pub n_grid: Vec<usize>,
    pub k_grid: Vec<usize>,
    pub repetitions: usize,
    pub delta: f64,
    /// The reference run uses `k_ref_factor * max(k_grid)` batches.
    pub k_ref_factor: usize,
    pub seed: u64,
}

/// Deviation statistics of one `(n, k)` grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationCell {
    pub n: usize,
    pub k: usize,
    pub deviations: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    /// Empirical `(1 - delta)` quantile.
    pub upper: f64,
    pub reference: f64,
    pub reference_std_error: f64,
    /// `M (2 sqrt(2 (m/n) log(2/delta)) + sqrt(2 log(2/delta)/k))`, bounded data only.
    pub bound: Option<f64>,
    /// Fraction of repetitions with deviation below the bound.
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub cells: Vec<DeviationCell>,
    /// Fitted log-log slope of the mean deviation against `n`, per `k`.
    pub n_slopes: Vec<(usize, f64)>,
    /// Fitted log-log slope of the mean deviation against `k`, per `n`.
    pub k_slopes: Vec<(usize, f64)>,
}

/// Deviation bound for uniform weights and bounded data with cost bound `big_m`.
pub fn uniform_deviation_bound(big_m: f64, m: usize, n: usize, k: usize, delta: f64) -> f64 {
    let l = (2.0 / delta).ln();
    big_m * (2.0 * (2.0 * m as f64 / n as f64 * l).sqrt() + (2.0 * l / k as f64).sqrt())
}

fn max_cost(x: &PointCloud, y: &PointCloud, p: f64) -> f64 {
    let mut best = 0.0f64;
    for xi in x.iter() {
        for yj in y.iter() {
            best = best.max(crate::ot::ground_cost(xi, yj, p));
        }
    }
    best
}

/// Measures `|h_k - E h|` over repetitions, with `E h` replaced by a long
/// reference run on the same data.
///
/// Repetition `r` draws `max(k_grid)` batch pairs on its own substream and the
/// estimate at each `k` uses the first `k` of them.
pub fn deviation_experiment(cfg: &DeviationConfig) -> Result<DeviationReport> {
    if cfg.n_grid.is_empty() || cfg.k_grid.is_empty() || cfg.repetitions == 0 || cfg.k_ref_factor == 0 {
        return Err(Error::InvalidParameter("deviation grids and repetitions must be nonempty".into()));
    }
    if cfg.k_grid.contains(&0) || !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidParameter("k must be >= 1 and delta in (0, 1)".into()));
    }
    let k_max = *cfg.k_grid.iter().max().expect("nonempty");
    let data_streams = Streams::new(cfg.seed, "deviation-data", 0);
    let mut cells = Vec::new();

    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        cfg.spec.validate(n, n)?;
        let mut rng = data_streams.get(ni as u64);
        let x = cfg.distribution.sample(n, &mut rng);
        let y = cfg.distribution.sample(n, &mut rng);
        let u = ProbVector::uniform(n);
        let prob = Problem { a: u.as_slice(), b: u.as_slice(), x: &x, y: &y };

        let ref_spec = cfg.spec.clone().with_k(cfg.k_ref_factor * k_max).with_seed(cfg.seed ^ 0x5eed_0000 ^ n as u64);
        let reference = crate::minibatch::incomplete_loss(&ref_spec, &u, &u, &x, &y)?;

        let per_rep: Vec<Vec<f64>> = (0..cfg.repetitions)
            .into_par_iter()
            .map(|r| {
                let spec = cfg.spec.clone().with_seed(Streams::new(cfg.seed, "deviation-rep", n as u64).get(r as u64).random());
                let draws = PairDraws::new(&spec, &u, &u, 0).expect("validated spec");
                (0..k_max)
                    .map(|t| {
                        let (i, j) = draws.draw(t);
                        eval_batch(&spec, prob, &i, &j, false).value
                    })
                    .collect()
            })
            .collect();

        let big_m = match cfg.spec.kernel {
            crate::minibatch::Kernel::Wasserstein => max_cost(&x, &y, cfg.spec.p).powf(1.0 / cfg.spec.p),
            _ => max_cost(&x, &y, cfg.spec.p),
        };
        for &k in &cfg.k_grid {
            let deviations: Vec<f64> = per_rep.iter().map(|v| (tree_sum(&v[..k]) / k as f64 - reference.value).abs()).collect();
            let bound = cfg.distribution.is_bounded().then(|| uniform_deviation_bound(big_m, cfg.spec.m, n, k, cfg.delta));
            let coverage = bound.map(|b| deviations.iter().filter(|d| **d <= b).count() as f64 / deviations.len() as f64);
            cells.push(DeviationCell {
                n,
                k,
                mean: mean(&deviations),
                median: quantile(&deviations, 0.5),
                upper: quantile(&deviations, 1.0 - cfg.delta),
                deviations,
                reference: reference.value,
                reference_std_error: reference.std_error,
                bound,
                coverage,
            });
        }
    }

    let slope_over = |key: &dyn Fn(&DeviationCell) -> usize, arg: &dyn Fn(&DeviationCell) -> usize, keys: &[usize]| {
        keys.iter()
            .filter_map(|&kv| {
                let sel: Vec<&DeviationCell> = cells.iter().filter(|c| key(c) == kv).collect();
                (sel.len() >= 2).then(|| {
                    let xs: Vec<f64> = sel.iter().map(|c| arg(c) as f64).collect();
                    let ys: Vec<f64> = sel.iter().map(|c| c.mean).collect();
                    (kv, log_log_slope(&xs, &ys))
                })
            })
            .collect::<Vec<_>>()
    };
    let n_slopes = slope_over(&|c| c.k, &|c| c.n, &cfg.k_grid);
    let k_slopes = slope_over(&|c| c.n, &|c| c.k, &cfg.n_grid);
    Ok(DeviationReport { cells, n_slopes, k_slopes })
}
