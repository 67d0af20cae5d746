//! Desk-scale experiment suite. Every experiment returns a tidy [`Table`]
//! with one row per grid cell and repetition, and is deterministic given its seed.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::diagnostics::{deviation_experiment, row_deviation_bound, sparsity_audit, DataDistribution, DeviationConfig};
use crate::error::{Error, Result};
use crate::io::Table;
use crate::minibatch::{debiased_loss, incomplete_loss, incomplete_plan, reweight_raw, Kernel, Law, MinibatchSpec, Mode, PairDraws};
use crate::numeric::{log_log_slope, mean, sample_std};
use crate::ot::{build_cost_matrix, solve_gw};
use crate::rng::Streams;
use crate::types::{PointCloud, ProbVector};

pub const EXPERIMENTS: [&str; 6] = ["marginals", "sparsity", "sample-complexity", "positivity", "gw-invariance", "deviation"];

/// `n` points equally spaced on the unit circle, rotated by `theta`.
pub fn circle_points(n: usize, theta: f64) -> PointCloud {
    let coords = (0..n)
        .flat_map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64 + theta;
            [t.cos(), t.sin()]
        })
        .collect();
    PointCloud::from_flat(2, coords).expect("n >= 1")
}

/// A noisy 2D spiral: radius and angle `sqrt(u) * 780 degrees`, plus uniform noise.
pub fn spiral(n: usize, noise: f64, seed: u64) -> PointCloud {
    let mut rng = Streams::new(seed, "spiral", 0).get(0);
    let mut coords = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let t = rng.random::<f64>().sqrt() * 780.0_f64.to_radians();
        coords.push(-t.cos() * t + rng.random::<f64>() * noise);
        coords.push(t.sin() * t + rng.random::<f64>() * noise);
    }
    PointCloud::from_flat(2, coords).expect("n >= 1")
}

/// Two interleaving half circles with Gaussian noise of scale `noise`.
pub fn two_moons(n: usize, noise: f64, seed: u64) -> PointCloud {
    let mut rng = Streams::new(seed, "two-moons", 0).get(0);
    let outer = n.div_ceil(2);
    let mut coords = Vec::with_capacity(2 * n);
    for i in 0..n {
        let (px, py) = if i < outer {
            let t = PI * i as f64 / (outer.max(2) - 1) as f64;
            (t.cos(), t.sin())
        } else {
            let t = PI * (i - outer) as f64 / ((n - outer).max(2) - 1) as f64;
            (1.0 - t.cos(), 0.5 - t.sin())
        };
        let (ex, ey): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        coords.push(px + noise * ex);
        coords.push(py + noise * ey);
    }
    PointCloud::from_flat(2, coords).expect("n >= 1")
}

/// Points at uniformly random angles on a circle of the given center and
/// radius, with Gaussian radial noise of scale `noise`.
pub fn ring(n: usize, center: [f64; 2], radius: f64, noise: f64, seed: u64) -> PointCloud {
    let mut rng = Streams::new(seed, "ring", 0).get(0);
    let mut coords = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let t = 2.0 * PI * rng.random::<f64>();
        let e: f64 = StandardNormal.sample(&mut rng);
        let r = radius + noise * e;
        coords.push(center[0] + r * t.cos());
        coords.push(center[1] + r * t.sin());
    }
    PointCloud::from_flat(2, coords).expect("n >= 1")
}

pub fn rotation_2d(theta: f64) -> [f64; 4] {
    let (s, c) = theta.sin_cos();
    [c, -s, s, c]
}

fn check_nonempty(name: &str, len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::InvalidParameter(format!("{name} grid must be nonempty")));
    }
    Ok(())
}

/// Logarithmically spaced integers from `10^lo` to `10^hi` with `per_decade` steps per decade.
pub fn log_grid(lo: u32, hi: u32, per_decade: usize) -> Vec<usize> {
    let steps = (hi - lo) as usize * per_decade;
    let mut out: Vec<usize> =
        (0..=steps).map(|s| 10f64.powf(lo as f64 + s as f64 / per_decade as f64).round() as usize).collect();
    out.dedup();
    out
}

#[derive(Debug, Clone)]
pub struct MarginalsConfig {
    pub n: usize,
    pub m_grid: Vec<usize>,
    pub k_grid: Vec<usize>,
    pub repetitions: usize,
    pub delta: f64,
    pub seed: u64,
}

impl Default for MarginalsConfig {
    fn default() -> Self {
        Self { n: 1000, m_grid: vec![10, 100], k_grid: log_grid(1, 4, 2), repetitions: 500, delta: 0.05, seed: 42 }
    }
}

/// Marginal error of incomplete plans against `k`, uniform weights, law W.
///
/// Every batch plan has marginals `w(a, I)` and `w(b, J)`, so the lifted
/// plan's marginals are `(1/k) sum_t Q_I^T w(a, I)`; this is accumulated
/// directly from the batch draws used by `incomplete_plan`, without solving
/// the batch problems. Repetition `r` uses the first `k` of `max(k_grid)`
/// draws on its own seed.
///
/// Columns: `m, k, rep, row_l1, col_l1, row_max, bound, within_bound, slope`,
/// where `slope` is the log-log slope of the mean `row_l1 + col_l1` over `k` for that `m`.
pub fn marginals(cfg: &MarginalsConfig) -> Result<Table> {
    check_nonempty("m", cfg.m_grid.len())?;
    check_nonempty("k", cfg.k_grid.len())?;
    check_nonempty("repetition", cfg.repetitions)?;
    if cfg.k_grid.contains(&0) {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let mut k_grid = cfg.k_grid.clone();
    k_grid.sort_unstable();
    k_grid.dedup();
    let k_max = *k_grid.last().expect("nonempty");
    let u = ProbVector::uniform(cfg.n);
    let target = 1.0 / cfg.n as f64;
    let mut table = Table::new(["m", "k", "rep", "row_l1", "col_l1", "row_max", "bound", "within_bound", "slope"]);

    for &m in &cfg.m_grid {
        let base = MinibatchSpec::new(m, Kernel::WassersteinPow).with_law(Law::WithoutReplacement).with_k(k_max);
        base.validate(cfg.n, cfg.n)?;
        let per_rep: Vec<Vec<[f64; 3]>> = (0..cfg.repetitions)
            .into_par_iter()
            .map(|r| {
                let seed = Streams::new(cfg.seed, "marginals-rep", m as u64).get(r as u64).random();
                let spec = base.clone().with_seed(seed);
                let draws = PairDraws::new(&spec, &u, &u, 0).expect("validated spec");
                let mut rows = vec![0.0; cfg.n];
                let mut cols = vec![0.0; cfg.n];
                let mut out = Vec::with_capacity(k_grid.len());
                let mut next = 0;
                for t in 0..k_max {
                    let (i, j) = draws.draw(t);
                    for (&ii, w) in i.iter().zip(reweight_raw(spec.reweight, u.as_slice(), &i)) {
                        rows[ii] += w;
                    }
                    for (&jj, w) in j.iter().zip(reweight_raw(spec.reweight, u.as_slice(), &j)) {
                        cols[jj] += w;
                    }
                    if k_grid[next] == t + 1 {
                        let k = (t + 1) as f64;
                        let dev = |v: &f64| (v / k - target).abs();
                        let row_l1 = rows.iter().map(dev).sum();
                        let col_l1 = cols.iter().map(dev).sum();
                        let row_max = rows.iter().map(dev).fold(0.0, f64::max);
                        out.push([row_l1, col_l1, row_max]);
                        next += 1;
                    }
                }
                out
            })
            .collect();
        let means: Vec<f64> =
            (0..k_grid.len()).map(|c| mean(&per_rep.iter().map(|r| r[c][0] + r[c][1]).collect::<Vec<_>>())).collect();
        let slope = if k_grid.len() >= 2 {
            log_log_slope(&k_grid.iter().map(|&k| k as f64).collect::<Vec<_>>(), &means)
        } else {
            f64::NAN
        };
        for (c, &k) in k_grid.iter().enumerate() {
            let bound = row_deviation_bound(k, cfg.delta);
            for (r, rep) in per_rep.iter().enumerate() {
                let [row_l1, col_l1, row_max] = rep[c];
                table.push([
                    m.to_string(),
                    k.to_string(),
                    r.to_string(),
                    row_l1.to_string(),
                    col_l1.to_string(),
                    row_max.to_string(),
                    bound.to_string(),
                    u8::from(row_max <= bound).to_string(),
                    slope.to_string(),
                ]);
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct SparsityConfig {
    pub m_grid: Vec<usize>,
    /// Batch budget `k m`, held fixed across `m`.
    pub budget: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for SparsityConfig {
    fn default() -> Self {
        Self { m_grid: vec![50, 100, 200, 350, 500], budget: 7000, repetitions: 1, seed: 42 }
    }
}

/// Sparsity of incomplete W_2^2 plans between two clouds with uniform weights,
/// with `k = budget / m`. Columns: `m, k, rep, nnz, bound, share`.
pub fn sparsity(x: &PointCloud, y: &PointCloud, cfg: &SparsityConfig) -> Result<Table> {
    check_nonempty("m", cfg.m_grid.len())?;
    check_nonempty("repetition", cfg.repetitions)?;
    let (a, b) = (ProbVector::uniform(x.len()), ProbVector::uniform(y.len()));
    let mut table = Table::new(["m", "k", "rep", "nnz", "bound", "share"]);
    for &m in &cfg.m_grid {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        let k = (cfg.budget / m).max(1);
        for r in 0..cfg.repetitions {
            let seed = Streams::new(cfg.seed, "sparsity-rep", m as u64).get(r as u64).random();
            let spec = MinibatchSpec::new(m, Kernel::WassersteinPow).with_k(k).with_seed(seed);
            let plan = incomplete_plan(&spec, &a, &b, x, y)?;
            let audit = sparsity_audit(&plan, m, k);
            table.push([m.to_string(), k.to_string(), r.to_string(), audit.nnz.to_string(), audit.bound.to_string(), audit.share.to_string()]);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct SampleComplexityConfig {
    pub d_grid: Vec<usize>,
    pub n_grid: Vec<usize>,
    pub m: usize,
    /// Batches per term are `n / k_divisor`.
    pub k_divisor: usize,
    pub kernel: Kernel,
    pub p: f64,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for SampleComplexityConfig {
    fn default() -> Self {
        Self {
            d_grid: vec![2, 7, 10],
            n_grid: (8..=13).map(|e| 1usize << e).collect(),
            m: 128,
            k_divisor: 4,
            kernel: Kernel::Wasserstein,
            p: 2.0,
            repetitions: 5,
            seed: 42,
        }
    }
}

/// Debiased incomplete loss between two independent uniform samples of
/// `[0,1]^d` as `n` grows. Columns: `d, n, k, rep, lambda, std_error, slope`,
/// where `slope` is the log-log slope of the mean `lambda` over `n` for that `d`.
pub fn sample_complexity(cfg: &SampleComplexityConfig) -> Result<Table> {
    check_nonempty("d", cfg.d_grid.len())?;
    check_nonempty("n", cfg.n_grid.len())?;
    check_nonempty("repetition", cfg.repetitions)?;
    if cfg.k_divisor == 0 {
        return Err(Error::InvalidParameter("k divisor must be >= 1".into()));
    }
    let mut table = Table::new(["d", "n", "k", "rep", "lambda", "std_error", "slope"]);
    for &d in &cfg.d_grid {
        if d == 0 {
            return Err(Error::InvalidParameter("d must be >= 1".into()));
        }
        let mut cells = Vec::new();
        for &n in &cfg.n_grid {
            let k = (n / cfg.k_divisor).max(1);
            let u = ProbVector::uniform(n);
            let streams = Streams::new(cfg.seed, "sample-complexity", (d as u64) << 32 | n as u64);
            for r in 0..cfg.repetitions {
                let mut rng = streams.get(r as u64);
                let dist = DataDistribution::UniformCube { d };
                let x = dist.sample(n, &mut rng);
                let y = dist.sample(n, &mut rng);
                let spec = MinibatchSpec::new(cfg.m, cfg.kernel).with_p(cfg.p).with_k(k).with_seed(rng.random());
                let est = debiased_loss(&spec, &u, &u, &x, &y, Mode::Incomplete)?;
                cells.push((n, k, r, est));
            }
        }
        let means: Vec<f64> = cfg
            .n_grid
            .iter()
            .map(|&n| mean(&cells.iter().filter(|c| c.0 == n).map(|c| c.3.value).collect::<Vec<_>>()))
            .collect();
        let slope = if cfg.n_grid.len() >= 2 && means.iter().all(|v| *v > 0.0) {
            log_log_slope(&cfg.n_grid.iter().map(|&n| n as f64).collect::<Vec<_>>(), &means)
        } else {
            f64::NAN
        };
        for (n, k, r, est) in cells {
            table.push([
                d.to_string(),
                n.to_string(),
                k.to_string(),
                r.to_string(),
                est.value.to_string(),
                est.std_error.to_string(),
                slope.to_string(),
            ]);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct PositivityConfig {
    pub points: usize,
    pub m: usize,
    /// Angles `theta_s = s pi / (thetas - 1)`.
    pub thetas: usize,
}

impl Default for PositivityConfig {
    fn default() -> Self {
        Self { points: 8, m: 3, thetas: 32 }
    }
}

/// Complete debiased `W_1` and `W_2` losses between points on the unit
/// circle and their rotation by `theta`, for both sampling laws.
/// Columns: `theta, lambda_w1, lambda_w2, law`.
pub fn positivity(cfg: &PositivityConfig) -> Result<Table> {
    if cfg.thetas < 2 {
        return Err(Error::InvalidParameter("positivity needs at least two angles".into()));
    }
    let u = ProbVector::uniform(cfg.points);
    let x = circle_points(cfg.points, 0.0);
    let mut table = Table::new(["theta", "lambda_w1", "lambda_w2", "law"]);
    for law in [Law::WithReplacement, Law::WithoutReplacement] {
        for s in 0..cfg.thetas {
            let theta = PI * s as f64 / (cfg.thetas - 1) as f64;
            let y = circle_points(cfg.points, theta);
            let lambda = |p: f64| {
                let spec = MinibatchSpec::new(cfg.m, Kernel::Wasserstein).with_p(p).with_law(law);
                debiased_loss(&spec, &u, &u, &x, &y, Mode::Complete).map(|e| e.value)
            };
            table.push([theta.to_string(), lambda(1.0)?.to_string(), lambda(2.0)?.to_string(), law.name().to_string()]);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct GwInvarianceConfig {
    pub n: usize,
    pub angles: usize,
    pub m_grid: Vec<usize>,
    pub k: usize,
    pub repetitions: usize,
    /// Also solve the full `n x n` problem at every angle.
    pub full_gw: bool,
    pub seed: u64,
}

impl Default for GwInvarianceConfig {
    fn default() -> Self {
        Self { n: 300, angles: 16, m_grid: vec![32, 64], k: 50, repetitions: 1, full_gw: true, seed: 42 }
    }
}

/// MBGW (`p = 2`) between a spiral and a rotated independent spiral.
/// Columns: `angle, m, rep, mbgw, std_error, gw, rel_std`, where `rel_std` is the
/// relative standard deviation of `mbgw` across angles for that `(m, rep)`.
pub fn gw_invariance(cfg: &GwInvarianceConfig) -> Result<Table> {
    check_nonempty("m", cfg.m_grid.len())?;
    check_nonempty("angle", cfg.angles)?;
    check_nonempty("repetition", cfg.repetitions)?;
    let x = spiral(cfg.n, 0.5, cfg.seed);
    let y0 = spiral(cfg.n, 0.5, cfg.seed.wrapping_add(1));
    let u = ProbVector::uniform(cfg.n);
    let angles: Vec<f64> = (0..cfg.angles).map(|s| 2.0 * PI * s as f64 / cfg.angles as f64).collect();
    let targets: Vec<PointCloud> = angles.iter().map(|&t| y0.affine(&rotation_2d(t), &[0.0, 0.0])).collect();

    let full: Vec<Option<f64>> = if cfg.full_gw {
        let cx = build_cost_matrix(&x, &x, 2.0)?;
        targets
            .par_iter()
            .map(|y| {
                let cy = build_cost_matrix(y, y, 2.0)?;
                solve_gw(&u, &u, &cx, &cy, 2.0).map(|r| Some(r.value))
            })
            .collect::<Result<_>>()?
    } else {
        vec![None; cfg.angles]
    };

    let mut table = Table::new(["angle", "m", "rep", "mbgw", "std_error", "gw", "rel_std"]);
    for &m in &cfg.m_grid {
        for r in 0..cfg.repetitions {
            let seed = Streams::new(cfg.seed, "gw-invariance-rep", m as u64).get(r as u64).random();
            let spec = MinibatchSpec::new(m, Kernel::GromovWasserstein).with_k(cfg.k).with_seed(seed);
            let ests: Vec<_> = targets.iter().map(|y| incomplete_loss(&spec, &u, &u, &x, y)).collect::<Result<_>>()?;
            let values: Vec<f64> = ests.iter().map(|e| e.value).collect();
            let rel_std = sample_std(&values) / mean(&values).abs();
            for ((angle, est), gw) in angles.iter().zip(&ests).zip(&full) {
                table.push([
                    angle.to_string(),
                    m.to_string(),
                    r.to_string(),
                    est.value.to_string(),
                    est.std_error.to_string(),
                    gw.map_or_else(|| "NA".to_string(), |v| v.to_string()),
                    rel_std.to_string(),
                ]);
            }
        }
    }
    Ok(table)
}

/// Default deviation preset: bounded uniform data in `[0,1]^2`, `W_2^2`, uniform weights.
pub fn default_deviation_config(seed: u64) -> DeviationConfig {
    DeviationConfig {
        distribution: DataDistribution::UniformCube { d: 2 },
        spec: MinibatchSpec::new(16, Kernel::WassersteinPow),
        n_grid: vec![100, 200, 400, 800],
        k_grid: vec![10, 100, 1000],
        repetitions: 100,
        delta: 0.05,
        k_ref_factor: 100,
        seed,
    }
}

/// Deviation of the incomplete estimator from a long reference run.
/// Columns: `n, k, rep, deviation, bound, within_bound, reference, reference_std_error, n_slope, k_slope`.
pub fn deviation(cfg: &DeviationConfig) -> Result<Table> {
    let report = deviation_experiment(cfg)?;
    let lookup = |v: &[(usize, f64)], key: usize| v.iter().find(|(k, _)| *k == key).map_or(f64::NAN, |(_, s)| *s);
    let mut table = Table::new([
        "n",
        "k",
        "rep",
        "deviation",
        "bound",
        "within_bound",
        "reference",
        "reference_std_error",
        "n_slope",
        "k_slope",
    ]);
    for cell in &report.cells {
        let (n_slope, k_slope) = (lookup(&report.n_slopes, cell.k), lookup(&report.k_slopes, cell.n));
        for (r, dev) in cell.deviations.iter().enumerate() {
            table.push([
                cell.n.to_string(),
                cell.k.to_string(),
                r.to_string(),
                dev.to_string(),
                cell.bound.map_or_else(|| "NA".to_string(), |b| b.to_string()),
                cell.bound.map_or_else(|| "NA".to_string(), |b| u8::from(*dev <= b).to_string()),
                cell.reference.to_string(),
                cell.reference_std_error.to_string(),
                n_slope.to_string(),
                k_slope.to_string(),
            ]);
        }
    }
    Ok(table)
}
