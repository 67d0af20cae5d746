//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits non-zero when a criterion fails that is not listed in
//! `KNOWN_FAILURES`; listed criteria still print their real outcome.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use mbot::analytic_1d::{mb_plan_1d, mb_plan_1d_exact, Rational};
use mbot::color::{palette_diversity, save_image, subsample, transfer, ImageCloud};
use mbot::experiments::{
    gw_invariance, marginals, positivity, rotation_2d, sample_complexity, sparsity, spiral, GwInvarianceConfig, MarginalsConfig,
    PositivityConfig, SampleComplexityConfig, SparsityConfig,
};
use mbot::gradflow::loss_and_grad;
use mbot::io::Table;
use mbot::minibatch::{
    averaged_plan, complete_loss, debiased_loss, incomplete_loss, ordered_support, reweight, Kernel, Law, MinibatchSpec, Mode, Reweight,
};
use mbot::ot::{build_cost_matrix, solve_exact_ot};
use mbot::{PointCloud, ProbVector};
use num_traits::Zero;
use rand::Rng;

/// Criteria that fail for reasons recorded in the project notes.
const KNOWN_FAILURES: &[u32] = &[8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(start: Instant, budget: Duration) -> bool {
    start.elapsed() < budget
}

fn kernel_specs(m: usize) -> Vec<(&'static str, MinibatchSpec)> {
    vec![
        ("W1", MinibatchSpec::new(m, Kernel::Wasserstein).with_p(1.0)),
        ("W2^2", MinibatchSpec::new(m, Kernel::WassersteinPow)),
        ("W^eps", MinibatchSpec::new(m, Kernel::Entropic).with_eps(1.0)),
        ("S^eps", MinibatchSpec::new(m, Kernel::Sinkhorn).with_eps(1.0)),
        ("GW", MinibatchSpec::new(m, Kernel::GromovWasserstein)),
    ]
}

fn c1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1001);
    let (mut checked, mut worst, mut misses) = (0, 0.0f64, Vec::new());
    for inst in 0..20 {
        let n = r.random_range(1..=6);
        let m = r.random_range(1..=n.min(3));
        let (x, y) = (random_cloud(&mut r, n, 2), random_cloud(&mut r, n, 2));
        let (a, b) = (random_weights(&mut r, n), random_weights(&mut r, n));
        for law in [Law::WithReplacement, Law::WithoutReplacement] {
            for rw in [Reweight::Uniform, Reweight::Normalized] {
                for (name, spec) in kernel_specs(m) {
                    let spec = spec.with_law(law).with_reweight(rw).with_k(1_000_000);
                    let exact = complete_loss(&spec, &a, &b, &x, &y).unwrap();
                    let est = incomplete_loss(&spec, &a, &b, &x, &y).unwrap();
                    // Batch values that agree up to rounding leave a standard
                    // error at round-off level, so the tolerance has a floor.
                    let gap = (est.value - exact).abs();
                    let floor = 1e-12 * exact.abs().max(1.0);
                    let z = if gap <= floor { 0.0 } else { gap / est.std_error };
                    worst = worst.max(z);
                    if z > 3.0 {
                        misses.push(format!("inst{inst}(n={n},m={m},{},{},{name}) z={z:.2}", law.name(), rw.name()));
                    }
                    checked += 1;
                }
            }
        }
    }
    let t = start.elapsed().as_secs_f64();
    let pass = misses.is_empty() && within(start, Duration::from_secs(600));
    outcome(pass, format!("{checked} comparisons, max |z| = {worst:.2}, {} beyond 3 SE {misses:?}, {t:.0}s", misses.len()))
}

fn c2_interpolation_endpoints() -> Outcome {
    let mut r = rng(1002);
    let (mut full_err, mut single_err) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = r.random_range(2..=7);
        let (x, y) = (random_cloud(&mut r, n, 2), random_cloud(&mut r, n, 2));
        let u = ProbVector::uniform(n);
        for p in [1.0, 2.0] {
            let c = build_cost_matrix(&x, &y, p).unwrap();
            let ot = solve_exact_ot(&u, &u, &c).unwrap().value;
            let spec = MinibatchSpec::new(n, Kernel::WassersteinPow).with_p(p);
            full_err = full_err.max((complete_loss(&spec, &u, &u, &x, &y).unwrap() - ot).abs());

            let (a, b) = (random_weights(&mut r, n), random_weights(&mut r, n));
            let mut pairwise = 0.0;
            for i in 0..n {
                for j in 0..n {
                    pairwise += a[i] * b[j] * c.entries()[[i, j]];
                }
            }
            for law in [Law::WithReplacement, Law::WithoutReplacement] {
                let spec = MinibatchSpec::new(1, Kernel::WassersteinPow).with_p(p).with_law(law);
                single_err = single_err.max((complete_loss(&spec, &a, &b, &x, &y).unwrap() - pairwise).abs());
            }
        }
    }
    outcome(full_err <= 1e-9 && single_err <= 1e-12, format!("m=n max error {full_err:.2e}, m=1 max error {single_err:.2e}"))
}

fn c3_closed_form_1d() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1003);
    let mut worst = 0.0f64;
    for n in 1..=8 {
        let mut xs: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        xs.sort_by(f64::total_cmp);
        let mut ys: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        ys.sort_by(f64::total_cmp);
        let (x, y) = (PointCloud::from_1d(&xs).unwrap(), PointCloud::from_1d(&ys).unwrap());
        let u = ProbVector::uniform(n);
        for m in 1..=n {
            let avg = averaged_plan(&MinibatchSpec::new(m, Kernel::WassersteinPow), &u, &u, &x, &y).unwrap().plan.to_dense();
            let closed = mb_plan_1d(n, m).unwrap();
            worst = avg.iter().zip(closed.iter()).fold(worst, |w, (p, q)| w.max((p - q).abs()));
        }
    }
    let mut exact_rows = true;
    for n in 1..=12 {
        let target = Rational::new(1.into(), (n as i64).into());
        for m in 1..=n {
            for row in mb_plan_1d_exact(n, m).unwrap() {
                exact_rows &= row.iter().fold(Rational::zero(), |s, v| s + v) == target;
            }
        }
    }
    let t = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-12 && exact_rows && within(start, Duration::from_secs(60)),
        format!("max entry error {worst:.2e}, exact rational row sums {exact_rows}, {t:.1}s"),
    )
}

/// `E[Q_I^T w(a, I)]` by enumeration of the ordered support.
fn expected_lift(law: Law, rw: Reweight, a: &ProbVector, m: usize) -> Vec<f64> {
    let mut acc = vec![0.0; a.len()];
    for (t, p) in ordered_support(law, a, m) {
        for (&i, w) in t.iter().zip(reweight(rw, a, &t).as_slice()) {
            acc[i] += p * w;
        }
    }
    acc
}

fn c4_admissibility() -> Outcome {
    let mut r = rng(1004);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(2..=7);
        let m = r.random_range(1..=n.min(4));
        let a = random_weights(&mut r, n);
        for (law, rw) in [(Law::WithReplacement, Reweight::Uniform), (Law::WithoutReplacement, Reweight::Normalized)] {
            let lift = expected_lift(law, rw, &a, m);
            worst = lift.iter().zip(a.as_slice()).fold(worst, |w, (p, q)| w.max((p - q).abs()));
        }
    }
    let a = ProbVector::new(vec![0.6, 0.2, 0.2]).unwrap();
    let lift = expected_lift(Law::WithoutReplacement, Reweight::Uniform, &a, 2);
    let max_row = lift.iter().copied().fold(0.0, f64::max);
    let (inv_m, max_a) = (0.5, a.as_slice().iter().copied().fold(0.0, f64::max));
    let violated = max_row <= inv_m + 1e-15 && inv_m < max_a;
    outcome(worst <= 1e-12 && violated, format!("admissible max error {worst:.2e}; (w^U, P^W) on (0.6,0.2,0.2): max row sum {max_row:.4}"))
}

fn c5_upper_bound() -> Outcome {
    let mut r = rng(1005);
    let (mut violations, mut min_gap) = (0, f64::INFINITY);
    for inst in 0..200 {
        let n = r.random_range(2..=6);
        let m = r.random_range(1..=n.min(3));
        let p = if inst % 2 == 0 { 2.0 } else { 1.0 };
        let (x, y) = (random_cloud(&mut r, n, 2), random_cloud(&mut r, n, 2));
        let (a, b) = (random_weights(&mut r, n), random_weights(&mut r, n));
        let ot = solve_exact_ot(&a, &b, &build_cost_matrix(&x, &y, p).unwrap()).unwrap().value;
        for (law, rw) in [(Law::WithReplacement, Reweight::Uniform), (Law::WithoutReplacement, Reweight::Normalized)] {
            let spec = MinibatchSpec::new(m, Kernel::WassersteinPow).with_p(p).with_law(law).with_reweight(rw);
            let gap = complete_loss(&spec, &a, &b, &x, &y).unwrap() - ot;
            min_gap = min_gap.min(gap);
            if gap < -1e-12 {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("400 comparisons on 200 instances, {violations} violations, min gap {min_gap:.2e}"))
}

fn c6_debiasing() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1006);
    let mut zero = true;
    for (_, spec) in kernel_specs(2) {
        let y = random_cloud(&mut r, 5, 2);
        let b = random_weights(&mut r, 5);
        zero &= debiased_loss(&spec.with_reweight(Reweight::Normalized), &b, &b, &y, &y, Mode::Complete).unwrap().value == 0.0;
    }
    let t = positivity(&PositivityConfig::default()).unwrap();
    let min = |c: &str| t.column_f64(c).unwrap().into_iter().fold(f64::INFINITY, f64::min);
    let (w1, w2) = (min("lambda_w1"), min("lambda_w2"));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        zero && w2 < 0.0 && w1 >= -1e-9 && within(start, Duration::from_secs(60)),
        format!("Lambda(b,b)=0 exactly: {zero}; min Lambda_W2 {w2:.3e}, min Lambda_W1 {w1:.3e}, {secs:.1}s"),
    )
}

fn c7_marginal_concentration() -> Outcome {
    let start = Instant::now();
    let cfg = MarginalsConfig::default();
    let t = marginals(&cfg).unwrap();
    let (ms, ks) = (t.column_f64("m").unwrap(), t.column_f64("k").unwrap());
    let inside = t.column_f64("within_bound").unwrap();
    let slopes = t.column_f64("slope").unwrap();
    let mut min_cover = 1.0f64;
    let mut slope_ok = true;
    let mut slope_txt = Vec::new();
    for &m in &cfg.m_grid {
        for &k in &cfg.k_grid {
            let cell: Vec<f64> = (0..t.rows.len()).filter(|&i| ms[i] == m as f64 && ks[i] == k as f64).map(|i| inside[i]).collect();
            min_cover = min_cover.min(cell.iter().sum::<f64>() / cell.len() as f64);
        }
        let s = slopes[ms.iter().position(|&v| v == m as f64).unwrap()];
        slope_ok &= (-0.6..=-0.4).contains(&s);
        slope_txt.push(format!("m={m}: {s:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        min_cover >= 0.95 && slope_ok && within(start, Duration::from_secs(300)),
        format!("min coverage {min_cover:.3}, slopes {}, {secs:.0}s", slope_txt.join(", ")),
    )
}

fn c8_sample_complexity() -> Outcome {
    let start = Instant::now();
    let cfg = SampleComplexityConfig::default();
    let t = sample_complexity(&cfg).unwrap();
    let (ds, ns, vals) = (t.column_f64("d").unwrap(), t.column_f64("n").unwrap(), t.column_f64("lambda").unwrap());
    let slopes = t.column_f64("slope").unwrap();
    let mean_at = |d: usize, n: usize| {
        let v: Vec<f64> = (0..vals.len()).filter(|&i| ds[i] == d as f64 && ns[i] == n as f64).map(|i| vals[i]).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let mut worst_spread = 0.0f64;
    for &n in &cfg.n_grid {
        let means: Vec<f64> = cfg.d_grid.iter().map(|&d| mean_at(d, n)).collect();
        let (lo, hi) = means.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        worst_spread = worst_spread.max((hi - lo) / hi.abs());
    }
    let mut slope_ok = true;
    let mut slope_txt = Vec::new();
    for &d in &cfg.d_grid {
        let s = slopes[ds.iter().position(|&v| v == d as f64).unwrap()];
        slope_ok &= (s + 0.5).abs() <= 0.15;
        slope_txt.push(format!("d={d}: {s:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_spread <= 0.2 && slope_ok && within(start, Duration::from_secs(600)),
        format!("max pointwise spread {:.0}%, slopes {}, {secs:.0}s", 100.0 * worst_spread, slope_txt.join(", ")),
    )
}

fn c9_gradients() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1009);
    let mut worst = 0.0f64;
    let kernels = [
        MinibatchSpec::new(4, Kernel::WassersteinPow),
        MinibatchSpec::new(4, Kernel::Entropic).with_eps(0.5),
        MinibatchSpec::new(4, Kernel::Sinkhorn).with_eps(0.5),
    ];
    for base in kernels {
        for inst in 0..20u64 {
            let (x, y) = (random_cloud(&mut r, 16, 2), random_cloud(&mut r, 16, 2));
            let u = ProbVector::uniform(16);
            let spec = base.clone().with_k(8).with_seed(inst);
            let g = loss_and_grad(&spec, &u, &u, &x, &y, false).unwrap();
            let h = 1e-5;
            let value = |yy: &PointCloud| incomplete_loss(&spec, &u, &u, &x, yy).unwrap().value;
            let mut fd = vec![0.0; g.grad_y.len()];
            for (c, f) in fd.iter_mut().enumerate() {
                let (mut yp, mut ym) = (y.clone(), y.clone());
                yp.as_flat_mut()[c] += h;
                ym.as_flat_mut()[c] -= h;
                *f = (value(&yp) - value(&ym)) / (2.0 * h);
            }
            let diff = g.grad_y.iter().zip(&fd).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let norm = fd.iter().map(|q| q * q).sum::<f64>().sqrt();
            worst = worst.max(diff / norm);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-4 && within(start, Duration::from_secs(60)), format!("max relative error {worst:.2e} over 60 instances, {secs:.1}s"))
}

fn c10_gw_invariance() -> Outcome {
    let start = Instant::now();
    let cfg = GwInvarianceConfig { full_gw: false, ..Default::default() };
    let t = gw_invariance(&cfg).unwrap();
    let rel = t.column_f64("rel_std").unwrap().into_iter().fold(0.0, f64::max);

    let x = spiral(cfg.n, 0.5, cfg.seed);
    let y = spiral(cfg.n, 0.5, cfg.seed + 1).affine(&rotation_2d(PI / 5.0), &[0.0, 0.0]);
    let u = ProbVector::uniform(cfg.n);
    let spec = MinibatchSpec::new(cfg.m_grid[0], Kernel::GromovWasserstein).with_k(cfg.k).with_seed(cfg.seed);
    let base = incomplete_loss(&spec, &u, &u, &x, &y).unwrap().value;
    let moved = incomplete_loss(&spec, &u, &u, &x, &y.translated(&[123.4, -56.7])).unwrap().value;
    let shift = (moved - base).abs();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        rel < 0.02 && shift < 1e-9 && within(start, Duration::from_secs(120)),
        format!("max relative std across 16 angles {rel:.2e}, translation change {shift:.2e}, {secs:.1}s"),
    )
}

fn c11_sparsity(src: &ImageCloud, tgt: &ImageCloud) -> Outcome {
    let (x, y) = (subsample(src, 1000, 11).unwrap(), subsample(tgt, 1000, 12).unwrap());
    let t = sparsity(&x, &y, &SparsityConfig::default()).unwrap();
    let (nnz, bound, share) = (t.column_f64("nnz").unwrap(), t.column_f64("bound").unwrap(), t.column_f64("share").unwrap());
    let bounded = nnz.iter().zip(&bound).all(|(a, b)| a <= b);
    let monotone = share.windows(2).all(|w| w[1] >= w[0]);
    let shares: Vec<String> = share.iter().map(|s| format!("{s:.4}")).collect();
    outcome(bounded && monotone, format!("nnz <= k(2m-1): {bounded}; shares over m=50..500: {}", shares.join(" ")))
}

/// Smallest `k` whose expected coverage of `n` pixels by batches of `m` is at least `target`.
fn batches_for_coverage(n: usize, m: usize, target: f64) -> usize {
    ((1.0 - target).ln() / (1.0 - m as f64 / n as f64).ln()).ceil() as usize
}

fn c12_color_transfer(src: &ImageCloud, tgt: &ImageCloud) -> Outcome {
    let start = Instant::now();
    let n = src.len();
    let big = MinibatchSpec::new(1000, Kernel::WassersteinPow).with_k(batches_for_coverage(n, 1000, 0.995)).with_seed(12);
    let out = transfer(src, tgt, &big).unwrap();
    let (mo, mt) = (out.image.mean_color(), tgt.mean_color());
    let mean_gap = (0..3).map(|c| (mo[c] - mt[c]).abs()).fold(0.0, f64::max);
    let small = MinibatchSpec::new(10, Kernel::WassersteinPow).with_k(batches_for_coverage(n, 10, 0.995)).with_seed(12);
    let out_small = transfer(src, tgt, &small).unwrap();
    let (d_small, d_big) = (palette_diversity(&out_small.image), palette_diversity(&out.image));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        out.coverage >= 0.99 && mean_gap <= 0.05 && d_small < d_big && within(start, Duration::from_secs(180)),
        format!(
            "coverage {:.4} (m=10: {:.4}), max channel mean gap {mean_gap:.4}, diversity m=10 {d_small:.4} < m=1000 {d_big:.4}, {secs:.0}s",
            out.coverage, out_small.coverage
        ),
    )
}

/// Cells equal as text, or numerically within `tol` relative.
fn tables_match(p: &Table, q: &Table, tol: f64) -> bool {
    p.header == q.header
        && p.rows.len() == q.rows.len()
        && p.rows.iter().zip(&q.rows).all(|(r, s)| {
            r.iter().zip(s).all(|(u, v)| {
                u == v
                    || match (u.parse::<f64>(), v.parse::<f64>()) {
                        (Ok(a), Ok(b)) => (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0),
                        _ => false,
                    }
            })
        })
}

fn c13_determinism(dir: &Path) -> Outcome {
    let d = |name: &str| dir.join(name).to_string_lossy().into_owned();
    write_random_cloud(&dir.join("a.csv"), 1, 40, 2, true);
    write_random_cloud(&dir.join("b.csv"), 2, 40, 2, true);
    write_random_cloud(&dir.join("c.csv"), 3, 5, 2, false);
    write_random_cloud(&dir.join("e.csv"), 4, 5, 2, false);
    write_random_cloud(&dir.join("l1.csv"), 5, 12, 1, false);
    write_random_cloud(&dir.join("l2.csv"), 6, 12, 1, false);
    save_image(&landscape(24, 24), dir.join("src.png")).unwrap();
    save_image(&sunset(24, 24), dir.join("tgt.png")).unwrap();

    let runs: Vec<(&str, Vec<String>, Vec<&str>)> = vec![
        ("estimate", vec!["estimate".into(), d("a.csv"), d("b.csv"), "--m".into(), "8".into(), "--k".into(), "200".into(), "--debiased".into()], vec!["estimate.csv"]),
        (
            "estimate-complete",
            vec!["estimate".into(), d("c.csv"), d("e.csv"), "--kernel".into(), "sinkhorn".into(), "--m".into(), "2".into(), "--mode".into(), "complete".into()],
            vec!["estimate.csv"],
        ),
        ("plan", vec!["plan".into(), d("a.csv"), d("b.csv"), "--m".into(), "6".into(), "--k".into(), "50".into()], vec!["plan.csv", "plan_summary.csv"]),
        ("plan-complete", vec!["plan".into(), d("c.csv"), d("e.csv"), "--m".into(), "3".into(), "--mode".into(), "complete".into()], vec!["plan.csv", "plan_summary.csv"]),
        ("plan-closed", vec!["plan".into(), d("l1.csv"), d("l2.csv"), "--m".into(), "4".into(), "--mode".into(), "closed-form".into()], vec!["plan.csv", "plan_summary.csv"]),
        (
            "flow",
            vec!["flow".into(), d("a.csv"), d("b.csv"), "--m".into(), "8".into(), "--k".into(), "3".into(), "--iterations".into(), "30".into(), "--stride".into(), "10".into()],
            vec!["flow_losses.csv", "flow_snapshot_000010.csv", "flow_snapshot_000030.csv"],
        ),
        ("color", vec!["color".into(), d("src.png"), d("tgt.png"), "--m".into(), "48".into(), "--k".into(), "40".into()], vec!["color_summary.csv"]),
        ("experiment", vec!["experiment".into(), "marginals".into(), "--reps".into(), "2".into()], vec!["marginals.csv"]),
        ("experiment-sparsity", vec!["experiment".into(), "sparsity".into()], vec!["sparsity.csv"]),
        ("oracle-loss", vec!["oracle".into(), "loss".into(), d("c.csv"), d("e.csv"), "--kernel".into(), "gw".into(), "--m".into(), "2".into()], vec!["oracle_loss.csv"]),
        ("oracle-plan", vec!["oracle".into(), "plan".into(), d("c.csv"), d("e.csv"), "--m".into(), "2".into()], vec!["oracle_plan.csv"]),
        ("oracle-plan1d", vec!["oracle".into(), "plan1d".into(), "--n".into(), "7".into(), "--m".into(), "3".into()], vec!["oracle_plan1d.csv"]),
    ];

    let mut failures = Vec::new();
    for (label, args, files) in &runs {
        let run = |tag: &str, workers: usize| -> Option<Vec<Vec<u8>>> {
            let out = dir.join(format!("{label}-{tag}"));
            let mut full: Vec<String> = vec!["--seed".into(), "7".into(), "--workers".into(), workers.to_string(), "--out".into(), out.to_string_lossy().into_owned()];
            full.extend(args.iter().cloned());
            let refs: Vec<&str> = full.iter().map(String::as_str).collect();
            let o = mbot(&refs);
            if !o.status.success() {
                return None;
            }
            let mut blobs: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(out.join(f)).ok()).collect::<Option<_>>()?;
            if *label == "color" {
                blobs.push(std::fs::read(out.join("color.png")).ok()?);
            }
            Some(blobs)
        };
        let (Some(first), Some(second)) = (run("w1a", 1), run("w1b", 1)) else {
            failures.push(format!("{label}: command failed"));
            continue;
        };
        if first != second {
            failures.push(format!("{label}: not bit-identical at 1 worker"));
        }
        for w in [2, 8] {
            let Some(other) = run(&format!("w{w}"), w) else {
                failures.push(format!("{label}: failed at {w} workers"));
                continue;
            };
            for (p, q) in first.iter().zip(&other) {
                let same = p == q
                    || match (Table::read_from(p.as_slice()), Table::read_from(q.as_slice())) {
                        (Ok(tp), Ok(tq)) => tables_match(&tp, &tq, 1e-12),
                        _ => false,
                    };
                if !same {
                    failures.push(format!("{label}: differs at {w} workers"));
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{} command runs x 4, failures {failures:?}", runs.len()))
}

fn main() {
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
        .unwrap_or_default();
    let dir = tempfile::tempdir().unwrap();
    let (src, tgt) = (landscape(256, 256), sunset(256, 256));

    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "oracle equivalence of estimators", Box::new(c1_oracle_equivalence)),
        (2, "interpolation endpoints", Box::new(c2_interpolation_endpoints)),
        (3, "1D closed form", Box::new(c3_closed_form_1d)),
        (4, "admissibility", Box::new(c4_admissibility)),
        (5, "upper bound", Box::new(c5_upper_bound)),
        (6, "debiasing", Box::new(c6_debiasing)),
        (7, "marginal concentration", Box::new(c7_marginal_concentration)),
        (8, "dimension-free sample complexity", Box::new(c8_sample_complexity)),
        (9, "gradient validation", Box::new(c9_gradients)),
        (10, "GW invariance", Box::new(c10_gw_invariance)),
        (11, "sparsity", Box::new(|| c11_sparsity(&src, &tgt))),
        (12, "color transfer end-to-end", Box::new(|| c12_color_transfer(&src, &tgt))),
        (13, "determinism", Box::new(|| c13_determinism(dir.path()))),
    ];

    let mut unexpected = Vec::new();
    for (id, name, run) in &criteria {
        if !only.is_empty() && !only.contains(id) {
            continue;
        }
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILURES.contains(id) { " (known)" } else { "" };
        println!("criterion {id:>2} {tag}{note}: {name}: {}", o.detail);
        if !o.pass && !KNOWN_FAILURES.contains(id) {
            unexpected.push(*id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
