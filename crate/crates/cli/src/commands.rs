use std::path::{Path, PathBuf};

use mbot::analytic_1d::{mb_plan_1d, mb_plan_1d_exact};
use mbot::color::{load_image, palette_diversity, save_image, subsample, transfer};
use mbot::diagnostics::{marginal_error, marginal_error_from_sums, sparsity_audit, DataDistribution};
use mbot::experiments::{self, EXPERIMENTS};
use mbot::gradflow::{gradient_flow, FlowConfig, FlowLoss};
use mbot::io::{plan_table, read_cloud, write_cloud, Table, WeightedCloud};
use mbot::minibatch::{averaged_plan, complete_loss, debiased_loss, incomplete_loss, incomplete_plan, Law, LiftedPlan, MinibatchSpec, Mode};
use mbot::rng::Streams;
use mbot::ProbVector;

use crate::args::{Command, OracleCommand, SpecArgs};
use crate::config::{pick, RunConfig};
use crate::CliError;

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<(), CliError> {
    match cmd {
        Command::Estimate { a, b, spec, mode, debiased, csv } => {
            estimate(cfg, a, b, spec, mode.clone(), *debiased, csv.as_deref())
        }
        Command::Plan { a, b, spec, mode, output } => plan(cfg, a, b, spec, mode.clone(), output.as_deref()),
        Command::Flow { x0, y, spec, step, iterations, loss, stride } => {
            flow(cfg, x0, y, spec, *step, *iterations, loss.clone(), *stride)
        }
        Command::Color { src, tgt, spec, output } => color(cfg, src, tgt, spec, output.as_deref()),
        Command::Experiment { name, reps, src, tgt } => experiment(cfg, name, *reps, src.as_deref(), tgt.as_deref()),
        Command::Oracle { what } => oracle(cfg, what),
    }
}

fn parse_mode(name: &str) -> Result<Mode, CliError> {
    match name {
        "complete" => Ok(Mode::Complete),
        "incomplete" => Ok(Mode::Incomplete),
        other => Err(CliError::Validation(format!("unknown mode {other:?} (expected complete or incomplete)"))),
    }
}

fn spec_echo(spec: &MinibatchSpec) -> String {
    format!(
        "kernel={} p={} eps={} m={} k={} law={} reweight={} seed={}",
        spec.kernel.name(),
        spec.p,
        spec.eps,
        spec.m,
        spec.k,
        spec.law.name(),
        spec.reweight.name(),
        spec.seed
    )
}

fn write_table(table: &Table, path: &Path) -> Result<(), CliError> {
    table.write(path)?;
    Ok(())
}

fn estimate(
    cfg: &RunConfig,
    a: &Path,
    b: &Path,
    args: &SpecArgs,
    mode: Option<String>,
    debiased: bool,
    csv: Option<&Path>,
) -> Result<(), CliError> {
    let spec = cfg.spec(args)?;
    let mode_name = pick(mode, &cfg.file.mode, "incomplete".into());
    let mode = parse_mode(&mode_name)?;
    let debiased = debiased || cfg.file.debiased.unwrap_or(false);
    let (ca, cb) = (read_cloud(a)?, read_cloud(b)?);
    let (wa, wb) = (&ca.weights, &cb.weights);
    let est = if debiased {
        debiased_loss(&spec, wa, wb, &ca.points, &cb.points, mode)?
    } else {
        match mode {
            Mode::Complete => mbot::minibatch::Estimate {
                value: complete_loss(&spec, wa, wb, &ca.points, &cb.points)?,
                std_error: 0.0,
                batches: 0,
            },
            Mode::Incomplete => incomplete_loss(&spec, wa, wb, &ca.points, &cb.points)?,
        }
    };
    if !est.value.is_finite() {
        return Err(CliError::Numerical(format!("non-finite loss {}", est.value)));
    }
    println!("value: {}", est.value);
    println!("std_error: {}", est.std_error);
    println!("{} mode={mode_name} debiased={debiased}", spec_echo(&spec));

    let mut table =
        Table::new(["kernel", "p", "eps", "m", "k", "law", "reweight", "mode", "debiased", "seed", "value", "std_error", "batches"]);
    table.push([
        spec.kernel.name().to_string(),
        spec.p.to_string(),
        spec.eps.to_string(),
        spec.m.to_string(),
        spec.k.to_string(),
        spec.law.name().to_string(),
        spec.reweight.name().to_string(),
        mode_name,
        debiased.to_string(),
        spec.seed.to_string(),
        est.value.to_string(),
        est.std_error.to_string(),
        est.batches.to_string(),
    ]);
    let path = match csv {
        Some(p) => p.to_path_buf(),
        None => cfg.out_path("estimate.csv")?,
    };
    table.append(path)?;
    Ok(())
}

/// Argsort by the single coordinate of a 1D cloud.
fn order_1d(c: &WeightedCloud) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..c.points.len()).collect();
    idx.sort_by(|&i, &j| c.points.point(i)[0].total_cmp(&c.points.point(j)[0]).then(i.cmp(&j)));
    idx
}

fn closed_form_plan(spec: &MinibatchSpec, ca: &WeightedCloud, cb: &WeightedCloud) -> Result<Vec<(usize, usize, f64)>, CliError> {
    let n = ca.points.len();
    if ca.points.dim() != 1 || cb.points.dim() != 1 || cb.points.len() != n {
        return Err(CliError::Validation("closed form needs two 1D clouds of equal size".into()));
    }
    if !ca.weights.is_uniform() || !cb.weights.is_uniform() || spec.law != Law::WithoutReplacement {
        return Err(CliError::Validation("closed form needs uniform weights and sampling without replacement".into()));
    }
    if spec.p < 1.0 || !matches!(spec.kernel, mbot::minibatch::Kernel::Wasserstein | mbot::minibatch::Kernel::WassersteinPow) {
        return Err(CliError::Validation("closed form applies to the exact Wasserstein kernels".into()));
    }
    let dense = mb_plan_1d(n, spec.m)?;
    let (ox, oy) = (order_1d(ca), order_1d(cb));
    let mut entries = Vec::new();
    for ((j, k), &v) in dense.indexed_iter() {
        if v > 0.0 {
            entries.push((ox[j], oy[k], v));
        }
    }
    entries.sort_by_key(|p| (p.0, p.1));
    Ok(entries)
}

fn plan(cfg: &RunConfig, a: &Path, b: &Path, args: &SpecArgs, mode: Option<String>, output: Option<&Path>) -> Result<(), CliError> {
    let spec = cfg.spec(args)?;
    let mode = pick(mode, &cfg.file.mode, "incomplete".into());
    let (ca, cb) = (read_cloud(a)?, read_cloud(b)?);
    let (entries, batches) = match mode.as_str() {
        "complete" | "incomplete" => {
            let lifted: LiftedPlan = if mode == "complete" {
                averaged_plan(&spec, &ca.weights, &cb.weights, &ca.points, &cb.points)?
            } else {
                incomplete_plan(&spec, &ca.weights, &cb.weights, &ca.points, &cb.points)?
            };
            let err = marginal_error(&lifted, &ca.weights, &cb.weights)?;
            let entries = lifted.plan.entries();
            (entries, Some((lifted, err)))
        }
        "closed-form" => (closed_form_plan(&spec, &ca, &cb)?, None),
        other => {
            return Err(CliError::Validation(format!("unknown plan mode {other:?} (expected complete, incomplete or closed-form)")))
        }
    };
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => cfg.out_path("plan.csv")?,
    };
    write_table(&plan_table(&entries), &path)?;

    let (err, nnz, bound, share, count) = match batches {
        Some((lifted, err)) => {
            let audit = sparsity_audit(&lifted, spec.m, spec.k);
            (err, audit.nnz, audit.bound.to_string(), audit.share, lifted.batch_count)
        }
        None => {
            let (n1, n2) = (ca.points.len(), cb.points.len());
            let mut rows = vec![0.0; n1];
            let mut cols = vec![0.0; n2];
            for &(i, j, v) in &entries {
                rows[i] += v;
                cols[j] += v;
            }
            let err = marginal_error_from_sums(&rows, &cols, ca.weights.as_slice(), cb.weights.as_slice());
            (err, entries.len(), "NA".to_string(), 1.0 - entries.len() as f64 / (n1 * n2) as f64, 0)
        }
    };
    println!("{} mode={mode}", spec_echo(&spec));
    println!("row_l1: {}", err.row_l1);
    println!("col_l1: {}", err.col_l1);
    println!("row_max: {}", err.row_max);
    println!("nnz: {nnz} bound: {bound} share: {share}");

    let mut summary = Table::new(["mode", "m", "k", "batches", "row_l1", "col_l1", "row_max", "nnz", "bound", "share"]);
    summary.push([
        mode.clone(),
        spec.m.to_string(),
        spec.k.to_string(),
        count.to_string(),
        err.row_l1.to_string(),
        err.col_l1.to_string(),
        err.row_max.to_string(),
        nnz.to_string(),
        bound,
        share.to_string(),
    ]);
    write_table(&summary, &sibling(&path, "summary"))
}

/// `dir/name.csv` -> `dir/name_<suffix>.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

#[allow(clippy::too_many_arguments)]
fn flow(
    cfg: &RunConfig,
    x0: &Path,
    y: &Path,
    args: &SpecArgs,
    step: Option<f64>,
    iterations: Option<usize>,
    loss: Option<String>,
    stride: Option<usize>,
) -> Result<(), CliError> {
    let spec = cfg.spec(args)?;
    let f = &cfg.file;
    let loss = match pick(loss, &f.loss, "debiased".into()).as_str() {
        "raw" => FlowLoss::Raw,
        "debiased" => FlowLoss::Debiased,
        other => return Err(CliError::Validation(format!("unknown flow loss {other:?} (expected raw or debiased)"))),
    };
    let iterations = pick(iterations, &f.iterations, 100);
    let fc = FlowConfig {
        spec,
        step: pick(step, &f.step, 0.05),
        iterations,
        loss,
        snapshot_stride: pick(stride, &f.stride, iterations.max(1)),
    };
    let (cx, cy) = (read_cloud(x0)?, read_cloud(y)?);
    let traj = gradient_flow(&cx.points, &cy.points, &fc)?;

    let mut losses = Table::new(["iteration", "loss"]);
    for (t, v) in traj.losses.iter().enumerate() {
        losses.push([t.to_string(), v.to_string()]);
    }
    write_table(&losses, &cfg.out_path("flow_losses.csv")?)?;
    for (t, cloud) in &traj.snapshots {
        write_cloud(cfg.out_path(&format!("flow_snapshot_{t:06}.csv"))?, cloud, None)?;
    }
    println!("{} step={} iterations={iterations}", spec_echo(&fc.spec), fc.step);
    println!("initial_loss: {}", traj.losses.first().copied().unwrap_or(f64::NAN));
    println!("final_loss: {}", traj.losses.last().copied().unwrap_or(f64::NAN));
    println!("snapshots: {}", traj.snapshots.len());
    Ok(())
}

fn color(cfg: &RunConfig, src: &Path, tgt: &Path, args: &SpecArgs, output: Option<&Path>) -> Result<(), CliError> {
    let spec = cfg.spec(args)?;
    let (s, t) = (load_image(src)?, load_image(tgt)?);
    let res = transfer(&s, &t, &spec)?;
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => cfg.out_path("color.png")?,
    };
    save_image(&res.image, &path)?;
    let (mo, mt) = (res.image.mean_color(), t.mean_color());
    let mut table = Table::new([
        "m",
        "k",
        "coverage",
        "total_mass",
        "diversity_src",
        "diversity_out",
        "diversity_tgt",
        "mean_r",
        "mean_g",
        "mean_b",
        "tgt_mean_r",
        "tgt_mean_g",
        "tgt_mean_b",
    ]);
    let row: Vec<String> = [spec.m as f64, spec.k as f64]
        .iter()
        .map(|v| v.to_string())
        .chain(
            [res.coverage, res.total_mass, palette_diversity(&s), palette_diversity(&res.image), palette_diversity(&t)]
                .iter()
                .chain(mo.iter())
                .chain(mt.iter())
                .map(|v| v.to_string()),
        )
        .collect();
    table.rows.push(row);
    write_table(&table, &sibling(&path, "summary"))?;
    println!("{}", spec_echo(&spec));
    println!("coverage: {}", res.coverage);
    println!("diversity: {}", palette_diversity(&res.image));
    println!("mean_rgb: {} {} {}", mo[0], mo[1], mo[2]);
    Ok(())
}

const SPARSITY_PIXELS: usize = 1000;

fn experiment(cfg: &RunConfig, name: &str, reps: Option<usize>, src: Option<&Path>, tgt: Option<&Path>) -> Result<(), CliError> {
    let reps = reps.or(cfg.file.reps);
    let seed = cfg.seed;
    let table = match name {
        "marginals" => {
            let mut c = experiments::MarginalsConfig { seed, ..Default::default() };
            c.repetitions = reps.unwrap_or(c.repetitions);
            experiments::marginals(&c)?
        }
        "sparsity" => {
            let mut c = experiments::SparsityConfig { seed, ..Default::default() };
            c.repetitions = reps.unwrap_or(c.repetitions);
            let (x, y) = match (src, tgt) {
                (Some(s), Some(t)) => (subsample(&load_image(s)?, SPARSITY_PIXELS, seed)?, subsample(&load_image(t)?, SPARSITY_PIXELS, seed ^ 1)?),
                (None, None) => {
                    let mut rng = Streams::new(seed, "sparsity-colors", 0).get(0);
                    let dist = DataDistribution::UniformCube { d: 3 };
                    (dist.sample(SPARSITY_PIXELS, &mut rng), dist.sample(SPARSITY_PIXELS, &mut rng))
                }
                _ => return Err(CliError::Validation("give both --src and --tgt, or neither".into())),
            };
            experiments::sparsity(&x, &y, &c)?
        }
        "sample-complexity" => {
            let mut c = experiments::SampleComplexityConfig { seed, ..Default::default() };
            c.repetitions = reps.unwrap_or(c.repetitions);
            experiments::sample_complexity(&c)?
        }
        "positivity" => experiments::positivity(&experiments::PositivityConfig::default())?,
        "gw-invariance" => {
            let mut c = experiments::GwInvarianceConfig { seed, ..Default::default() };
            c.repetitions = reps.unwrap_or(c.repetitions);
            experiments::gw_invariance(&c)?
        }
        "deviation" => {
            let mut c = experiments::default_deviation_config(seed);
            c.repetitions = reps.unwrap_or(c.repetitions);
            experiments::deviation(&c)?
        }
        other => {
            return Err(CliError::Validation(format!("unknown experiment {other:?} (expected one of {})", EXPERIMENTS.join(", "))))
        }
    };
    let path = cfg.out_path(&format!("{name}.csv"))?;
    write_table(&table, &path)?;
    println!("{name}: {} rows -> {}", table.rows.len(), path.display());
    Ok(())
}

fn oracle(cfg: &RunConfig, what: &OracleCommand) -> Result<(), CliError> {
    match what {
        OracleCommand::Loss { a, b, spec } => {
            let spec = cfg.spec(spec)?;
            let (ca, cb) = (read_cloud(a)?, read_cloud(b)?);
            let v = complete_loss(&spec, &ca.weights, &cb.weights, &ca.points, &cb.points)?;
            println!("value: {v}");
            println!("{}", spec_echo(&spec));
            let mut t = Table::new(["kernel", "p", "eps", "m", "law", "reweight", "value"]);
            t.push([
                spec.kernel.name().to_string(),
                spec.p.to_string(),
                spec.eps.to_string(),
                spec.m.to_string(),
                spec.law.name().to_string(),
                spec.reweight.name().to_string(),
                v.to_string(),
            ]);
            write_table(&t, &cfg.out_path("oracle_loss.csv")?)
        }
        OracleCommand::Plan { a, b, spec, output } => {
            let spec = cfg.spec(spec)?;
            let (ca, cb) = (read_cloud(a)?, read_cloud(b)?);
            let lifted = averaged_plan(&spec, &ca.weights, &cb.weights, &ca.points, &cb.points)?;
            let err = marginal_error(&lifted, &ca.weights, &cb.weights)?;
            println!("row_l1: {} col_l1: {}", err.row_l1, err.col_l1);
            let path = match output {
                Some(p) => p.clone(),
                None => cfg.out_path("oracle_plan.csv")?,
            };
            write_table(&plan_table(&lifted.plan.entries()), &path)
        }
        OracleCommand::Plan1d { n, m, output } => {
            let exact = mb_plan_1d_exact(*n, *m)?;
            let mut t = Table::new(["i", "j", "numer", "denom", "mass"]);
            let mut row_sums = Vec::with_capacity(*n);
            for (i, row) in exact.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    t.push([i.to_string(), j.to_string(), v.numer().to_string(), v.denom().to_string(), rational_f64(v).to_string()]);
                }
                row_sums.push(row.iter().sum::<mbot::analytic_1d::Rational>());
            }
            let target = ProbVector::uniform(*n)[0];
            let exact_rows = row_sums.iter().all(|s| *s.numer() == 1.into() && *s.denom() == (*n).into());
            println!("rows_exactly_1/n: {exact_rows} (1/n = {target})");
            let path = match output {
                Some(p) => p.clone(),
                None => cfg.out_path("oracle_plan1d.csv")?,
            };
            write_table(&t, &path)
        }
    }
}

fn rational_f64(v: &mbot::analytic_1d::Rational) -> f64 {
    mbot::analytic_1d::rational_to_f64(v)
}
