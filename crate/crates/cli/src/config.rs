use std::path::{Path, PathBuf};

use mbot::minibatch::{Kernel, Law, MinibatchSpec, Reweight};
use serde::Deserialize;

use crate::args::SpecArgs;
use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "MBOT_SEED";

/// Settings read from `--config`. Every field is optional and loses to the
/// matching command-line flag.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub kernel: Option<String>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub eps: Option<f64>,
    pub law: Option<String>,
    pub reweight: Option<String>,
    pub mode: Option<String>,
    pub debiased: Option<bool>,
    pub step: Option<f64>,
    pub iterations: Option<usize>,
    pub loss: Option<String>,
    pub stride: Option<usize>,
    pub reps: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub file: FileConfig,
}

impl RunConfig {
    pub fn resolve(seed: Option<u64>, workers: Option<usize>, out: Option<PathBuf>, file: FileConfig) -> Result<Self, CliError> {
        let env_seed = match std::env::var(SEED_ENV) {
            Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| CliError::Validation(format!("{SEED_ENV}={s:?} is not a u64")))?),
            Err(_) => None,
        };
        let seed = seed.or(file.seed).or(env_seed).unwrap_or(DEFAULT_SEED);
        let workers = workers.or(file.workers);
        if workers == Some(0) {
            return Err(CliError::Validation("--workers must be >= 1".into()));
        }
        let out = out.or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { seed, workers, out, file })
    }

    /// Builds a minibatch spec from flags, then the config file, then defaults.
    pub fn spec(&self, args: &SpecArgs) -> Result<MinibatchSpec, CliError> {
        let f = &self.file;
        let kernel_name = args.kernel.clone().or_else(|| f.kernel.clone()).unwrap_or_else(|| "w2sq".into());
        let (kernel, fixed_p) = parse_kernel(&kernel_name)?;
        let p_flag = args.p.or(f.p);
        let p = match (fixed_p, p_flag) {
            (Some(fp), Some(p)) if fp != p => {
                return Err(CliError::Validation(format!("kernel {kernel_name} implies p = {fp}, but p = {p} was given")))
            }
            (Some(fp), _) => fp,
            (None, p) => p.unwrap_or(2.0),
        };
        let m = args.m.or(f.m).ok_or_else(|| CliError::Validation("batch size --m is required".into()))?;
        let mut spec = MinibatchSpec::new(m, kernel).with_p(p).with_seed(self.seed);
        if let Some(eps) = args.eps.or(f.eps) {
            spec = spec.with_eps(eps);
        }
        if let Some(k) = args.k.or(f.k) {
            spec = spec.with_k(k);
        }
        if let Some(law) = args.law.clone().or_else(|| f.law.clone()) {
            spec = spec.with_law(parse_law(&law)?);
        }
        if let Some(r) = args.reweight.clone().or_else(|| f.reweight.clone()) {
            spec = spec.with_reweight(parse_reweight(&r)?);
        }
        Ok(spec)
    }

    pub fn out_path(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::Io(format!("{}: {e}", self.out.display())))?;
        Ok(self.out.join(name))
    }
}

/// Kernel names: `w1`, `w2` (root), `w2sq`, `wp` (root), `wpp`, `entropic`, `sinkhorn`, `gw`.
pub fn parse_kernel(name: &str) -> Result<(Kernel, Option<f64>), CliError> {
    Ok(match name {
        "w1" => (Kernel::Wasserstein, Some(1.0)),
        "w2" => (Kernel::Wasserstein, Some(2.0)),
        "w2sq" => (Kernel::WassersteinPow, Some(2.0)),
        "wp" => (Kernel::Wasserstein, None),
        "wpp" => (Kernel::WassersteinPow, None),
        "entropic" => (Kernel::Entropic, None),
        "sinkhorn" => (Kernel::Sinkhorn, None),
        "gw" => (Kernel::GromovWasserstein, None),
        other => {
            return Err(CliError::Validation(format!(
                "unknown kernel {other:?} (expected w1, w2, w2sq, wp, wpp, entropic, sinkhorn or gw)"
            )))
        }
    })
}

pub fn parse_law(name: &str) -> Result<Law, CliError> {
    match name {
        "with" | "with-replacement" | "u" => Ok(Law::WithReplacement),
        "without" | "without-replacement" | "w" => Ok(Law::WithoutReplacement),
        other => Err(CliError::Validation(format!("unknown law {other:?} (expected with or without)"))),
    }
}

pub fn parse_reweight(name: &str) -> Result<Reweight, CliError> {
    match name {
        "uniform" => Ok(Reweight::Uniform),
        "normalized" => Ok(Reweight::Normalized),
        other => Err(CliError::Validation(format!("unknown reweighting {other:?} (expected uniform or normalized)"))),
    }
}

/// A single-value setting: flag, then config file, then default.
pub fn pick<T: Clone>(flag: Option<T>, file: &Option<T>, default: T) -> T {
    flag.or_else(|| file.clone()).unwrap_or(default)
}
