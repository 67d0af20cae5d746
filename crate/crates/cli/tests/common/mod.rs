#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use mbot::color::ImageCloud;
use mbot::io::write_cloud;
use mbot::{PointCloud, ProbVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cloud(r: &mut impl Rng, n: usize, d: usize) -> PointCloud {
    PointCloud::from_flat(d, (0..n * d).map(|_| r.random::<f64>()).collect()).unwrap()
}

pub fn random_weights(r: &mut impl Rng, n: usize) -> ProbVector {
    ProbVector::normalized((0..n).map(|_| 0.05 + r.random::<f64>()).collect()).unwrap()
}

/// Cool-toned landscape: blue sky gradient over green, textured ground.
pub fn landscape(w: usize, h: usize) -> ImageCloud {
    ImageCloud::from_fn(w, h, |x, y| {
        let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
        let horizon = 0.45 + 0.08 * (7.0 * u).sin();
        let t = 0.5 + 0.5 * (37.0 * u + 11.0 * v).sin() * (23.0 * v).cos();
        if v < horizon {
            [0.25 + 0.3 * v, 0.45 + 0.3 * v, 0.95 - 0.3 * v + 0.05 * t]
        } else {
            [0.15 + 0.15 * t, 0.35 + 0.35 * t * (1.0 - v), 0.1 + 0.1 * u]
        }
    })
    .unwrap()
}

/// Warm sunset palette with banded clouds.
pub fn sunset(w: usize, h: usize) -> ImageCloud {
    ImageCloud::from_fn(w, h, |x, y| {
        let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
        let band = 0.5 + 0.5 * (19.0 * v + 3.0 * (5.0 * u).sin()).sin();
        [0.95 - 0.35 * v * band, 0.35 + 0.4 * (1.0 - v) * band, 0.15 + 0.45 * v * (1.0 - band)]
    })
    .unwrap()
}

pub fn write_random_cloud(path: &Path, seed: u64, n: usize, d: usize, weighted: bool) {
    let mut r = rng(seed);
    let x = random_cloud(&mut r, n, d);
    let w = random_weights(&mut r, n);
    write_cloud(path, &x, weighted.then_some(&w)).unwrap();
}

pub fn mbot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbot")).args(args).env_remove("MBOT_SEED").output().expect("run mbot")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// The value printed after `key: ` on stdout.
pub fn printed(o: &Output, key: &str) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")).map(|v| v.split_whitespace().next().unwrap().parse().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(o)))
}
