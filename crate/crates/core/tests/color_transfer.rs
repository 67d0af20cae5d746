mod common;

use approx::assert_abs_diff_eq;
use common::*;
use mbot::color::{load_image, palette_diversity, save_image, subsample, transfer, ImageCloud};
use mbot::minibatch::{Kernel, Law, MinibatchSpec};
use mbot::{Error, PointCloud};
use rand::Rng;

fn gradient(w: usize, h: usize) -> ImageCloud {
    ImageCloud::from_fn(w, h, |x, y| [x as f64 / (w - 1) as f64, y as f64 / (h - 1) as f64, 0.5]).unwrap()
}

fn warm(w: usize, h: usize) -> ImageCloud {
    ImageCloud::from_fn(w, h, |x, y| {
        let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
        [0.7 + 0.3 * (6.0 * u).sin(), 0.2 + 0.5 * v * u, 0.1 + 0.2 * (4.0 * v).cos().abs()]
    })
    .unwrap()
}

fn noisy(w: usize, h: usize, seed: u64) -> ImageCloud {
    let mut g = rng(seed);
    let px: Vec<f64> = (0..w * h * 3).map(|_| g.random::<f64>()).collect();
    ImageCloud::new(w, h, PointCloud::from_flat(3, px).unwrap()).unwrap()
}

#[test]
fn image_cloud_validation() {
    assert!(ImageCloud::new(2, 2, PointCloud::from_flat(3, vec![0.5; 9]).unwrap()).is_err());
    assert!(ImageCloud::new(1, 1, PointCloud::from_flat(3, vec![0.5, 1.5, 0.0]).unwrap()).is_err());
    assert!(ImageCloud::new(1, 1, PointCloud::from_flat(2, vec![0.5, 0.5]).unwrap()).is_err());
    let c = ImageCloud::from_fn(3, 2, |_, _| [2.0, -1.0, 0.25]).unwrap();
    assert_eq!(c.len(), 6);
    assert_eq!(c.mean_color(), [1.0, 0.0, 0.25]);
}

#[test]
fn png_and_ppm_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let black = ImageCloud::from_fn(1, 1, |_, _| [0.0; 3]).unwrap();
    save_image(&black, dir.path().join("black.png")).unwrap();
    let loaded = load_image(dir.path().join("black.png")).unwrap();
    assert_eq!(loaded.pixels.as_flat(), &[0.0, 0.0, 0.0]);
    assert_eq!(loaded.path.as_deref(), Some(dir.path().join("black.png").as_path()));

    let img = noisy(7, 5, 80);
    for ext in ["png", "ppm"] {
        let p = dir.path().join(format!("img.{ext}"));
        save_image(&img, &p).unwrap();
        let once = load_image(&p).unwrap();
        assert_eq!((once.width, once.height), (7, 5));
        for (u, v) in once.pixels.as_flat().iter().zip(img.pixels.as_flat()) {
            assert!((u - v).abs() <= 0.5 / 255.0 + 1e-12);
            assert_eq!((u * 255.0).round() / 255.0, *u);
        }
        save_image(&once, &p).unwrap();
        assert_eq!(load_image(&p).unwrap().pixels, once.pixels);
    }
}

#[test]
fn save_rounds_half_up() {
    let dir = tempfile::tempdir().unwrap();
    let img = ImageCloud::from_fn(1, 1, |_, _| [0.5 / 255.0, 127.5 / 255.0, 1.0]).unwrap();
    let p = dir.path().join("q.png");
    save_image(&img, &p).unwrap();
    let px: Vec<f64> = load_image(&p).unwrap().pixels.as_flat().iter().map(|v| v * 255.0).collect();
    assert_eq!(px, vec![1.0, 128.0, 255.0]);
}

#[test]
fn image_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_image(dir.path().join("x.bmp")), Err(Error::UnsupportedFormat(_))));
    let p = dir.path().join("trunc.png");
    save_image(&noisy(16, 16, 81), &p).unwrap();
    let bytes = std::fs::read(&p).unwrap();
    std::fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
    assert!(load_image(&p).is_err());
    assert!(load_image(dir.path().join("missing.png")).is_err());
}

#[test]
fn full_size_fixture_shape() {
    assert_eq!(gradient(256, 256).len(), 65536);
}

#[test]
fn palette_diversity_examples() {
    assert_eq!(palette_diversity(&ImageCloud::from_fn(4, 4, |_, _| [0.3, 0.6, 0.9]).unwrap()), 0.0);
    let img = noisy(9, 9, 82);
    let flat = img.pixels.as_flat();
    let mut direct = 0.0;
    for c in 0..3 {
        let ch: Vec<f64> = flat.iter().skip(c).step_by(3).copied().collect();
        let mu = ch.iter().sum::<f64>() / ch.len() as f64;
        direct += (ch.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / ch.len() as f64).sqrt();
    }
    assert_abs_diff_eq!(palette_diversity(&img), direct / 3.0, epsilon = 1e-14);
}

#[test]
fn identity_when_source_equals_target_with_full_batch() {
    let img = noisy(6, 6, 83);
    let spec = MinibatchSpec::new(36, Kernel::WassersteinPow).with_k(1);
    let out = transfer(&img, &img, &spec).unwrap();
    assert_eq!(out.coverage, 1.0);
    for (u, v) in out.image.pixels.as_flat().iter().zip(img.pixels.as_flat()) {
        assert_abs_diff_eq!(u, v, epsilon = 1e-12);
    }
}

#[test]
fn batch_size_one_copies_the_paired_pixel() {
    let (src, tgt) = (noisy(5, 5, 84), noisy(5, 5, 85));
    for seed in 0..10 {
        let spec = MinibatchSpec::new(1, Kernel::WassersteinPow).with_k(1).with_seed(seed);
        let out = transfer(&src, &tgt, &spec).unwrap();
        let changed: Vec<usize> = (0..src.len()).filter(|&i| out.image.pixels.point(i) != src.pixels.point(i)).collect();
        assert_eq!(changed.len(), 1);
        let p = out.image.pixels.point(changed[0]);
        assert!((0..tgt.len()).any(|j| tgt.pixels.point(j) == p));
        assert_abs_diff_eq!(out.coverage, 1.0 / 25.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.total_mass, 1.0, epsilon = 1e-15);
    }
}

#[test]
fn transfer_moves_the_mean_towards_the_target() {
    let (src, tgt) = (gradient(32, 32), warm(32, 32));
    let spec = MinibatchSpec::new(128, Kernel::WassersteinPow).with_k(60).with_seed(2);
    let out = transfer(&src, &tgt, &spec).unwrap();
    assert!(out.coverage > 0.99);
    let (mo, mt) = (out.image.mean_color(), tgt.mean_color());
    for c in 0..3 {
        assert!((mo[c] - mt[c]).abs() < 0.05, "channel {c}: {} vs {}", mo[c], mt[c]);
    }
    assert!(out.image.pixels.as_flat().iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn transfer_is_worker_count_independent() {
    let (src, tgt) = (noisy(16, 16, 86), noisy(16, 16, 87));
    let spec = MinibatchSpec::new(20, Kernel::WassersteinPow).with_k(150).with_seed(3);
    let run = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| transfer(&src, &tgt, &spec).unwrap());
    let base = run(1);
    for t in [2, 8] {
        assert_eq!(run(t).image.pixels, base.image.pixels);
    }
}

#[test]
fn transfer_validation() {
    let (src, tgt) = (noisy(4, 4, 88), noisy(3, 3, 89));
    assert!(transfer(&src, &tgt, &MinibatchSpec::new(10, Kernel::WassersteinPow)).is_err());
    assert!(transfer(&src, &tgt, &MinibatchSpec::new(10, Kernel::WassersteinPow).with_law(Law::WithReplacement)).is_ok());
    assert!(matches!(transfer(&src, &tgt, &MinibatchSpec::new(2, Kernel::Entropic)), Err(Error::UnsupportedKernel(_))));
    assert!(transfer(&src, &tgt, &MinibatchSpec::new(2, Kernel::WassersteinPow).with_p(1.0)).is_err());
}

#[test]
fn subsample_is_seeded_and_distinct() {
    let img = noisy(10, 10, 90);
    let s = subsample(&img, 30, 4).unwrap();
    assert_eq!(s, subsample(&img, 30, 4).unwrap());
    assert_ne!(s, subsample(&img, 30, 5).unwrap());
    let mut rows: Vec<Vec<u64>> = s.iter().map(|p| p.iter().map(|v| v.to_bits()).collect()).collect();
    rows.sort();
    rows.dedup();
    assert_eq!(rows.len(), 30);
    assert!(subsample(&img, 101, 4).is_err());
}
