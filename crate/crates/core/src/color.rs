//! Barycentric color transfer between full images with incomplete minibatch plans.

use std::path::{Path, PathBuf};

use image::{ImageFormat, Rgb, RgbImage};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::minibatch::{reweight_raw, Kernel, MinibatchSpec, PairDraws};
use crate::ot::{batch_cost, exact_raw};
use crate::types::{PointCloud, ProbVector};

/// An RGB image as an `n x 3` point cloud with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageCloud {
    pub width: usize,
    pub height: usize,
    pub pixels: PointCloud,
    pub path: Option<PathBuf>,
}

impl ImageCloud {
    pub fn new(width: usize, height: usize, pixels: PointCloud) -> Result<Self> {
        if pixels.dim() != 3 || pixels.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} points of dimension {} for a {width}x{height} RGB image",
                pixels.len(),
                pixels.dim()
            )));
        }
        if pixels.as_flat().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("channel values must lie in [0, 1]".into()));
        }
        Ok(Self { width, height, pixels, path: None })
    }

    /// Builds an image from a function of `(x, y)` returning RGB in `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut coords = Vec::with_capacity(width * height * 3);
        for yy in 0..height {
            for xx in 0..width {
                coords.extend(f(xx, yy).iter().map(|v| v.clamp(0.0, 1.0)));
            }
        }
        Self::new(width, height, PointCloud::from_flat(3, coords)?)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn mean_color(&self) -> [f64; 3] {
        let m = self.pixels.mean();
        [m[0], m[1], m[2]]
    }
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => Ok(ImageFormat::Png),
        Some("ppm") | Some("pnm") => Ok(ImageFormat::Pnm),
        other => Err(Error::UnsupportedFormat(format!("expected .png or .ppm, got {other:?}"))),
    }
}

/// Reads an 8-bit PNG or PPM image and scales channels to `[0, 1]`.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageCloud> {
    let path = path.as_ref();
    let format = format_for(path)?;
    let bytes = std::fs::read(path)?;
    let img = image::load_from_memory_with_format(&bytes, format).map_err(|e| match e {
        image::ImageError::Unsupported(u) => Error::UnsupportedFormat(u.to_string()),
        other => Error::Image(other),
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let coords: Vec<f64> = rgb.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect();
    let mut cloud = ImageCloud::new(w, h, PointCloud::from_flat(3, coords)?)?;
    cloud.path = Some(path.to_path_buf());
    Ok(cloud)
}

/// Round-half-up quantization of a clamped channel value.
fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Writes a PNG or PPM (by extension), clamping to `[0, 1]` and quantizing to 8 bits.
pub fn save_image(cloud: &ImageCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = format_for(path)?;
    let mut img = RgbImage::new(cloud.width as u32, cloud.height as u32);
    for (k, p) in cloud.pixels.iter().enumerate() {
        let (x, y) = ((k % cloud.width) as u32, (k / cloud.width) as u32);
        img.put_pixel(x, y, Rgb([quantize(p[0]), quantize(p[1]), quantize(p[2])]));
    }
    img.save_with_format(path, format)?;
    Ok(())
}

/// Mean per-channel standard deviation of the pixel colors.
pub fn palette_diversity(cloud: &ImageCloud) -> f64 {
    // Shifted by the first pixel so that a constant image gives exactly zero.
    let n = cloud.len() as f64;
    let origin = cloud.pixels.point(0);
    let (mut s1, mut s2) = ([0.0; 3], [0.0; 3]);
    for p in cloud.pixels.iter() {
        for c in 0..3 {
            let d = p[c] - origin[c];
            s1[c] += d;
            s2[c] += d * d;
        }
    }
    (0..3).map(|c| (s2[c] / n - (s1[c] / n).powi(2)).max(0.0).sqrt()).sum::<f64>() / 3.0
}

#[derive(Debug, Clone)]
pub struct TransferResult {
    pub image: ImageCloud,
    /// Fraction of source pixels visited by at least one batch.
    pub coverage: f64,
    /// Total plan mass accumulated over all batches (one per batch).
    pub total_mass: f64,
}

/// Batches solved together before their plans are folded into the accumulators.
const CHUNK: usize = 64;

/// Maps every visited source pixel to the plan-weighted mean of the target
/// colors it was matched with, across `k` batch pairs of size `m`.
///
/// Only `O(n + m^2)` memory is used: per-pixel color and mass accumulators
/// plus the batch problems in flight. Unvisited pixels keep their color.
pub fn transfer(src: &ImageCloud, tgt: &ImageCloud, spec: &MinibatchSpec) -> Result<TransferResult> {
    if !matches!(spec.kernel, Kernel::WassersteinPow | Kernel::Wasserstein) || spec.p != 2.0 {
        return Err(Error::UnsupportedKernel("color transfer uses the squared Euclidean exact kernel (p = 2)".into()));
    }
    let (ns, nt) = (src.len(), tgt.len());
    spec.validate(ns, nt)?;
    let a = ProbVector::uniform(ns);
    let b = ProbVector::uniform(nt);
    let draws = PairDraws::new(spec, &a, &b, 0)?;

    let mut color = vec![0.0; ns * 3];
    let mut mass = vec![0.0; ns];
    for start in (0..spec.k).step_by(CHUNK) {
        let end = (start + CHUNK).min(spec.k);
        let solved: Vec<(Vec<usize>, Vec<usize>, Vec<(usize, usize, f64)>)> = (start..end)
            .into_par_iter()
            .map(|t| {
                let (i, j) = draws.draw(t);
                let wa = reweight_raw(spec.reweight, a.as_slice(), &i);
                let wb = reweight_raw(spec.reweight, b.as_slice(), &j);
                let c = batch_cost(&src.pixels, &i, &tgt.pixels, &j, 2.0);
                let (_, plan, _) = exact_raw(&wa, &wb, &c);
                (i, j, plan)
            })
            .collect();
        for (i, j, plan) in &solved {
            for &(r, s, v) in plan {
                let (pi, tj) = (i[r], tgt.pixels.point(j[s]));
                mass[pi] += v;
                for c in 0..3 {
                    color[pi * 3 + c] += v * tj[c];
                }
            }
        }
    }

    let mut out = src.pixels.clone();
    let mut visited = 0usize;
    for (pi, &w) in mass.iter().enumerate() {
        if w > 0.0 {
            visited += 1;
            let p = out.point_mut(pi);
            for c in 0..3 {
                p[c] = (color[pi * 3 + c] / w).clamp(0.0, 1.0);
            }
        }
    }
    let image = ImageCloud { width: src.width, height: src.height, pixels: out, path: None };
    Ok(TransferResult { image, coverage: visited as f64 / ns as f64, total_mass: crate::numeric::tree_sum(&mass) })
}

/// A uniformly random subset of `count` pixels, as a point cloud.
pub fn subsample(cloud: &ImageCloud, count: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 || count > cloud.len() {
        return Err(Error::InvalidParameter(format!("cannot take {count} of {} pixels", cloud.len())));
    }
    let mut rng = crate::rng::Streams::new(seed, "pixel-subsample", 0).get(0);
    let mut idx = rand::seq::index::sample(&mut rng, cloud.len(), count).into_vec();
    idx.sort_unstable();
    Ok(cloud.pixels.select(&idx))
}
