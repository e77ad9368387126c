use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ImageBoW, Keypoint};

/// Keypoint-level image transforms. Affine transforms act about the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformSpec {
    /// Counterclockwise rotation by `theta` radians.
    Rotate { theta: f64 },
    Scale { s: f64 },
    Translate { dx: f64, dy: f64 },
    /// `x' = x + kx·y`.
    Shear { kx: f64 },
    /// Drops `⌊fraction·n⌋` keypoints chosen by `seed`.
    Occlude { fraction: f64, seed: u64 },
    /// Redraws every coordinate uniformly over the image's own extent.
    Scatter { seed: u64 },
    /// Pastes the image, shifted by `offset`, into `host`: host keypoints
    /// inside the pasted bounding box are removed and the pasted keypoints
    /// appended. The result takes the host's id.
    Embed { host: ImageBoW, offset: (f64, f64) },
}

impl TransformSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            TransformSpec::Rotate { theta } if !theta.is_finite() => bad(format!("rotation {theta}")),
            TransformSpec::Scale { s } if !(s > 0.0 && s.is_finite()) => bad(format!("scale must be positive, got {s}")),
            TransformSpec::Translate { dx, dy } if !(dx.is_finite() && dy.is_finite()) => {
                bad(format!("translation ({dx}, {dy})"))
            }
            TransformSpec::Shear { kx } if !kx.is_finite() => bad(format!("shear {kx}")),
            TransformSpec::Occlude { fraction, .. } if !(0.0..1.0).contains(&fraction) => {
                bad(format!("occlusion fraction must be in [0, 1), got {fraction}"))
            }
            TransformSpec::Embed { offset: (dx, dy), .. } if !(dx.is_finite() && dy.is_finite()) => {
                bad(format!("offset ({dx}, {dy})"))
            }
            _ => Ok(()),
        }
    }
}

fn map_coords(image: &ImageBoW, f: impl Fn(f64, f64) -> (f64, f64)) -> ImageBoW {
    let keypoints = image
        .keypoints
        .iter()
        .map(|k| {
            let (x, y) = f(k.x, k.y);
            Keypoint::new(x, y, k.payload)
        })
        .collect();
    ImageBoW::new(image.image_id.clone(), image.codebook_size, keypoints)
}

pub fn apply_transform(image: &ImageBoW, t: &TransformSpec) -> Result<ImageBoW> {
    t.validate()?;
    match t {
        &TransformSpec::Rotate { theta } => {
            let (sin, cos) = theta.sin_cos();
            Ok(map_coords(image, |x, y| (cos * x - sin * y, sin * x + cos * y)))
        }
        &TransformSpec::Scale { s } => Ok(map_coords(image, |x, y| (s * x, s * y))),
        &TransformSpec::Translate { dx, dy } => Ok(map_coords(image, |x, y| (x + dx, y + dy))),
        &TransformSpec::Shear { kx } => Ok(map_coords(image, |x, y| (x + kx * y, y))),
        &TransformSpec::Occlude { fraction, seed } => {
            let n = image.len();
            let drop = (fraction * n as f64).floor() as usize;
            if n - drop < 2 {
                return Err(Error::InvalidParameter(format!(
                    "occluding {drop} of {n} keypoints leaves fewer than 2"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut dropped = vec![false; n];
            for i in sample(&mut rng, n, drop) {
                dropped[i] = true;
            }
            let keypoints = image
                .keypoints
                .iter()
                .zip(&dropped)
                .filter(|(_, &d)| !d)
                .map(|(k, _)| *k)
                .collect();
            Ok(ImageBoW::new(image.image_id.clone(), image.codebook_size, keypoints))
        }
        &TransformSpec::Scatter { seed } => {
            let Some((x0, y0, x1, y1)) = image.extent() else {
                return Ok(image.clone());
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(scatter_within(image, (x0, y0, x1, y1), &mut rng))
        }
        TransformSpec::Embed { host, offset } => embed(image, host, *offset),
    }
}

/// Redraws coordinates uniformly in the box `(x0, y0, x1, y1)`.
pub(crate) fn scatter_within(image: &ImageBoW, (x0, y0, x1, y1): (f64, f64, f64, f64), rng: &mut impl Rng) -> ImageBoW {
    let keypoints = image
        .keypoints
        .iter()
        .map(|k| {
            let x = if x1 > x0 { rng.random_range(x0..x1) } else { x0 };
            let y = if y1 > y0 { rng.random_range(y0..y1) } else { y0 };
            Keypoint::new(x, y, k.payload)
        })
        .collect();
    ImageBoW::new(image.image_id.clone(), image.codebook_size, keypoints)
}

fn embed(plant: &ImageBoW, host: &ImageBoW, (dx, dy): (f64, f64)) -> Result<ImageBoW> {
    if plant.codebook_size != host.codebook_size {
        return Err(Error::Incompatible(format!(
            "cannot embed codebook size {} into {}",
            plant.codebook_size, host.codebook_size
        )));
    }
    let shifted = map_coords(plant, |x, y| (x + dx, y + dy));
    let mut keypoints = match shifted.extent() {
        Some((x0, y0, x1, y1)) => host
            .keypoints
            .iter()
            .filter(|k| !(k.x >= x0 && k.x <= x1 && k.y >= y0 && k.y <= y1))
            .copied()
            .collect(),
        None => host.keypoints.clone(),
    };
    keypoints.extend(shifted.keypoints);
    Ok(ImageBoW::new(host.image_id.clone(), host.codebook_size, keypoints))
}
