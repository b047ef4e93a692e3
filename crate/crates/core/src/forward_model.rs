//! Image formation: procedural scenes, Lambertian shading with inverse
//! square fall-off, 8-bit quantisation and sensor noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CameraIntrinsics, ScalarField};
use crate::geometry::conversion_factor;

/// Procedural ground-truth surfaces, given as Cartesian depth over the
/// image plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SceneSpec {
    /// `z = 0.5 sin(r)/r + 1.7` with `r = 10 |x|`.
    Sombrero,
    /// Fronto-parallel plane at depth `z0`.
    Plane { z0: f64 },
    /// Spherical cap of radius `radius` bulging towards the camera from a
    /// background plane at `depth`.
    Hemisphere { depth: f64, radius: f64 },
}

const SOMBRERO_AMPLITUDE: f64 = 0.5;
const SOMBRERO_OFFSET: f64 = 1.7;
const SOMBRERO_FREQUENCY: f64 = 10.0;

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SceneSpec::Sombrero => Ok(()),
            SceneSpec::Plane { z0 } if z0 > 0.0 && z0.is_finite() => Ok(()),
            SceneSpec::Plane { z0 } => Err(Error::InvalidScene(format!("plane depth must be positive, got {z0}"))),
            SceneSpec::Hemisphere { depth, radius }
                if radius > 0.0 && depth.is_finite() && radius.is_finite() && depth - radius > 0.0 =>
            {
                Ok(())
            }
            SceneSpec::Hemisphere { depth, radius } => Err(Error::InvalidScene(format!(
                "hemisphere needs radius > 0 and depth - radius > 0, got depth {depth}, radius {radius}"
            ))),
        }
    }

    /// Depth at image-plane point `(x, y)`.
    pub fn depth(&self, x: f64, y: f64) -> f64 {
        match *self {
            SceneSpec::Sombrero => {
                let r = SOMBRERO_FREQUENCY * x.hypot(y);
                let sinc = if r < 1e-8 { 1.0 - r * r / 6.0 } else { r.sin() / r };
                SOMBRERO_AMPLITUDE * sinc + SOMBRERO_OFFSET
            }
            SceneSpec::Plane { z0 } => z0,
            SceneSpec::Hemisphere { depth, radius } => {
                let rho2 = x * x + y * y;
                if rho2 < radius * radius {
                    depth - (radius * radius - rho2).sqrt()
                } else {
                    depth
                }
            }
        }
    }

    /// Analytic depth gradient `(z_x, z_y)` at `(x, y)`.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            SceneSpec::Sombrero => {
                let k = SOMBRERO_FREQUENCY;
                let r = k * x.hypot(y);
                // (r cos r - sin r) / r^3, with its series near the apex.
                let g = if r < 1e-3 {
                    -1.0 / 3.0 + r * r / 30.0
                } else {
                    (r * r.cos() - r.sin()) / (r * r * r)
                };
                let s = SOMBRERO_AMPLITUDE * k * k * g;
                (s * x, s * y)
            }
            SceneSpec::Plane { .. } => (0.0, 0.0),
            SceneSpec::Hemisphere { radius, .. } => {
                let rho2 = x * x + y * y;
                if rho2 < radius * radius {
                    let s = (radius * radius - rho2).sqrt();
                    (x / s, y / s)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

/// Samples the scene depth at every pixel of a `width`×`height` grid.
pub fn generate_scene(spec: &SceneSpec, k: &CameraIntrinsics, width: usize, height: usize) -> Result<ScalarField> {
    spec.validate()?;
    k.validate()?;
    if width < 8 || height < 8 {
        return Err(Error::InvalidDimensions { width, height });
    }
    let z = ScalarField::from_fn(width, height, |r, c| spec.depth(k.image_x(c as f64), k.image_y(r as f64)))?;
    if let Some((index, &value)) = z.data().iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::NonPositiveDepth { index, value });
    }
    Ok(z)
}

/// `W = sqrt(f^2 |∇z|^2 + (∇z·x + z)^2)`.
#[inline]
pub fn brightness_denominator(x: (f64, f64), z: f64, grad: (f64, f64), focal: f64) -> f64 {
    let a = grad.0 * x.0 + grad.1 * x.1 + z;
    (focal * focal * (grad.0 * grad.0 + grad.1 * grad.1) + a * a).sqrt()
}

/// Model irradiance `Q^3 / (z W)` at one point.
pub fn model_irradiance(x: (f64, f64), z: f64, grad: (f64, f64), focal: f64) -> Result<f64> {
    if z <= 0.0 || !z.is_finite() {
        return Err(Error::NonPositiveDepth { index: 0, value: z });
    }
    let w = brightness_denominator(x, z, grad, focal);
    if w == 0.0 {
        return Err(Error::DegenerateModel);
    }
    let q = conversion_factor(x, focal);
    Ok(q * q * q / (z * w))
}

fn check_positive_depth(z: &ScalarField) -> Result<()> {
    match z.data().iter().enumerate().find(|(_, v)| **v <= 0.0) {
        Some((index, &value)) => Err(Error::NonPositiveDepth { index, value }),
        None => Ok(()),
    }
}

/// Central-difference gradient with one-sided differences at the border.
pub fn central_gradient(z: &ScalarField, row: usize, col: usize, hx: f64, hy: f64) -> (f64, f64) {
    let (w, h) = (z.width(), z.height());
    let diff = |lo: f64, hi: f64, steps: usize, spacing: f64| (hi - lo) / (steps as f64 * spacing);
    let zx = if w == 1 {
        0.0
    } else {
        let l = col.saturating_sub(1);
        let r = (col + 1).min(w - 1);
        diff(z.get(row, l), z.get(row, r), r - l, hx)
    };
    let zy = if h == 1 {
        0.0
    } else {
        let u = row.saturating_sub(1);
        let d = (row + 1).min(h - 1);
        diff(z.get(u, col), z.get(d, col), d - u, hy)
    };
    (zx, zy)
}

/// Renders the irradiance of a depth map.
pub fn shade(z: &ScalarField, k: &CameraIntrinsics) -> Result<ScalarField> {
    k.validate()?;
    check_positive_depth(z)?;
    let mut out = Vec::with_capacity(z.len());
    for row in 0..z.height() {
        for col in 0..z.width() {
            let x = (k.image_x(col as f64), k.image_y(row as f64));
            let grad = central_gradient(z, row, col, k.hx, k.hy);
            out.push(model_irradiance(x, z.get(row, col), grad, k.focal)?);
        }
    }
    ScalarField::new(z.width(), z.height(), out)
}

/// Renders a procedural scene using its analytic depth gradient.
pub fn shade_analytic(spec: &SceneSpec, k: &CameraIntrinsics, width: usize, height: usize) -> Result<ScalarField> {
    spec.validate()?;
    k.validate()?;
    let mut out = Vec::with_capacity(width * height);
    for row in 0..height {
        for col in 0..width {
            let (x, y) = (k.image_x(col as f64), k.image_y(row as f64));
            out.push(model_irradiance((x, y), spec.depth(x, y), spec.gradient(x, y), k.focal)?);
        }
    }
    ScalarField::new(width, height, out)
}

/// An irradiance field stored as 8-bit levels with its scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantised {
    /// Integer levels in `0..=255`.
    pub levels: ScalarField,
    /// `levels / scale`.
    pub dequantised: ScalarField,
    /// Levels per unit irradiance.
    pub scale: f64,
}

/// Maps the brightest pixel to level 255 and rounds everything else.
pub fn quantise_8bit(i: &ScalarField) -> Result<Quantised> {
    if let Some((index, &value)) = i.data().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NonPositiveIrradiance { index, value });
    }
    let max = i.max();
    if max <= 0.0 {
        return Err(Error::NonPositiveIrradiance { index: 0, value: max });
    }
    let scale = 255.0 / max;
    let levels = i.map(|v| (v * scale).round().min(255.0))?;
    let dequantised = levels.map(|l| l / scale)?;
    Ok(Quantised {
        levels,
        dequantised,
        scale,
    })
}

/// Converts 8-bit levels back to irradiance, flooring dark pixels at level 1.
pub fn irradiance_from_levels(levels: &ScalarField, scale: f64) -> Result<ScalarField> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidConfig(format!("irradiance scale must be positive, got {scale}")));
    }
    levels.map(|l| l.max(1.0) / scale)
}

/// Zero-mean Gaussian samples, one per pixel in row-major order.
///
/// Every row draws from its own ChaCha stream keyed by `(seed, row)`, so the
/// samples do not depend on how rows are scheduled across threads.
pub fn gaussian_samples(width: usize, height: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise sigma must be non-negative, got {sigma}")));
    }
    let mut out = vec![0.0; width * height];
    if sigma == 0.0 || width == 0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated above");
    out.par_chunks_mut(width).enumerate().for_each(|(row, chunk)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(row as u64);
        for v in chunk {
            *v = normal.sample(&mut rng);
        }
    });
    Ok(out)
}

/// Adds seeded Gaussian noise to 8-bit levels, then rounds and clamps to `[0, 255]`.
pub fn add_gaussian_noise(levels: &ScalarField, sigma: f64, seed: u64) -> Result<ScalarField> {
    let noise = gaussian_samples(levels.width(), levels.height(), sigma, seed)?;
    let data = levels
        .data()
        .iter()
        .zip(&noise)
        .map(|(&l, &n)| (l + n).round().clamp(0.0, 255.0))
        .collect();
    ScalarField::new(levels.width(), levels.height(), data)
}
