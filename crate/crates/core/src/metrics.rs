//! Relative surface and image errors.

use crate::energy::check_depth;
use crate::error::{Error, Result};
use crate::field::{CameraIntrinsics, ScalarField};
use crate::geometry::{surface_point, Vec3};

/// Error-map threshold used for highlighting (one percent of the mean norm).
pub const DEFAULT_MAP_THRESHOLD: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub rse: f64,
    pub rie: f64,
    /// Per-pixel Euclidean distance between the surface points.
    pub error_map: ScalarField,
}

fn points(z: &ScalarField, k: &CameraIntrinsics) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(z.len());
    for row in 0..z.height() {
        let y = k.image_y(row as f64);
        for col in 0..z.width() {
            out.push(surface_point((k.image_x(col as f64), y), z.get(row, col), k.focal));
        }
    }
    out
}

fn distances(z: &ScalarField, z_gt: &ScalarField, k: &CameraIntrinsics) -> Result<(Vec<f64>, Vec<f64>)> {
    z.ensure_same_shape(z_gt)?;
    k.validate()?;
    check_depth(z_gt)?;
    let p = points(z, k);
    let g = points(z_gt, k);
    let dist = p.iter().zip(&g).map(|(a, b)| a.sub(*b).norm()).collect();
    let norms = g.iter().map(|b| b.norm()).collect();
    Ok((dist, norms))
}

fn masked_ratio(num: &[f64], den: &[f64], weight: Option<&ScalarField>) -> Result<f64> {
    let (mut n, mut d) = (0.0, 0.0);
    for (idx, (a, b)) in num.iter().zip(den).enumerate() {
        let w = weight.map_or(1.0, |m| m.data()[idx]);
        if w > 0.0 {
            n += a;
            d += b;
        }
    }
    if !(d > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok(n / d)
}

/// `Σ |S − S_gt| / Σ |S_gt|` over all pixels.
pub fn relative_surface_error(z: &ScalarField, z_gt: &ScalarField, k: &CameraIntrinsics) -> Result<f64> {
    let (dist, norms) = distances(z, z_gt, k)?;
    masked_ratio(&dist, &norms, None)
}

/// As [`relative_surface_error`], restricted to pixels with positive confidence.
pub fn relative_surface_error_masked(
    z: &ScalarField,
    z_gt: &ScalarField,
    k: &CameraIntrinsics,
    confidence: &ScalarField,
) -> Result<f64> {
    confidence.ensure_same_shape(z)?;
    let (dist, norms) = distances(z, z_gt, k)?;
    masked_ratio(&dist, &norms, Some(confidence))
}

/// `Σ |I − I_gt| / Σ |I_gt|`.
pub fn relative_image_error(i: &ScalarField, i_gt: &ScalarField) -> Result<f64> {
    i.ensure_same_shape(i_gt)?;
    let diff: Vec<f64> = i.data().iter().zip(i_gt.data()).map(|(a, b)| (a - b).abs()).collect();
    let mass: Vec<f64> = i_gt.data().iter().map(|v| v.abs()).collect();
    masked_ratio(&diff, &mass, None)
}

pub fn relative_image_error_masked(i: &ScalarField, i_gt: &ScalarField, confidence: &ScalarField) -> Result<f64> {
    i.ensure_same_shape(i_gt)?;
    confidence.ensure_same_shape(i)?;
    let diff: Vec<f64> = i.data().iter().zip(i_gt.data()).map(|(a, b)| (a - b).abs()).collect();
    let mass: Vec<f64> = i_gt.data().iter().map(|v| v.abs()).collect();
    masked_ratio(&diff, &mass, Some(confidence))
}

/// Per-pixel surface distance divided by the mean ground-truth norm, and a
/// mask (1 or 0) of the pixels above `threshold`.
pub fn surface_error_map(
    z: &ScalarField,
    z_gt: &ScalarField,
    k: &CameraIntrinsics,
    threshold: f64,
) -> Result<(ScalarField, ScalarField)> {
    let (dist, norms) = distances(z, z_gt, k)?;
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let map: Vec<f64> = dist.iter().map(|d| d / mean).collect();
    let mask = map.iter().map(|&e| if e > threshold { 1.0 } else { 0.0 }).collect();
    Ok((
        ScalarField::new(z.width(), z.height(), map)?,
        ScalarField::new(z.width(), z.height(), mask)?,
    ))
}

/// RSE, RIE and the raw distance map in one pass.
pub fn evaluate(
    z: &ScalarField,
    z_gt: &ScalarField,
    i: &ScalarField,
    i_gt: &ScalarField,
    k: &CameraIntrinsics,
) -> Result<ErrorReport> {
    let (dist, norms) = distances(z, z_gt, k)?;
    let rse = masked_ratio(&dist, &norms, None)?;
    let rie = relative_image_error(i, i_gt)?;
    Ok(ErrorReport {
        rse,
        rie,
        error_map: ScalarField::new(z.width(), z.height(), dist)?,
    })
}
