//! Differential geometry of the perspective camera with a point light at the
//! optical centre, written in terms of the Cartesian depth `z`.
//!
//! All functions take image-plane coordinates `x = (x, y)` (see
//! [`crate::field::pixel_to_image`]) and, where needed, the depth gradient
//! `(z_x, z_y)` with respect to those coordinates.

use crate::error::{Error, Result};

/// A plain 3-vector. Normals are unnormalised unless stated otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Point of the surface in the camera frame; the third component is `-z`.
pub type SurfacePoint = Vec3;

/// Unnormalised surface normal direction.
pub type NormalVector = Vec3;

/// Ratio between Cartesian and radial depth, `f / sqrt(|x|^2 + f^2)`.
#[inline]
pub fn conversion_factor(x: (f64, f64), focal: f64) -> f64 {
    focal / (x.0 * x.0 + x.1 * x.1 + focal * focal).sqrt()
}

/// Cartesian depth from the radial depth factor `u` (radial distance `u f`).
pub fn radial_to_cartesian(u: f64, x: (f64, f64), focal: f64) -> f64 {
    conversion_factor(x, focal) * u * focal
}

/// Radial depth factor `u` from the Cartesian depth `z`.
pub fn cartesian_to_radial(z: f64, x: (f64, f64), focal: f64) -> f64 {
    z / (conversion_factor(x, focal) * focal)
}

/// `S(x, z) = (z x / f, z y / f, -z)`.
pub fn surface_point(x: (f64, f64), z: f64, focal: f64) -> SurfacePoint {
    Vec3::new(z * x.0 / focal, z * x.1 / focal, -z)
}

/// Cross product of the image-coordinate tangents `S_x × S_y`.
pub fn surface_normal(x: (f64, f64), z: f64, grad: (f64, f64), focal: f64) -> NormalVector {
    let (zx, zy) = grad;
    let slope = zx * x.0 + zy * x.1;
    Vec3::new(zx * z / focal, zy * z / focal, z * (slope + z) / (focal * focal))
}

fn tangent_denominators(x: (f64, f64), z: f64, grad: (f64, f64)) -> Result<(f64, f64)> {
    let dx = z + grad.0 * x.0;
    let dy = z + grad.1 * x.1;
    if dx == 0.0 || dy == 0.0 || !dx.is_finite() || !dy.is_finite() {
        return Err(Error::DegenerateTangent);
    }
    Ok((dx, dy))
}

/// Tangents `S_X`, `S_Y` obtained by differentiating with respect to the
/// world coordinates `X` and `Y` through the chain rule.
pub fn world_tangents(x: (f64, f64), z: f64, grad: (f64, f64), focal: f64) -> Result<(Vec3, Vec3)> {
    let (zx, zy) = grad;
    let (dx, dy) = tangent_denominators(x, z, grad)?;
    let sx = Vec3::new(1.0, zx * x.1 / dx, -zx * focal / dx);
    let sy = Vec3::new(zy * x.0 / dy, 1.0, -zy * focal / dy);
    Ok((sx, sy))
}

/// Normal from the world-coordinate tangents, `S_X × S_Y`.
///
/// Parallel to [`surface_normal`], scaled by `f^2 / ((z + z_x x)(z + z_y y))`.
pub fn surface_normal_alt(x: (f64, f64), z: f64, grad: (f64, f64), focal: f64) -> Result<NormalVector> {
    let (sx, sy) = world_tangents(x, z, grad, focal)?;
    Ok(sx.cross(sy))
}

/// The orthographic-style normal `(-Z_X, -Z_Y, 1)` with `Z_X`, `Z_Y` read off
/// the world tangents. It drops the cross derivatives `∂X/∂Y`, `∂Y/∂X`, so
/// it is only correct on the optical axis or for fronto-parallel surfaces.
/// Never used by the solver.
pub fn surface_normal_ortho_mixed(
    x: (f64, f64),
    z: f64,
    grad: (f64, f64),
    focal: f64,
) -> Result<NormalVector> {
    let (sx, sy) = world_tangents(x, z, grad, focal)?;
    Ok(Vec3::new(-sx.z, -sy.z, 1.0))
}

/// Unit direction from the surface point towards the light at the optical centre.
pub fn light_direction(x: (f64, f64), focal: f64) -> Vec3 {
    let n = (x.0 * x.0 + x.1 * x.1 + focal * focal).sqrt();
    Vec3::new(-x.0 / n, -x.1 / n, focal / n)
}
