//! The discrete variational energy.
//!
//! `E(z) = hx hy Σ_p [ c_p D_p + α S_p ]` where the data term `D` is the
//! squared reprojection residual evaluated with upwind gradients and the
//! smoothness term `S = Ψ(z_xx² + 2 z_xy² + z_yy²)` uses central second
//! differences. Values outside the grid are taken from the nearest border
//! pixel (mirroring about the cell boundary).

use crate::error::{Error, Result};
use crate::field::{CameraIntrinsics, ScalarField};
use crate::forward_model::brightness_denominator;
use crate::geometry::conversion_factor;
use crate::upwind::UpwindDirections;

/// Penaliser applied to the squared Frobenius norm of the Hessian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PenaliserKind {
    Quadratic,
    /// `Ψ(s²) = 2λ² sqrt(1 + s²/λ²)`.
    Charbonnier { lambda: f64 },
}

impl PenaliserKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PenaliserKind::Charbonnier { lambda } if !(lambda > 0.0 && lambda.is_finite()) => Err(
                Error::InvalidConfig(format!("charbonnier lambda must be positive, got {lambda}")),
            ),
            _ => Ok(()),
        }
    }

    /// `(Ψ(s²), Ψ'(s²))`.
    #[inline]
    pub fn penalise(&self, s_sq: f64) -> (f64, f64) {
        match *self {
            PenaliserKind::Quadratic => (s_sq, 1.0),
            PenaliserKind::Charbonnier { lambda } => {
                let l2 = lambda * lambda;
                let root = (1.0 + s_sq / l2).sqrt();
                (2.0 * l2 * root, 1.0 / root)
            }
        }
    }

    #[inline]
    pub fn derivative(&self, s_sq: f64) -> f64 {
        match *self {
            PenaliserKind::Quadratic => 1.0,
            PenaliserKind::Charbonnier { lambda } => 1.0 / (1.0 + s_sq / (lambda * lambda)).sqrt(),
        }
    }
}

/// Value and derivative of the penaliser at `s_sq`.
pub fn penalise(s_sq: f64, kind: PenaliserKind) -> (f64, f64) {
    kind.penalise(s_sq)
}

/// `Ψ(z_xx² + 2 z_xy² + z_yy²)`.
pub fn smoothness_density(hess: (f64, f64, f64), kind: PenaliserKind) -> f64 {
    let (xx, xy, yy) = hess;
    kind.penalise(xx * xx + 2.0 * xy * xy + yy * yy).0
}

/// Squared residual between the observed irradiance `i_val` and the model.
pub fn data_residual(x: (f64, f64), z: f64, grad: (f64, f64), i_val: f64, focal: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::NonPositiveDepth { index: 0, value: z });
    }
    let w = brightness_denominator(x, z, grad, focal);
    if w == 0.0 {
        return Err(Error::DegenerateModel);
    }
    let q = conversion_factor(x, focal);
    let r = i_val - q * q * q / (z * w);
    Ok(r * r)
}

/// Central second differences `(z_xx, z_xy, z_yy)` at a pixel.
pub fn hessian(z: &ScalarField, row: usize, col: usize, hx: f64, hy: f64) -> (f64, f64, f64) {
    let (w, h) = (z.width(), z.height());
    let l = col.saturating_sub(1);
    let r = (col + 1).min(w - 1);
    let u = row.saturating_sub(1);
    let d = (row + 1).min(h - 1);
    let c = z.get(row, col);
    let zxx = (z.get(row, r) - 2.0 * c + z.get(row, l)) / (hx * hx);
    let zyy = (z.get(d, col) - 2.0 * c + z.get(u, col)) / (hy * hy);
    let zxy = (z.get(d, r) - z.get(d, l) - z.get(u, r) + z.get(u, l)) / (4.0 * hx * hy);
    (zxx, zxy, zyy)
}

/// Everything the energy needs besides the depth and the image.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergySettings {
    pub alpha: f64,
    pub penaliser: PenaliserKind,
    pub confidence: ScalarField,
    pub intrinsics: CameraIntrinsics,
}

impl EnergySettings {
    /// Settings with full confidence everywhere.
    pub fn uniform(alpha: f64, penaliser: PenaliserKind, intrinsics: CameraIntrinsics, width: usize, height: usize) -> Result<Self> {
        Ok(Self {
            alpha,
            penaliser,
            confidence: ScalarField::filled(width, height, 1.0)?,
            intrinsics,
        })
    }

    pub fn validate(&self, image: &ScalarField) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        self.penaliser.validate()?;
        self.intrinsics.validate()?;
        image.ensure_same_shape(&self.confidence)?;
        validate_confidence(&self.confidence)
    }
}

pub(crate) fn validate_confidence(c: &ScalarField) -> Result<()> {
    match c.data().iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        Some((index, &value)) => Err(Error::InvalidConfidence { index, value }),
        None => Ok(()),
    }
}

pub(crate) fn check_depth(z: &ScalarField) -> Result<()> {
    match z.data().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        Some((index, &value)) => Err(Error::NonPositiveDepth { index, value }),
        None => Ok(()),
    }
}

/// Data and smoothness parts of the energy, both already weighted
/// (confidence, α) and multiplied by the cell area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParts {
    pub data: f64,
    pub smoothness: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.data + self.smoothness
    }
}

/// Energy of `z` with upwind directions derived from `z` itself.
pub fn total_energy(z: &ScalarField, i: &ScalarField, s: &EnergySettings) -> Result<f64> {
    Ok(energy_parts(z, i, s)?.total())
}

pub fn energy_parts(z: &ScalarField, i: &ScalarField, s: &EnergySettings) -> Result<EnergyParts> {
    let k = &s.intrinsics;
    let dirs = UpwindDirections::from_depth(z, k.hx, k.hy);
    energy_parts_frozen(z, i, s, &dirs)
}

/// Energy of `z` with externally fixed upwind directions.
pub fn total_energy_frozen(z: &ScalarField, i: &ScalarField, s: &EnergySettings, dirs: &UpwindDirections) -> Result<f64> {
    Ok(energy_parts_frozen(z, i, s, dirs)?.total())
}

pub fn energy_parts_frozen(
    z: &ScalarField,
    i: &ScalarField,
    s: &EnergySettings,
    dirs: &UpwindDirections,
) -> Result<EnergyParts> {
    s.validate(i)?;
    z.ensure_same_shape(i)?;
    check_depth(z)?;
    if dirs.width() != z.width() || dirs.height() != z.height() {
        return Err(Error::ShapeMismatch {
            expected: (z.width(), z.height()),
            actual: (dirs.width(), dirs.height()),
        });
    }
    let k = &s.intrinsics;
    let mut data = 0.0;
    let mut smooth = 0.0;
    for row in 0..z.height() {
        let y = k.image_y(row as f64);
        for col in 0..z.width() {
            let p = row * z.width() + col;
            let x = k.image_x(col as f64);
            let c = s.confidence.data()[p];
            if c > 0.0 {
                let grad = dirs.gradient(z, row, col, k.hx, k.hy);
                data += c * data_residual((x, y), z.data()[p], grad, i.data()[p], k.focal)?;
            }
            if s.alpha > 0.0 {
                smooth += smoothness_density(hessian(z, row, col, k.hx, k.hy), s.penaliser);
            }
        }
    }
    let area = k.cell_area();
    Ok(EnergyParts {
        data: data * area,
        smoothness: s.alpha * smooth * area,
    })
}
