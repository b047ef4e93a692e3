//! Grid containers, camera intrinsics and the pyramid resampling operators.
//!
//! Storage is row-major. A pixel is addressed as `(row, col)`, which maps to
//! the pixel coordinate pair `(a, b) = (col, row)`; pixel centres sit on
//! integer coordinates.

use crate::error::{Error, Result};

/// Rectangular grid of finite real values.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if data.len() != width * height {
            return Err(Error::DataLength {
                expected: width * height,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a field by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self::new(width, height, data)
    }

    /// Constructor for internal callers that already guarantee the invariants.
    pub(crate) fn from_parts_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn same_shape(&self, other: &ScalarField) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn ensure_same_shape(&self, other: &ScalarField) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: (self.width, self.height),
                actual: (other.width, other.height),
            })
        }
    }

    /// Applies `f` pointwise, rejecting non-finite results.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Copies the `width`×`height` window whose top-left pixel is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || row + height > self.height || col + width > self.width {
            return Err(Error::InvalidDimensions { width, height });
        }
        let mut data = Vec::with_capacity(width * height);
        for r in row..row + height {
            let start = r * self.width + col;
            data.extend_from_slice(&self.data[start..start + width]);
        }
        Ok(Self::from_parts_unchecked(width, height, data))
    }
}

/// Calibration of a pinhole camera with axis-aligned pixels and no skew.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics {
    pub focal: f64,
    pub hx: f64,
    pub hy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(focal: f64, hx: f64, hy: f64, cx: f64, cy: f64) -> Result<Self> {
        let k = Self {
            focal,
            hx,
            hy,
            cx,
            cy,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidIntrinsics(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("focal", self.focal)?;
        positive("hx", self.hx)?;
        positive("hy", self.hy)?;
        if !self.cx.is_finite() || !self.cy.is_finite() {
            return Err(Error::InvalidIntrinsics("principal point must be finite".into()));
        }
        Ok(())
    }

    /// Image-plane x coordinate of pixel column `a`.
    #[inline]
    pub fn image_x(&self, a: f64) -> f64 {
        self.hx * a - self.hx * self.cx
    }

    /// Image-plane y coordinate of pixel row `b`.
    #[inline]
    pub fn image_y(&self, b: f64) -> f64 {
        self.hy * b - self.hy * self.cy
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }
}

/// Maps pixel coordinates `(a, b)` to image-plane coordinates `(x, y)`.
pub fn pixel_to_image(pixel: (f64, f64), k: &CameraIntrinsics) -> (f64, f64) {
    (k.image_x(pixel.0), k.image_y(pixel.1))
}

/// Inverse of [`pixel_to_image`].
pub fn image_to_pixel(point: (f64, f64), k: &CameraIntrinsics) -> (f64, f64) {
    (point.0 / k.hx + k.cx, point.1 / k.hy + k.cy)
}

/// Intrinsics of pyramid level `level` for downsampling factor `eta`.
///
/// Grid spacings grow by `eta^-level` while the principal point shrinks by
/// `eta^level`, so the image plane keeps its extent.
pub fn scale_intrinsics(k: &CameraIntrinsics, level: u32, eta: f64) -> Result<CameraIntrinsics> {
    check_eta(eta)?;
    let shrink = eta.powi(level as i32);
    Ok(CameraIntrinsics {
        focal: k.focal,
        hx: k.hx / shrink,
        hy: k.hy / shrink,
        cx: k.cx * shrink,
        cy: k.cy * shrink,
    })
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidFactor(eta))
    }
}

/// Output size of a downsampling step: `round(n * eta)`.
pub fn scaled_len(n: usize, eta: f64) -> usize {
    (n as f64 * eta).round() as usize
}

/// Area-weighted downsampling by `eta` in both directions.
///
/// Each output cell averages the input cells it covers, weighted by overlap,
/// so constant fields stay constant and the mean is preserved.
pub fn downsample(f: &ScalarField, eta: f64) -> Result<ScalarField> {
    check_eta(eta)?;
    let width = scaled_len(f.width, eta);
    let height = scaled_len(f.height, eta);
    resample_area(f, width, height)
}

/// Area-weighted resampling to an explicit (smaller or equal) size.
pub fn resample_area(f: &ScalarField, width: usize, height: usize) -> Result<ScalarField> {
    if width == 0 || height == 0 || width > f.width || height > f.height {
        return Err(Error::InvalidDimensions { width, height });
    }
    let wx = overlap_weights(f.width, width);
    let wy = overlap_weights(f.height, height);

    // Rows first, then columns; both passes are separable averages.
    let mut tmp = vec![0.0; f.height * width];
    for row in 0..f.height {
        let src = &f.data[row * f.width..(row + 1) * f.width];
        for (j, taps) in wx.iter().enumerate() {
            tmp[row * width + j] = taps.iter().map(|&(i, w)| w * src[i]).sum();
        }
    }
    let mut out = vec![0.0; width * height];
    for (r, taps) in wy.iter().enumerate() {
        for col in 0..width {
            out[r * width + col] = taps.iter().map(|&(i, w)| w * tmp[i * width + col]).sum();
        }
    }
    Ok(ScalarField::from_parts_unchecked(width, height, out))
}

/// For each of `m` output cells, the `(input index, weight)` taps of the
/// `n` input cells it overlaps. Weights of every output cell sum to one.
fn overlap_weights(n: usize, m: usize) -> Vec<Vec<(usize, f64)>> {
    let ratio = n as f64 / m as f64;
    (0..m)
        .map(|j| {
            let lo = j as f64 * ratio;
            let hi = (j + 1) as f64 * ratio;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(n);
            let mut taps: Vec<(usize, f64)> = (first..last)
                .filter_map(|i| {
                    let overlap = (hi.min((i + 1) as f64) - lo.max(i as f64)).max(0.0);
                    (overlap > 0.0).then_some((i, overlap))
                })
                .collect();
            let total: f64 = taps.iter().map(|t| t.1).sum();
            for t in &mut taps {
                t.1 /= total;
            }
            taps
        })
        .collect()
}

/// Bilinear upsampling with clamped borders, aligning pixel centres.
pub fn upsample(f: &ScalarField, new_width: usize, new_height: usize) -> Result<ScalarField> {
    if new_width < f.width || new_height < f.height {
        return Err(Error::Shrinking {
            from: (f.width, f.height),
            to: (new_width, new_height),
        });
    }
    let sx = f.width as f64 / new_width as f64;
    let sy = f.height as f64 / new_height as f64;
    let taps = |n: usize, s: f64, j: usize| -> (usize, usize, f64) {
        let u = ((j as f64 + 0.5) * s - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = u.floor() as usize;
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, u - i0 as f64)
    };
    let cols: Vec<_> = (0..new_width).map(|j| taps(f.width, sx, j)).collect();
    let mut out = Vec::with_capacity(new_width * new_height);
    for r in 0..new_height {
        let (r0, r1, ty) = taps(f.height, sy, r);
        for &(c0, c1, tx) in &cols {
            let top = lerp(f.get(r0, c0), f.get(r0, c1), tx);
            let bottom = lerp(f.get(r1, c0), f.get(r1, c1), tx);
            out.push(lerp(top, bottom, ty));
        }
    }
    Ok(ScalarField::from_parts_unchecked(new_width, new_height, out))
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    // Exact for a == b, which keeps constant fields constant.
    if a == b {
        a
    } else {
        a + (b - a) * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn intrinsics() -> CameraIntrinsics {
        CameraIntrinsics::new(1.0, 1.0 / 200.0, 1.0 / 200.0, 128.0, 128.0).unwrap()
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(ScalarField::new(0, 3, vec![]).is_err());
        assert!(ScalarField::new(2, 2, vec![1.0; 3]).is_err());
        assert!(ScalarField::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn principal_point_maps_to_origin() {
        assert_eq!(pixel_to_image((128.0, 128.0), &intrinsics()), (0.0, 0.0));
    }

    #[test]
    fn pixel_to_image_examples() {
        let (x, y) = pixel_to_image((328.0, 128.0), &intrinsics());
        assert!((x - 1.0).abs() < 1e-12 && y == 0.0);

        let suzanne = CameraIntrinsics::new(35.0, 1.0 / 16.0, 9.0 / 128.0, 256.0, 128.0).unwrap();
        let (x, y) = pixel_to_image((0.0, 0.0), &suzanne);
        assert!((x + 16.0).abs() < 1e-12);
        assert!((y + 9.0).abs() < 1e-12);
    }

    #[test]
    fn scale_intrinsics_examples() {
        let k = CameraIntrinsics::new(1.0, 0.005, 0.005, 128.0, 128.0).unwrap();
        assert_eq!(scale_intrinsics(&k, 0, 0.8).unwrap(), k);
        let k1 = scale_intrinsics(&k, 1, 0.8).unwrap();
        assert!((k1.hx - 0.00625).abs() < 1e-15);
        assert!((k1.cx - 102.4).abs() < 1e-12);
        assert_eq!(k1.focal, 1.0);
        assert!(scale_intrinsics(&k, 1, 1.0).is_err());
        assert!(scale_intrinsics(&k, 1, 0.0).is_err());
    }

    #[test]
    fn downsample_examples() {
        let f = ScalarField::filled(13, 7, 5.0).unwrap();
        let d = downsample(&f, 0.77).unwrap();
        assert!(d.data().iter().all(|&v| (v - 5.0).abs() < 1e-12));

        let f = ScalarField::new(2, 1, vec![0.0, 1.0]).unwrap();
        let d = resample_area(&f, 1, 1).unwrap();
        assert_eq!(d.data(), &[0.5]);

        // 4x4 ramp halves to its 2x2 block means.
        let ramp = ScalarField::from_fn(4, 4, |r, c| (4 * r + c) as f64).unwrap();
        let d = downsample(&ramp, 0.5).unwrap();
        let mut expected = Vec::new();
        for br in 0..2 {
            for bc in 0..2 {
                let mut s = 0.0;
                for r in 0..2 {
                    for c in 0..2 {
                        s += ramp.get(2 * br + r, 2 * bc + c);
                    }
                }
                expected.push(s / 4.0);
            }
        }
        for (a, b) in d.data().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(downsample(&ScalarField::filled(1, 1, 1.0).unwrap(), 0.4).is_err());
    }

    #[test]
    fn upsample_examples() {
        let f = ScalarField::filled(3, 2, 1.25).unwrap();
        let u = upsample(&f, 7, 5).unwrap();
        assert!(u.data().iter().all(|&v| v == 1.25));

        let f = ScalarField::new(2, 1, vec![0.0, 1.0]).unwrap();
        let u = upsample(&f, 4, 1).unwrap();
        let d = u.data();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[3], 1.0);
        assert!(d.windows(2).all(|w| w[0] <= w[1]));

        assert!(upsample(&f, 1, 1).is_err());
    }

    #[test]
    fn upsample_matches_direct_bilinear_formula() {
        let f = ScalarField::new(2, 2, vec![1.0, 3.0, -2.0, 5.0]).unwrap();
        let u = upsample(&f, 4, 4).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                // Centre-aligned source coordinates, clamped to [0, 1].
                let x: f64 = ((c as f64 + 0.5) * 0.5 - 0.5).clamp(0.0, 1.0);
                let y: f64 = ((r as f64 + 0.5) * 0.5 - 0.5).clamp(0.0, 1.0);
                let expected = (1.0 - x) * (1.0 - y) * 1.0
                    + x * (1.0 - y) * 3.0
                    + (1.0 - x) * y * -2.0
                    + x * y * 5.0;
                assert!((u.get(r, c) - expected).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn pixel_image_roundtrip(a in -500.0f64..500.0, b in -500.0f64..500.0,
                                 hx in 1e-3f64..1.0, hy in 1e-3f64..1.0,
                                 cx in 0.0f64..300.0, cy in 0.0f64..300.0) {
            let k = CameraIntrinsics::new(1.0, hx, hy, cx, cy).unwrap();
            let (pa, pb) = image_to_pixel(pixel_to_image((a, b), &k), &k);
            prop_assert!((pa - a).abs() < 1e-12 * (1.0 + a.abs().max(cx)));
            prop_assert!((pb - b).abs() < 1e-12 * (1.0 + b.abs().max(cy)));
        }

        #[test]
        fn scale_intrinsics_composes(j in 0u32..6, extra in 0u32..6, eta in 0.51f64..0.99) {
            let k = CameraIntrinsics::new(1.0, 0.005, 0.004, 128.0, 90.0).unwrap();
            let direct = scale_intrinsics(&k, j + extra, eta).unwrap();
            let staged = scale_intrinsics(&scale_intrinsics(&k, j, eta).unwrap(), extra, eta).unwrap();
            for (a, b) in [(direct.hx, staged.hx), (direct.hy, staged.hy), (direct.cx, staged.cx), (direct.cy, staged.cy)] {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs());
            }
        }

        #[test]
        fn downsample_keeps_constants(w in 2usize..40, h in 2usize..40, eta in 0.3f64..0.99, v in -10.0f64..10.0) {
            let f = ScalarField::filled(w, h, v).unwrap();
            if let Ok(d) = downsample(&f, eta) {
                prop_assert!(d.data().iter().all(|&x| (x - v).abs() < 1e-12));
            }
        }

        #[test]
        fn resample_area_preserves_mean(w in 2usize..30, h in 2usize..30, seed in 0u64..1000) {
            let f = ScalarField::from_fn(w, h, |r, c| ((r * 31 + c * 17) as u64 ^ seed) as f64 % 7.0).unwrap();
            let d = resample_area(&f, w.div_ceil(2), h.div_ceil(2)).unwrap();
            prop_assert!((d.mean() - f.mean()).abs() < 1e-9);
        }
    }
}
