//! Sign-preserving upwind differences for the hyperbolic data term.
//!
//! Per axis the scheme takes `max(D⁻z, -D⁺z, 0)`. When `-D⁺z` wins the
//! actual forward difference `D⁺z` is returned, so the sign of the slope is
//! kept. Ties prefer the backward difference; a zero maximum gives a zero
//! derivative with no stencil at all. Missing neighbours at the border are
//! replaced by the pixel itself, which removes that candidate.

use crate::field::ScalarField;

/// Which one-sided difference a pixel uses along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Direction {
    Zero = 0,
    Backward = 1,
    Forward = 2,
}

impl Direction {
    /// Selects the direction from the backward and forward differences.
    #[inline]
    pub fn select(backward: f64, forward: f64) -> Direction {
        let neg_forward = -forward;
        if backward <= 0.0 && neg_forward <= 0.0 {
            Direction::Zero
        } else if backward >= neg_forward {
            Direction::Backward
        } else {
            Direction::Forward
        }
    }

    /// The derivative this direction picks out of the two differences.
    #[inline]
    pub fn pick(self, backward: f64, forward: f64) -> f64 {
        match self {
            Direction::Zero => 0.0,
            Direction::Backward => backward,
            Direction::Forward => forward,
        }
    }
}

/// Upwind derivative of a 1D sequence at `i` with spacing `h`.
pub fn upwind_1d(values: &[f64], i: usize, h: f64) -> f64 {
    let (backward, forward) = one_sided(values, i, h);
    Direction::select(backward, forward).pick(backward, forward)
}

#[inline]
fn one_sided(values: &[f64], i: usize, h: f64) -> (f64, f64) {
    let c = values[i];
    let left = if i > 0 { values[i - 1] } else { c };
    let right = if i + 1 < values.len() { values[i + 1] } else { c };
    ((c - left) / h, (right - c) / h)
}

/// Upwind gradient `(z_x, z_y)` of `z` at `(row, col)` for spacings `h = (hx, hy)`.
pub fn upwind_gradient(z: &ScalarField, row: usize, col: usize, h: (f64, f64)) -> (f64, f64) {
    let (bx, fx) = differences_x(z, row, col, h.0);
    let (by, fy) = differences_y(z, row, col, h.1);
    (
        Direction::select(bx, fx).pick(bx, fx),
        Direction::select(by, fy).pick(by, fy),
    )
}

#[inline]
fn differences_x(z: &ScalarField, row: usize, col: usize, hx: f64) -> (f64, f64) {
    let w = z.width();
    let c = z.get(row, col);
    let left = if col > 0 { z.get(row, col - 1) } else { c };
    let right = if col + 1 < w { z.get(row, col + 1) } else { c };
    ((c - left) / hx, (right - c) / hx)
}

#[inline]
fn differences_y(z: &ScalarField, row: usize, col: usize, hy: f64) -> (f64, f64) {
    let h = z.height();
    let c = z.get(row, col);
    let up = if row > 0 { z.get(row - 1, col) } else { c };
    let down = if row + 1 < h { z.get(row + 1, col) } else { c };
    ((c - up) / hy, (down - c) / hy)
}

/// Frozen per-pixel direction choices for both axes.
///
/// Derived from one iterate and then held fixed while the energy or its
/// gradient is evaluated (lagged discretisation).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpwindDirections {
    width: usize,
    height: usize,
    x: Vec<Direction>,
    y: Vec<Direction>,
}

impl UpwindDirections {
    pub fn from_depth(z: &ScalarField, hx: f64, hy: f64) -> Self {
        let (w, h) = (z.width(), z.height());
        let mut x = Vec::with_capacity(w * h);
        let mut y = Vec::with_capacity(w * h);
        for row in 0..h {
            for col in 0..w {
                let (b, f) = differences_x(z, row, col, hx);
                x.push(Direction::select(b, f));
                let (b, f) = differences_y(z, row, col, hy);
                y.push(Direction::select(b, f));
            }
        }
        Self {
            width: w,
            height: h,
            x,
            y,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn x(&self, index: usize) -> Direction {
        self.x[index]
    }

    #[inline]
    pub fn y(&self, index: usize) -> Direction {
        self.y[index]
    }

    /// Gradient of `z` at `(row, col)` using the frozen directions.
    ///
    /// A direction that would reach past the border contributes zero.
    pub fn gradient(&self, z: &ScalarField, row: usize, col: usize, hx: f64, hy: f64) -> (f64, f64) {
        let p = row * self.width + col;
        let (bx, fx) = differences_x(z, row, col, hx);
        let (by, fy) = differences_y(z, row, col, hy);
        (self.x[p].pick(bx, fx), self.y[p].pick(by, fy))
    }
}
