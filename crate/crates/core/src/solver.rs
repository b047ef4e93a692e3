//! Explicit minimisation of the discrete energy.
//!
//! The Euler-Lagrange operator is the derivative of the discrete energy with
//! the upwind directions frozen, divided by the cell area so that it is the
//! pointwise functional derivative and `τ` keeps its meaning on every grid.
//! The evaluation is split into two passes: a per-pixel pass that computes
//! the local partial derivatives, and a gather pass that applies the adjoint
//! of the difference stencils. Each output pixel sums its contributions in a
//! fixed order, so results do not depend on the number of threads.

use rayon::prelude::*;

use crate::energy::{check_depth, total_energy, validate_confidence, EnergySettings, PenaliserKind};
use crate::error::{Error, Result};
use crate::field::{check_eta, resample_area, scale_intrinsics, scaled_len, upsample, CameraIntrinsics, ScalarField};
use crate::forward_model::shade;
use crate::geometry::conversion_factor;
use crate::upwind::Direction;

pub use crate::upwind::{upwind_gradient, UpwindDirections};

/// Lower bound enforced on the depth after every explicit step.
pub const Z_FLOOR: f64 = 1e-6;

/// Grids with fewer pixels than this are processed on the calling thread.
const PARALLEL_MIN_PIXELS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Every iteration uses the complete Euler-Lagrange operator.
    Full,
    /// Drops the data-term fluxes `∂x [D]_{z_x}` and `∂y [D]_{z_y}`.
    Simplified,
    /// First half simplified, second half full.
    Alternating,
}

/// Starting depth at the coarsest level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialGuess {
    /// Pointwise solution of the data term for a vanishing gradient.
    DataTerm,
    Plane(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    /// Step of the simplified scheme.
    pub tau: f64,
    /// Iterations per pyramid level.
    pub iterations: usize,
    pub eta: f64,
    pub scheme: Scheme,
    pub penaliser: PenaliserKind,
    pub min_level_size: usize,
    pub initial_guess: InitialGuess,
    /// Step of the full scheme. Defaults to `tau * min(hx², hy²)` of the level.
    pub tau_full: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 7.5e-5,
            tau: 1e-2,
            iterations: 1_000_000,
            eta: 0.8,
            scheme: Scheme::Alternating,
            penaliser: PenaliserKind::Charbonnier { lambda: 1e-3 },
            min_level_size: 8,
            initial_guess: InitialGuess::DataTerm,
            tau_full: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if let Some(t) = self.tau_full {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("full-scheme tau must be positive, got {t}"));
            }
        }
        if !(self.eta > 0.5 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0.5, 1), got {}", self.eta));
        }
        if self.min_level_size < 1 {
            return bad("min_level_size must be at least 1".into());
        }
        if let InitialGuess::Plane(z) = self.initial_guess {
            if !(z > 0.0 && z.is_finite()) {
                return bad(format!("initial plane depth must be positive, got {z}"));
            }
        }
        self.penaliser.validate()
    }

    /// `α^k = η^(-4k) α`.
    pub fn alpha_at_level(&self, level: u32) -> f64 {
        self.alpha * self.eta.powi(-4 * level as i32)
    }

    fn full_step(&self, k: &CameraIntrinsics) -> f64 {
        self.tau_full.unwrap_or(self.tau * (k.hx * k.hx).min(k.hy * k.hy))
    }

    /// Iterations of the simplified and the full phase.
    pub fn phase_split(&self) -> (usize, usize) {
        match self.scheme {
            Scheme::Full => (0, self.iterations),
            Scheme::Simplified => (self.iterations, 0),
            Scheme::Alternating => (self.iterations / 2, self.iterations - self.iterations / 2),
        }
    }
}

/// Energy samples of one pyramid level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelTrace {
    pub level: usize,
    pub width: usize,
    pub height: usize,
    /// `(iteration, energy)` pairs.
    pub samples: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult {
    pub depth: ScalarField,
    pub reprojection: ScalarField,
    /// Coarsest level first.
    pub energy_trace: Vec<LevelTrace>,
    pub levels: usize,
}

/// Per-pixel partial derivatives gathered by the second pass.
#[derive(Clone, Copy, Debug, Default)]
struct PixelTerms {
    dir_x: u8,
    dir_y: u8,
    /// `c [D]_z`.
    data_z: f64,
    /// `c [D]_{z_x} / hx`, zero when the x direction is `Zero`.
    flux_x: f64,
    flux_y: f64,
    /// `α ∂S/∂z_xx`, `α ∂S/∂z_xy`, `α ∂S/∂z_yy`, each divided by the
    /// denominator of its difference quotient.
    s_xx: f64,
    s_xy: f64,
    s_yy: f64,
}

/// Adjoint weights of the clamped 3-point stencils along one axis.
///
/// Entry `k` of `second[q]` is the weight of `z_q` in the second difference
/// at pixel `q - 1 + k`; `first` does the same for the central difference
/// `z_{p+1} - z_{p-1}`.
#[derive(Clone, Debug)]
struct AxisStencils {
    second: Vec<[f64; 3]>,
    first: Vec<[f64; 3]>,
}

impl AxisStencils {
    fn new(n: usize) -> Self {
        let clamp = |i: isize| i.clamp(0, n as isize - 1);
        let hit = |i: isize, q: isize| if clamp(i) == q { 1.0 } else { 0.0 };
        let mut second = vec![[0.0; 3]; n];
        let mut first = vec![[0.0; 3]; n];
        for q in 0..n as isize {
            for k in 0..3isize {
                let p = q - 1 + k;
                if p < 0 || p >= n as isize {
                    continue;
                }
                second[q as usize][k as usize] = hit(p - 1, q) - 2.0 * hit(p, q) + hit(p + 1, q);
                first[q as usize][k as usize] = hit(p + 1, q) - hit(p - 1, q);
            }
        }
        Self { second, first }
    }
}

/// Fixed per-level data for evaluating the Euler-Lagrange operator.
#[derive(Clone, Debug)]
struct Grid {
    width: usize,
    height: usize,
    hx: f64,
    hy: f64,
    focal: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    q3: Vec<f64>,
    stencil_x: AxisStencils,
    stencil_y: AxisStencils,
}

impl Grid {
    fn new(k: &CameraIntrinsics, width: usize, height: usize) -> Self {
        let xs: Vec<f64> = (0..width).map(|c| k.image_x(c as f64)).collect();
        let ys: Vec<f64> = (0..height).map(|r| k.image_y(r as f64)).collect();
        let mut q3 = Vec::with_capacity(width * height);
        for &y in &ys {
            for &x in &xs {
                q3.push(conversion_factor((x, y), k.focal).powi(3));
            }
        }
        Self {
            width,
            height,
            hx: k.hx,
            hy: k.hy,
            focal: k.focal,
            xs,
            ys,
            q3,
            stencil_x: AxisStencils::new(width),
            stencil_y: AxisStencils::new(height),
        }
    }
}

fn for_each_row<T: Send>(buf: &mut [T], width: usize, f: impl Fn(usize, &mut [T]) + Sync + Send) {
    if buf.len() >= PARALLEL_MIN_PIXELS {
        buf.par_chunks_mut(width).enumerate().for_each(|(row, chunk)| f(row, chunk));
    } else {
        buf.chunks_mut(width).enumerate().for_each(|(row, chunk)| f(row, chunk));
    }
}

/// Evaluates the Euler-Lagrange operator on one grid, reusing its buffers.
struct Evaluator<'a> {
    grid: Grid,
    image: &'a [f64],
    confidence: &'a [f64],
    alpha: f64,
    penaliser: PenaliserKind,
    terms: Vec<PixelTerms>,
}

impl<'a> Evaluator<'a> {
    fn new(k: &CameraIntrinsics, image: &'a ScalarField, confidence: &'a ScalarField, alpha: f64, penaliser: PenaliserKind) -> Self {
        let (w, h) = (image.width(), image.height());
        Self {
            grid: Grid::new(k, w, h),
            image: image.data(),
            confidence: confidence.data(),
            alpha,
            penaliser,
            terms: vec![PixelTerms::default(); w * h],
        }
    }

    fn local_terms(&mut self, z: &[f64]) {
        let g = &self.grid;
        let (w, h) = (g.width, g.height);
        let (image, confidence) = (self.image, self.confidence);
        let (alpha, penaliser) = (self.alpha, self.penaliser);
        let f2 = g.focal * g.focal;
        let (inv_hx, inv_hy) = (1.0 / g.hx, 1.0 / g.hy);
        let (inv_hxx, inv_hyy, inv_hxy) = (inv_hx * inv_hx, inv_hy * inv_hy, 0.25 * inv_hx * inv_hy);
        for_each_row(&mut self.terms, w, |row, out| {
            let up = row.saturating_sub(1) * w;
            let mid = row * w;
            let down = (row + 1).min(h - 1) * w;
            let y = g.ys[row];
            for (col, t) in out.iter_mut().enumerate() {
                let p = mid + col;
                let l = col.saturating_sub(1);
                let r = (col + 1).min(w - 1);
                let zc = z[p];

                let (bx, fx) = ((zc - z[mid + l]) * inv_hx, (z[mid + r] - zc) * inv_hx);
                let (by, fy) = ((zc - z[up + col]) * inv_hy, (z[down + col] - zc) * inv_hy);
                let dx = Direction::select(bx, fx);
                let dy = Direction::select(by, fy);
                t.dir_x = dx as u8;
                t.dir_y = dy as u8;

                let c = confidence[p];
                if c > 0.0 {
                    let zx = dx.pick(bx, fx);
                    let zy = dy.pick(by, fy);
                    let x = g.xs[col];
                    let a = zx * x + zy * y + zc;
                    let inv_w2 = 1.0 / (f2 * (zx * zx + zy * zy) + a * a);
                    let inv_z = 1.0 / zc;
                    let model = g.q3[p] * inv_z * inv_w2.sqrt();
                    let two_r = 2.0 * (image[p] - model);
                    t.data_z = c * two_r * model * (inv_z + a * inv_w2);
                    let common = c * two_r * model * inv_w2;
                    t.flux_x = if dx == Direction::Zero { 0.0 } else { common * (f2 * zx + a * x) * inv_hx };
                    t.flux_y = if dy == Direction::Zero { 0.0 } else { common * (f2 * zy + a * y) * inv_hy };
                } else {
                    t.data_z = 0.0;
                    t.flux_x = 0.0;
                    t.flux_y = 0.0;
                }

                if alpha > 0.0 {
                    let zxx = (z[mid + r] - 2.0 * zc + z[mid + l]) * inv_hxx;
                    let zyy = (z[down + col] - 2.0 * zc + z[up + col]) * inv_hyy;
                    let zxy = (z[down + r] - z[down + l] - z[up + r] + z[up + l]) * inv_hxy;
                    let weight = 2.0 * alpha * penaliser.derivative(zxx * zxx + 2.0 * zxy * zxy + zyy * zyy);
                    t.s_xx = weight * zxx * inv_hxx;
                    t.s_xy = 2.0 * weight * zxy * inv_hxy;
                    t.s_yy = weight * zyy * inv_hyy;
                } else {
                    t.s_xx = 0.0;
                    t.s_xy = 0.0;
                    t.s_yy = 0.0;
                }
            }
        });
    }

    /// Writes the operator for the current `z` into `out`.
    fn evaluate(&mut self, z: &[f64], with_flux: bool, out: &mut [f64]) {
        self.local_terms(z);
        let g = &self.grid;
        let terms = &self.terms;
        let (w, h) = (g.width, g.height);
        let smooth = self.alpha > 0.0;
        const B: u8 = Direction::Backward as u8;
        const F: u8 = Direction::Forward as u8;
        for_each_row(out, w, |row, out_row| {
            let sy2 = &g.stencil_y.second[row];
            let sy1 = &g.stencil_y.first[row];
            let inner_row = row >= 1 && row + 2 <= h;
            for (col, o) in out_row.iter_mut().enumerate() {
                let q = row * w + col;
                let t = &terms[q];
                let mut v = t.data_z;
                if with_flux {
                    let mut fl = match t.dir_x {
                        B => t.flux_x,
                        F => -t.flux_x,
                        _ => 0.0,
                    };
                    if col + 1 < w && terms[q + 1].dir_x == B {
                        fl -= terms[q + 1].flux_x;
                    }
                    if col > 0 && terms[q - 1].dir_x == F {
                        fl += terms[q - 1].flux_x;
                    }
                    match t.dir_y {
                        B => fl += t.flux_y,
                        F => fl -= t.flux_y,
                        _ => {}
                    }
                    if row + 1 < h && terms[q + w].dir_y == B {
                        fl -= terms[q + w].flux_y;
                    }
                    if row > 0 && terms[q - w].dir_y == F {
                        fl += terms[q - w].flux_y;
                    }
                    v += fl;
                }
                if smooth {
                    if inner_row && col >= 1 && col + 2 <= w {
                        let (ul, ur, dl, dr) = (q - w - 1, q - w + 1, q + w - 1, q + w + 1);
                        v += terms[q - 1].s_xx - 2.0 * t.s_xx + terms[q + 1].s_xx;
                        v += terms[q - w].s_yy - 2.0 * t.s_yy + terms[q + w].s_yy;
                        v += terms[ul].s_xy - terms[ur].s_xy - terms[dl].s_xy + terms[dr].s_xy;
                    } else {
                        let sx2 = &g.stencil_x.second[col];
                        let sx1 = &g.stencil_x.first[col];
                        let mut acc = 0.0;
                        for k in 0..3 {
                            if sx2[k] != 0.0 {
                                acc += sx2[k] * terms[q + k - 1].s_xx;
                            }
                            if sy2[k] != 0.0 {
                                acc += sy2[k] * terms[q + k * w - w].s_yy;
                            }
                            if sy1[k] != 0.0 {
                                let base = q + k * w - w;
                                for j in 0..3 {
                                    if sx1[j] != 0.0 {
                                        acc += sy1[k] * sx1[j] * terms[base + j - 1].s_xy;
                                    }
                                }
                            }
                        }
                        v += acc;
                    }
                }
                *o = v;
            }
        });
    }
}

fn check_inputs(z: &ScalarField, i: &ScalarField, s: &EnergySettings) -> Result<()> {
    s.validate(i)?;
    z.ensure_same_shape(i)?;
    check_depth(z)
}

fn el_gradient(z: &ScalarField, i: &ScalarField, s: &EnergySettings, with_flux: bool) -> Result<ScalarField> {
    check_inputs(z, i, s)?;
    let mut eval = Evaluator::new(&s.intrinsics, i, &s.confidence, s.alpha, s.penaliser);
    let mut out = vec![0.0; z.len()];
    eval.evaluate(z.data(), with_flux, &mut out);
    ScalarField::new(z.width(), z.height(), out)
}

/// Complete Euler-Lagrange operator: the gradient of the discrete energy
/// (with frozen upwind directions) divided by the cell area.
pub fn el_gradient_full(z: &ScalarField, i: &ScalarField, s: &EnergySettings) -> Result<ScalarField> {
    el_gradient(z, i, s, true)
}

/// As [`el_gradient_full`] without the data-term fluxes.
pub fn el_gradient_simplified(z: &ScalarField, i: &ScalarField, s: &EnergySettings) -> Result<ScalarField> {
    el_gradient(z, i, s, false)
}

/// `z - τ g`, clamped below at [`Z_FLOOR`].
pub fn explicit_step(z: &ScalarField, gradient: &ScalarField, tau: f64) -> Result<ScalarField> {
    z.ensure_same_shape(gradient)?;
    let mut data = z.data().to_vec();
    step_in_place(&mut data, gradient.data(), tau);
    ScalarField::new(z.width(), z.height(), data)
}

/// Returns false if a non-finite value appeared.
fn step_in_place(z: &mut [f64], gradient: &[f64], tau: f64) -> bool {
    let mut finite = true;
    for (v, g) in z.iter_mut().zip(gradient) {
        let next = *v - tau * g;
        finite &= next.is_finite();
        *v = next.max(Z_FLOOR);
    }
    finite
}

/// Pointwise solution of the data term for `∇z = 0`: `z = sqrt(Q³ / I)`.
pub fn initialise(i: &ScalarField, k: &CameraIntrinsics) -> Result<ScalarField> {
    k.validate()?;
    if let Some((index, &value)) = i.data().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveIrradiance { index, value });
    }
    let mut data = Vec::with_capacity(i.len());
    for row in 0..i.height() {
        for col in 0..i.width() {
            let q = conversion_factor((k.image_x(col as f64), k.image_y(row as f64)), k.focal);
            data.push((q * q * q / i.get(row, col)).sqrt());
        }
    }
    ScalarField::new(i.width(), i.height(), data)
}

/// Runs the configured scheme for `cfg.iterations` steps on one grid.
pub fn run_level(z0: &ScalarField, i: &ScalarField, s: &EnergySettings, cfg: &SolverConfig) -> Result<ScalarField> {
    Ok(run_level_traced(z0, i, s, cfg, 0)?.0)
}

fn run_level_traced(
    z0: &ScalarField,
    i: &ScalarField,
    s: &EnergySettings,
    cfg: &SolverConfig,
    level: usize,
) -> Result<(ScalarField, Vec<(usize, f64)>)> {
    cfg.validate()?;
    check_inputs(z0, i, s)?;
    let (simplified, full) = cfg.phase_split();
    let n = simplified + full;
    let stride = (n / 100).max(1);
    let tau_full = cfg.full_step(&s.intrinsics);

    let mut eval = Evaluator::new(&s.intrinsics, i, &s.confidence, s.alpha, s.penaliser);
    let mut z = z0.data().to_vec();
    let mut gradient = vec![0.0; z.len()];
    let mut trace = Vec::with_capacity(n / stride + 2);
    let (w, h) = (z0.width(), z0.height());
    let sample = |z: &[f64]| -> Result<f64> {
        total_energy(&ScalarField::from_parts_unchecked(w, h, z.to_vec()), i, s)
    };
    trace.push((0, sample(&z)?));

    for it in 0..n {
        let with_flux = it >= simplified;
        let tau = if with_flux { tau_full } else { cfg.tau };
        eval.evaluate(&z, with_flux, &mut gradient);
        if !step_in_place(&mut z, &gradient, tau) {
            return Err(Error::Diverged { level, iteration: it + 1 });
        }
        if (it + 1) % stride == 0 || it + 1 == n {
            trace.push((it + 1, sample(&z)?));
        }
    }
    Ok((ScalarField::new(w, h, z)?, trace))
}

/// Number of levels below the finest one.
pub fn coarsest_level(width: usize, height: usize, eta: f64, min_size: usize) -> usize {
    let mut k = 0;
    loop {
        let shrink = eta.powi(k as i32 + 1);
        if scaled_len(width, shrink).min(scaled_len(height, shrink)) < min_size {
            return k;
        }
        k += 1;
    }
}

/// Coarse-to-fine reconstruction of the depth from a single image.
pub fn reconstruct(
    i: &ScalarField,
    k: &CameraIntrinsics,
    confidence: &ScalarField,
    cfg: &SolverConfig,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    k.validate()?;
    check_eta(cfg.eta)?;
    i.ensure_same_shape(confidence)?;
    validate_confidence(confidence)?;
    if let Some((index, &value)) = i.data().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveIrradiance { index, value });
    }

    let (w, h) = (i.width(), i.height());
    let k_max = coarsest_level(w, h, cfg.eta, cfg.min_level_size);
    let mut depth: Option<ScalarField> = None;
    let mut traces = Vec::with_capacity(k_max + 1);

    for level in (0..=k_max).rev() {
        let shrink = cfg.eta.powi(level as i32);
        let (lw, lh) = (scaled_len(w, shrink), scaled_len(h, shrink));
        let (image, conf) = if level == 0 {
            (i.clone(), confidence.clone())
        } else {
            (
                resample_area(i, lw, lh)?,
                resample_area(confidence, lw, lh)?.map(|c| c.clamp(0.0, 1.0))?,
            )
        };
        let intrinsics = scale_intrinsics(k, level as u32, cfg.eta)?;
        let z0 = match depth.take() {
            Some(coarse) => upsample(&coarse, lw, lh)?,
            None => match cfg.initial_guess {
                InitialGuess::DataTerm => initialise(&image, &intrinsics)?,
                InitialGuess::Plane(z) => ScalarField::filled(lw, lh, z)?,
            },
        };
        let settings = EnergySettings {
            alpha: cfg.alpha_at_level(level as u32),
            penaliser: cfg.penaliser,
            confidence: conf,
            intrinsics,
        };
        let (z, samples) = run_level_traced(&z0, &image, &settings, cfg, level).map_err(|e| match e {
            Error::Diverged { iteration, .. } => Error::Diverged { level, iteration },
            other => other,
        })?;
        traces.push(LevelTrace {
            level,
            width: lw,
            height: lh,
            samples,
        });
        depth = Some(z);
    }

    let depth = depth.expect("at least one level");
    let reprojection = shade(&depth, k)?;
    Ok(ReconstructionResult {
        depth,
        reprojection,
        energy_trace: traces,
        levels: k_max + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward_model::{generate_scene, SceneSpec};

    fn k(n: usize) -> CameraIntrinsics {
        let h = 1.28 / n as f64;
        CameraIntrinsics::new(1.0, h, h, n as f64 / 2.0, n as f64 / 2.0).unwrap()
    }

    #[test]
    fn explicit_step_examples() {
        let z = ScalarField::filled(2, 2, 2.0).unwrap();
        let zero = ScalarField::filled(2, 2, 0.0).unwrap();
        assert_eq!(explicit_step(&z, &zero, 0.5).unwrap(), z);
        let one = ScalarField::filled(2, 2, 1.0).unwrap();
        assert!(explicit_step(&z, &one, 0.5).unwrap().data().iter().all(|&v| v == 1.5));
        let big = ScalarField::filled(2, 2, 10.0).unwrap();
        assert!(explicit_step(&z, &big, 0.5).unwrap().data().iter().all(|&v| v == Z_FLOOR));
    }

    #[test]
    fn initialise_examples() {
        let kk = CameraIntrinsics::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let i = ScalarField::filled(1, 1, 0.25).unwrap();
        assert_eq!(initialise(&i, &kk).unwrap().get(0, 0), 2.0);

        // Q = 0.8 at x = (0.75, 0) for f = 1.
        let kk = CameraIntrinsics::new(1.0, 0.75, 1.0, 0.0, 0.0).unwrap();
        let i = ScalarField::filled(2, 1, 1.0).unwrap();
        assert!((initialise(&i, &kk).unwrap().get(0, 1) - 0.512f64.sqrt()).abs() < 1e-15);

        let zeros = ScalarField::filled(2, 2, 0.0).unwrap();
        assert!(initialise(&zeros, &kk).is_err());
    }

    #[test]
    fn initialise_recovers_planes_exactly() {
        let kk = k(32);
        let z = generate_scene(&SceneSpec::Plane { z0: 1.7 }, &kk, 32, 32).unwrap();
        let i = shade(&z, &kk).unwrap();
        let z0 = initialise(&i, &kk).unwrap();
        for v in z0.data() {
            assert!((v - 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_scaling_per_level() {
        let cfg = SolverConfig {
            alpha: 1e-4,
            eta: 0.8,
            ..SolverConfig::default()
        };
        assert_eq!(cfg.alpha_at_level(0), 1e-4);
        assert!((cfg.alpha_at_level(1) - 2.44140625e-4).abs() < 1e-18);
    }

    #[test]
    fn phase_split_puts_remainder_in_full_phase() {
        let mut cfg = SolverConfig {
            iterations: 7,
            ..SolverConfig::default()
        };
        assert_eq!(cfg.phase_split(), (3, 4));
        cfg.scheme = Scheme::Full;
        assert_eq!(cfg.phase_split(), (0, 7));
        cfg.scheme = Scheme::Simplified;
        assert_eq!(cfg.phase_split(), (7, 0));
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SolverConfig { eta: 0.5, ..ok.clone() },
            SolverConfig { eta: 1.0, ..ok.clone() },
            SolverConfig { tau: 0.0, ..ok.clone() },
            SolverConfig { alpha: -1.0, ..ok.clone() },
            SolverConfig { penaliser: PenaliserKind::Charbonnier { lambda: 0.0 }, ..ok.clone() },
            SolverConfig { initial_guess: InitialGuess::Plane(-2.0), ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn coarsest_level_respects_min_size() {
        assert_eq!(coarsest_level(8, 8, 0.8, 8), 0);
        assert_eq!(coarsest_level(10, 10, 0.8, 8), 1);
        let k = coarsest_level(128, 128, 0.8, 8);
        assert!(scaled_len(128, 0.8f64.powi(k as i32)) >= 8);
        assert!(scaled_len(128, 0.8f64.powi(k as i32 + 1)) < 8);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let kk = k(16);
        let z = generate_scene(&SceneSpec::Sombrero, &kk, 16, 16).unwrap();
        let i = shade(&z, &kk).unwrap();
        let s = EnergySettings::uniform(1e-4, PenaliserKind::Quadratic, kk, 16, 16).unwrap();
        let cfg = SolverConfig {
            iterations: 0,
            ..SolverConfig::default()
        };
        let z0 = ScalarField::filled(16, 16, 2.0).unwrap();
        assert_eq!(run_level(&z0, &i, &s, &cfg).unwrap(), z0);
    }

    #[test]
    fn divergence_is_reported_with_iteration() {
        let kk = k(16);
        let z = generate_scene(&SceneSpec::Sombrero, &kk, 16, 16).unwrap();
        let i = shade(&z, &kk).unwrap();
        let s = EnergySettings::uniform(1.0, PenaliserKind::Quadratic, kk, 16, 16).unwrap();
        let cfg = SolverConfig {
            iterations: 400,
            tau: 1e3,
            scheme: Scheme::Simplified,
            ..SolverConfig::default()
        };
        let err = run_level(&z, &i, &s, &cfg).unwrap_err();
        assert!(matches!(err, Error::Diverged { level: 0, iteration } if iteration > 0 && iteration <= 400));
    }
}
