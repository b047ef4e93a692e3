use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfs_core::energy::{total_energy, total_energy_frozen, EnergySettings, PenaliserKind};
use sfs_core::field::{CameraIntrinsics, ScalarField};
use sfs_core::forward_model::{generate_scene, shade, SceneSpec};
use sfs_core::geometry::conversion_factor;
use sfs_core::solver::{el_gradient_full, el_gradient_simplified, UpwindDirections};
use sfs_core::upwind::Direction;

const N: usize = 16;

fn intrinsics(n: usize) -> CameraIntrinsics {
    let h = 1.28 / n as f64;
    CameraIntrinsics::new(1.0, h, h, n as f64 / 2.0, n as f64 / 2.0).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> ScalarField {
    let data = (0..N * N).map(|_| rng.gen_range(lo..hi)).collect();
    ScalarField::new(N, N, data).unwrap()
}

/// Smooth surface plus pixel noise, so that all three upwind cases occur.
fn random_depth(rng: &mut ChaCha8Rng) -> ScalarField {
    let (a, b, c) = (rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), rng.gen_range(0.5..3.0));
    let noise = rng.gen_range(0.0..0.05);
    let data = (0..N * N)
        .map(|p| {
            let (r, col) = ((p / N) as f64 / N as f64, (p % N) as f64 / N as f64);
            c + a * r + b * col * col + noise * rng.gen_range(-1.0..1.0)
        })
        .collect();
    ScalarField::new(N, N, data).unwrap()
}

fn with_value(z: &ScalarField, p: usize, v: f64) -> ScalarField {
    let mut d = z.data().to_vec();
    d[p] = v;
    ScalarField::new(z.width(), z.height(), d).unwrap()
}

fn finite_difference_gradient(z: &ScalarField, i: &ScalarField, s: &EnergySettings) -> Vec<f64> {
    let dirs = UpwindDirections::from_depth(z, s.intrinsics.hx, s.intrinsics.hy);
    let eps = 1e-6 * z.max().abs();
    (0..z.len())
        .map(|p| {
            let v = z.data()[p];
            let plus = total_energy_frozen(&with_value(z, p, v + eps), i, s, &dirs).unwrap();
            let minus = total_energy_frozen(&with_value(z, p, v - eps), i, s, &dirs).unwrap();
            (plus - minus) / (2.0 * eps)
        })
        .collect()
}

fn max_relative_error(analytic: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = analytic.iter().zip(reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    worst / scale
}

#[test]
fn euler_lagrange_matches_finite_differences() {
    let k = intrinsics(N);
    let area = k.cell_area();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let z = random_depth(&mut rng);
        let i = random_field(&mut rng, 0.05, 1.0);
        let confidence = if trial % 4 == 3 {
            let c = (0..N * N).map(|_| [0.0, 0.5, 1.0][rng.gen_range(0..3)]).collect();
            ScalarField::new(N, N, c).unwrap()
        } else {
            ScalarField::filled(N, N, 1.0).unwrap()
        };
        for penaliser in [PenaliserKind::Quadratic, PenaliserKind::Charbonnier { lambda: 1e-3 }] {
            for alpha in [0.0, 7.5e-5, 1.0] {
                let s = EnergySettings {
                    alpha,
                    penaliser,
                    confidence: confidence.clone(),
                    intrinsics: k,
                };
                let el: Vec<f64> = el_gradient_full(&z, &i, &s).unwrap().data().iter().map(|g| g * area).collect();
                let fd = finite_difference_gradient(&z, &i, &s);
                let err = max_relative_error(&el, &fd);
                assert!(err < 1e-4, "trial {trial} {penaliser:?} alpha={alpha}: {err}");
                worst = worst.max(err);
            }
        }
    }
    eprintln!("worst relative gradient error {worst:.3e}");
}

/// `c [D]_{z_x}` and `c [D]_{z_y}` at every pixel, computed from scratch.
fn data_fluxes(z: &ScalarField, i: &ScalarField, s: &EnergySettings, dirs: &UpwindDirections) -> (Vec<f64>, Vec<f64>) {
    let k = &s.intrinsics;
    let f = k.focal;
    let mut fx = vec![0.0; z.len()];
    let mut fy = vec![0.0; z.len()];
    for row in 0..N {
        for col in 0..N {
            let p = row * N + col;
            let (x, y) = (k.image_x(col as f64), k.image_y(row as f64));
            let (zx, zy) = dirs.gradient(z, row, col, k.hx, k.hy);
            let zc = z.data()[p];
            let a = zc + zx * x + zy * y;
            let w = (f * f * (zx * zx + zy * zy) + a * a).sqrt();
            let q = conversion_factor((x, y), f);
            let model = q.powi(3) / (zc * w);
            // d/dW of (I - Q³/(zW))² is 2 (I - M) M / W.
            let d_w = 2.0 * (i.data()[p] - model) * model / w;
            let c = s.confidence.data()[p];
            fx[p] = c * d_w * (f * f * zx + a * x) / w;
            fy[p] = c * d_w * (f * f * zy + a * y) / w;
        }
    }
    (fx, fy)
}

#[test]
fn omitted_terms_are_the_upwind_flux_divergence() {
    let k = intrinsics(N);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let z = random_depth(&mut rng);
        let i = random_field(&mut rng, 0.05, 1.0);
        let s = EnergySettings::uniform(7.5e-5, PenaliserKind::Charbonnier { lambda: 1e-3 }, k, N, N).unwrap();
        let dirs = UpwindDirections::from_depth(&z, k.hx, k.hy);
        let (fx, fy) = data_fluxes(&z, &i, &s, &dirs);

        // Scatter each pixel's flux onto the two samples of its one-sided difference.
        let mut expected = vec![0.0; z.len()];
        for row in 0..N {
            for col in 0..N {
                let p = row * N + col;
                match dirs.x(p) {
                    Direction::Backward => {
                        expected[p] += fx[p] / k.hx;
                        expected[p - 1] -= fx[p] / k.hx;
                    }
                    Direction::Forward => {
                        expected[p + 1] += fx[p] / k.hx;
                        expected[p] -= fx[p] / k.hx;
                    }
                    Direction::Zero => {}
                }
                match dirs.y(p) {
                    Direction::Backward => {
                        expected[p] += fy[p] / k.hy;
                        expected[p - N] -= fy[p] / k.hy;
                    }
                    Direction::Forward => {
                        expected[p + N] += fy[p] / k.hy;
                        expected[p] -= fy[p] / k.hy;
                    }
                    Direction::Zero => {}
                }
            }
        }

        let full = el_gradient_full(&z, &i, &s).unwrap();
        let simplified = el_gradient_simplified(&z, &i, &s).unwrap();
        let scale = expected.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for p in 0..z.len() {
            let diff = full.data()[p] - simplified.data()[p];
            assert!((diff - expected[p]).abs() <= 1e-10 * scale, "pixel {p}: {diff} vs {}", expected[p]);
        }
    }
}

#[test]
fn smoothness_operator_matches_probed_quadratic_form() {
    // With zero confidence and the quadratic penaliser the energy is the
    // quadratic form E(z) = ½ zᵀ A z. Constants lie in its kernel, so A can
    // be read off energies of positive fields 1 + e_i + e_j.
    let n = 8;
    let k = intrinsics(n);
    let mut s = EnergySettings::uniform(0.7, PenaliserKind::Quadratic, k, n, n).unwrap();
    s.confidence = ScalarField::filled(n, n, 0.0).unwrap();
    let image = ScalarField::filled(n, n, 0.5).unwrap();
    let energy = |v: &[f64]| {
        let z = ScalarField::new(n, n, v.iter().map(|x| 1.0 + x).collect()).unwrap();
        total_energy(&z, &image, &s).unwrap()
    };
    let m = n * n;
    let unit = |i: usize| {
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        v
    };
    let diag: Vec<f64> = (0..m).map(|i| energy(&unit(i))).collect();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = 2.0 * diag[i];
        for j in i + 1..m {
            let mut v = unit(i);
            v[j] = 1.0;
            let aij = energy(&v) - diag[i] - diag[j];
            a[(i, j)] = aij;
            a[(j, i)] = aij;
        }
    }

    let ones = DVector::<f64>::from_element(m, 1.0);
    assert!((&a * &ones).amax() <= 1e-9 * a.amax());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0)).collect();
        let z = ScalarField::new(n, n, v.iter().map(|x| 1.0 + x).collect()).unwrap();
        let el = el_gradient_full(&z, &image, &s).unwrap();
        let expected = &a * DVector::from_vec(v) / k.cell_area();
        let scale = expected.amax();
        for p in 0..m {
            assert!((el.data()[p] - expected[p]).abs() <= 1e-7 * scale, "pixel {p}");
        }
    }

    // The probed operator is symmetric positive semi-definite.
    let eig = a.clone().symmetric_eigen();
    assert!(eig.eigenvalues.min() >= -1e-9 * a.amax());
}

#[test]
fn stationary_cases_give_zero_gradient() {
    let k = intrinsics(32);
    let plane = generate_scene(&SceneSpec::Plane { z0: 2.0 }, &k, 32, 32).unwrap();
    let image = shade(&plane, &k).unwrap();
    let s = EnergySettings::uniform(0.0, PenaliserKind::Charbonnier { lambda: 1e-3 }, k, 32, 32).unwrap();
    for g in [el_gradient_full(&plane, &image, &s).unwrap(), el_gradient_simplified(&plane, &image, &s).unwrap()] {
        assert!(g.data().iter().all(|v| v.abs() < 1e-12));
    }

    let mut s = EnergySettings::uniform(1.0, PenaliserKind::Quadratic, k, 32, 32).unwrap();
    s.confidence = ScalarField::filled(32, 32, 0.0).unwrap();
    let slanted = ScalarField::from_fn(32, 32, |r, c| 2.0 + 0.01 * r as f64 - 0.02 * c as f64).unwrap();
    let g = el_gradient_full(&slanted, &image, &s).unwrap();
    for r in 2..30 {
        for c in 2..30 {
            assert!(g.get(r, c).abs() < 1e-6, "({r},{c}) {}", g.get(r, c));
        }
    }
}

#[test]
fn schemes_agree_on_constant_depth() {
    let k = intrinsics(N);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = ScalarField::filled(N, N, 1.3).unwrap();
    let i = random_field(&mut rng, 0.1, 1.0);
    let s = EnergySettings::uniform(1e-3, PenaliserKind::Charbonnier { lambda: 1e-3 }, k, N, N).unwrap();
    assert_eq!(el_gradient_full(&z, &i, &s).unwrap(), el_gradient_simplified(&z, &i, &s).unwrap());
}

#[test]
fn gradient_rejects_non_positive_depth() {
    let k = intrinsics(N);
    let s = EnergySettings::uniform(0.0, PenaliserKind::Quadratic, k, N, N).unwrap();
    let i = ScalarField::filled(N, N, 0.5).unwrap();
    let z = with_value(&ScalarField::filled(N, N, 1.0).unwrap(), 17, 0.0);
    assert!(el_gradient_full(&z, &i, &s).is_err());
    assert!(el_gradient_simplified(&z, &i, &s).is_err());
}
