mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use spopo_core::cavity::*;
use spopo_core::supermodes::schmidt_decompose;
use spopo_core::symplectic::{check_symplectic, output_covariance};
use spopo_core::{FrequencyGrid, SpopoError};

/// `(X − r)(1 − rX)⁻¹` evaluated directly, for any real `r`.
fn cavity_map(x: Matrix2<Complex64>, r: f64) -> Matrix2<Complex64> {
    let id = Matrix2::<Complex64>::identity();
    let rc = Complex64::new(r, 0.0);
    (x - id * rc) * (id - x * rc).try_inverse().unwrap()
}

fn random_case(rng: &mut impl Rng) -> (f64, f64, CavityConfig, f64) {
    let r = rng.gen_range(0.05..0.99);
    let cav = CavityConfig::from_r(r, rng.gen_range(-PI..PI)).unwrap();
    let delta0 = rng.gen_range(-1.0..1.0);
    let g_max = match threshold_gain(&cav, delta0) {
        Ok(th) => (0.95 * th.gain).min(1.0),
        Err(_) => 1.0,
    };
    (rng.gen_range(0.0..g_max), rng.gen_range(-PI..=PI), cav, delta0)
}

#[test]
fn thousand_random_blocks_are_symplectic() {
    let mut rng = common::rng(2024);
    for _ in 0..1000 {
        let (g, theta, cav, delta0) = random_case(&mut rng);
        let t = comb_io(g, theta, &cav, delta0).unwrap();
        assert!(check_symplectic(&t, 1e-10), "g={g} theta={theta} {cav:?}");
    }
}

#[test]
fn map_of_inverse_is_inverse_of_map() {
    let mut rng = common::rng(7);
    for _ in 0..200 {
        let (g, theta, cav, delta0) = random_case(&mut rng);
        let x = round_trip_block(g, cav.delta_rt + delta0) * Complex64::from_polar(1.0, theta);
        let forward = comb_io_matrix(g, theta, &cav, delta0).unwrap();
        let backward = cavity_map(x.try_inverse().unwrap(), cav.r);
        let dev = (forward * backward - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "deviation {dev:e}");
    }
}

#[test]
fn lower_row_pairs_with_opposite_shift() {
    let cav = CavityConfig::from_r(0.85, 0.2).unwrap();
    for theta in [0.3, -1.1, 2.5] {
        let m = comb_io_matrix(0.05, theta, &cav, 0.1).unwrap();
        let minus = comb_io(0.05, -theta, &cav, 0.1).unwrap();
        assert!((m[(1, 0)] - minus.s.conj()).norm() < 1e-13);
        assert!((m[(1, 1)] - minus.c.conj()).norm() < 1e-13);
    }
}

#[test]
fn variance_diverges_at_threshold() {
    let cav = CavityConfig::from_r(0.9, 0.0).unwrap();
    let th = threshold_gain(&cav, 0.0).unwrap().gain;
    let t = comb_io(th * (1.0 - 1e-8), 0.0, &cav, 0.0).unwrap();
    let (var_x, var_p, _) = output_covariance(&t);
    assert!(var_x > 1e6);
    assert!(var_p < 1e-6);
    assert!(matches!(comb_io(th * 1.001, 0.0, &cav, 0.0), Err(SpopoError::AtThreshold { .. })));
}

#[test]
fn odd_detuning_matches_sign_flipped_reflection() {
    let r = 0.8;
    let odd = CavityConfig::from_r(r, PI).unwrap();
    let g = 0.9 * threshold_gain(&odd, 0.0).unwrap().gain;
    for theta in [0.0, 0.4, -2.0] {
        let t = comb_io(g, theta, &odd, 0.0).unwrap();
        let x = round_trip_block(g, 0.0) * Complex64::from_polar(1.0, theta);
        let flipped = cavity_map(x, -r);
        assert!((t.c + flipped[(0, 0)]).norm() < 1e-12);
        assert!((t.s + flipped[(0, 1)]).norm() < 1e-12);
    }
    // The odd branch is the resonant spectrum shifted by π.
    let even = CavityConfig::from_r(r, 0.0).unwrap();
    let a = output_covariance(&comb_io(g, PI, &odd, 0.0).unwrap());
    let b = output_covariance(&comb_io(g, 0.0, &even, 0.0).unwrap());
    assert_relative_eq!(a.0, b.0, max_relative = 1e-12);
    assert_relative_eq!(a.1, b.1, max_relative = 1e-12);
}

fn quadrature_combination(v: &Matrix4<f64>, coeffs: [f64; 4]) -> f64 {
    let c = nalgebra::Vector4::from(coeffs);
    c.dot(&(v * c))
}

#[test]
fn epr_variance_matches_phase_scan_of_pair_covariance() {
    let mut rng = common::rng(99);
    for _ in 0..40 {
        let (g, theta, cav, delta0) = random_case(&mut rng);
        if theta.abs() < 1e-3 || PI - theta.abs() < 1e-3 {
            continue;
        }
        let v = pair_covariance(g, theta, &cav, delta0).unwrap();
        let mut best = f64::INFINITY;
        let steps = 20_000;
        for s in 0..steps {
            let phi = 2.0 * PI * s as f64 / steps as f64;
            let (c, sn) = (phi.cos(), phi.sin());
            // Rotate the −θ comb: x' = c x + s p, p' = −s x + c p.
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let dx = quadrature_combination(&v, [h, 0.0, -h * c, -h * sn]);
            let sp = quadrature_combination(&v, [0.0, h, -h * sn, h * c]);
            best = best.min(dx + sp);
        }
        let closed = epr_pair_check(g, theta, &cav, delta0).unwrap();
        assert!((closed - best).abs() < 1e-6 * best.max(1.0), "closed {closed} scan {best}");
        assert!(closed <= best + 1e-12);
    }
}

#[test]
fn epr_examples() {
    let cav = CavityConfig::from_r(0.8894, 0.0).unwrap();
    let th = threshold_gain(&cav, 0.0).unwrap().gain;
    let t2 = cav.t * cav.t;
    assert!(epr_pair_check(0.8 * th, t2 / 10.0, &cav, 0.0).unwrap() < 1.0);
    let scan: Vec<f64> = (1..200)
        .map(|k| epr_pair_check(0.8 * th, PI * k as f64 / 200.0, &cav, 0.0).unwrap())
        .collect();
    assert!(scan.iter().all(|&v| v < 1.0));
    assert!(scan.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(1.0 - scan[scan.len() - 1] < 0.1 * (1.0 - scan[0]));
}

#[test]
fn vacuum_spectrum_is_flat() {
    let cav = CavityConfig::from_r(0.7, 0.3).unwrap();
    let grid: Vec<f64> = (0..21).map(|k| -PI + 2.0 * PI * k as f64 / 20.0).collect();
    let spec = squeezing_spectrum_for_gains(&[0.0, 0.0], &cav, 0.0, &grid).unwrap();
    for mode in &spec.modes {
        for p in &mode.points {
            assert_relative_eq!(p.var_x, 0.5, epsilon = 1e-14);
            assert_relative_eq!(p.var_p, 0.5, epsilon = 1e-14);
        }
    }
}

#[test]
fn resonance_gives_deepest_squeezing() {
    let cav = CavityConfig::from_r(0.889, 0.0).unwrap();
    let g = 0.9 * threshold_gain(&cav, 0.0).unwrap().gain;
    let grid: Vec<f64> = (-100..=100).map(|k| PI * k as f64 / 100.0).collect();
    let spec = squeezing_spectrum_for_gains(&[g], &cav, 0.0, &grid).unwrap();
    let pts = &spec.modes[0].points;
    let zero = pts.iter().find(|p| p.theta == 0.0).unwrap();
    assert!(zero.var_p < 0.5 && zero.var_x > 0.5);
    assert!(zero.var_x * zero.var_p >= 0.25 * (1.0 - 1e-12));
    for p in pts.iter().filter(|p| p.theta != 0.0) {
        assert!(zero.var_p < p.var_p, "theta {}", p.theta);
    }
}

#[test]
fn squeezing_falls_off_over_the_cavity_bandwidth() {
    let cav = CavityConfig::from_r(0.97, 0.0).unwrap();
    let g = 0.5 * threshold_gain(&cav, 0.0).unwrap().gain;
    let depth = |theta: f64| {
        let p = &squeezing_spectrum_for_gains(&[g], &cav, 0.0, &[theta]).unwrap().modes[0].points[0];
        0.5 - p.var_p
    };
    let d0 = depth(0.0);
    let (mut lo, mut hi) = (1e-9, PI - 1e-9);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if depth(mid) > 0.5 * d0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let half = cav.t * cav.t / 2.0;
    assert!(lo > half / 3.0 && lo < 3.0 * half, "half depth at {lo}, t²/2 = {half}");
}

#[test]
fn single_comb_of_a_pair_is_thermal() {
    let cav = CavityConfig::from_r(0.85, 0.0).unwrap();
    let g = 0.7 * threshold_gain(&cav, 0.0).unwrap().gain;
    for theta in [0.05, 0.5, 2.0] {
        let v = pair_covariance(g, theta, &cav, 0.0).unwrap();
        assert_relative_eq!(v[(0, 0)], v[(1, 1)], max_relative = 1e-12);
        assert!(v[(0, 1)].abs() < 1e-12);
        assert!(v[(0, 0)] > 0.5);
        assert_relative_eq!(v[(2, 2)], v[(3, 3)], max_relative = 1e-12);
    }
}

#[test]
fn spectrum_from_basis_rejects_above_threshold_modes() {
    let grid = FrequencyGrid::new(31, 8.0).unwrap();
    let basis = schmidt_decompose(&common::double_gaussian(grid, 0.9, 0.1), 1e-6).unwrap();
    let cav = CavityConfig::from_r(0.9, 0.0).unwrap();
    let th = threshold_gain(&cav, 0.0).unwrap().gain;
    let below = basis.with_scaled_gains(0.9 * th / basis.max_gain());
    let spec = squeezing_spectrum(&below, &cav, 0.0, &[0.0, 0.2]).unwrap();
    assert_eq!(spec.modes.len(), below.n_kept);
    assert!(spec.modes[0].points[0].var_p < spec.modes[1].points[0].var_p);
    let above = basis.with_scaled_gains(1.1 * th / basis.max_gain());
    assert_eq!(squeezing_spectrum(&above, &cav, 0.0, &[0.0]).unwrap_err().code(), "at_threshold");
}

#[test]
fn gain_scale_puts_leading_mode_at_ratio() {
    let cav = CavityConfig::from_finesse(30.0, 0.0).unwrap();
    let th = threshold_gain(&cav, 0.0).unwrap().gain;
    let f = gain_scale_for_ratio(2.0, 0.5, &cav, 0.0).unwrap();
    assert_relative_eq!(2.0 * f, 0.5 * th, epsilon = 1e-15);
    assert_eq!(gain_scale_for_ratio(2.0, 0.0, &cav, 0.0).unwrap(), 0.0);
    assert!(gain_scale_for_ratio(2.0, 1.0, &cav, 0.0).is_err());
}

#[test]
fn bogoliubov_pair_matches_manual_embedding() {
    let cav = CavityConfig::from_r(0.75, 0.1).unwrap();
    let theta = 0.6;
    let plus = comb_io(0.04, theta, &cav, 0.0).unwrap();
    let minus = comb_io(0.04, -theta, &cav, 0.0).unwrap();
    let v = pair_covariance(0.04, theta, &cav, 0.0).unwrap();
    // ⟨a_θ a_{−θ}⟩ = C(θ) S(−θ) from the quadrature moments.
    let re = 0.5 * (v[(0, 2)] - v[(1, 3)]);
    let im = 0.5 * (v[(0, 3)] + v[(1, 2)]);
    let corr = plus.c * minus.s;
    assert!((Complex64::new(re, im) - corr).norm() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn comb_io_is_symplectic(
        r in 0.05f64..0.99,
        delta in -PI..PI,
        theta in -PI..PI,
        frac in 0.0f64..0.95,
    ) {
        let cav = CavityConfig::from_r(r, delta).unwrap();
        let g = match threshold_gain(&cav, 0.0) {
            Ok(th) => frac * th.gain.min(1.0),
            Err(_) => frac,
        };
        let t = comb_io(g, theta, &cav, 0.0).unwrap();
        prop_assert!(check_symplectic(&t, 1e-10));
    }

    #[test]
    fn pair_symmetry_relation(r in 0.05f64..0.99, theta in 0.01f64..3.1, frac in 0.0f64..0.95) {
        let cav = CavityConfig::from_r(r, 0.0).unwrap();
        let g = frac * threshold_gain(&cav, 0.0).unwrap().gain;
        let p = comb_io(g, theta, &cav, 0.0).unwrap();
        let m = comb_io(g, -theta, &cav, 0.0).unwrap();
        prop_assert!((p.c * m.s - p.s * m.c).norm() < 1e-10 * (1.0 + p.c.norm() * m.s.norm()));
    }
}
