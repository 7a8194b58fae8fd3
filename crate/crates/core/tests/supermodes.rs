mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use spopo_core::kernel::*;
use spopo_core::supermodes::*;

fn unit_pump(delta0: f64) -> PumpConfig {
    PumpConfig::gaussian(1.0, 0.5, delta0, 20.0).unwrap()
}

fn small_basis() -> SupermodeBasis {
    let grid = FrequencyGrid::new(41, 8.0).unwrap();
    schmidt_decompose(&common::double_gaussian(grid, 0.9, 0.1), 1e-6).unwrap()
}

#[test]
fn double_gaussian_schmidt_spectrum() {
    for (a, b) in [(0.9, 0.1), (0.1, 0.9), (0.5, 0.2)] {
        let grid = FrequencyGrid::new(161, 10.0).unwrap();
        let kernel = common::double_gaussian(grid, a, b);
        let basis = schmidt_decompose(&kernel, 1e-6).unwrap();
        let mu = common::double_gaussian_ratio(a, b);
        let g0 = common::double_gaussian_leading(a, b);
        for n in 0..10 {
            let expect = g0 * mu.powi(n as i32);
            assert_relative_eq!(basis.gains[n], expect, max_relative = 1e-6);
        }
        assert!(basis.orthonormality_error() < 1e-10);
        assert!(basis.reconstruction_residual(&kernel) < 1e-8);
        assert_eq!(basis.max_gain(), basis.gains.iter().cloned().fold(0.0, f64::max));
    }
}

#[test]
fn gaussian_mode_synthesizes_to_its_time_profile() {
    let grid = FrequencyGrid::new(161, 30.0).unwrap();
    let pump = unit_pump(0.0);
    let psi: Vec<Complex64> = grid.omegas().iter().map(|&w| pump.envelope_freq(w)).collect();
    let w = grid.weight();
    let kernel = JointKernel {
        matrix: DMatrix::from_fn(161, 161, |i, j| psi[i] * psi[j] * w),
        grid,
    };
    let basis = schmidt_decompose(&kernel, 1e-6).unwrap();
    for j in 0..grid.n_points() {
        let t = grid.time(j);
        assert!((basis.modes_time[(j, 0)] - pump.envelope_time(t)).norm() < 1e-10);
    }
}

#[test]
fn time_modes_are_orthonormal() {
    let basis = small_basis();
    let dt = basis.time_step();
    let k = basis.n_kept;
    let cols = basis.modes_time.columns(0, k);
    let gram = cols.adjoint() * cols * Complex64::new(dt, 0.0);
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((gram[(i, j)] - target).norm() < 1e-10);
        }
    }
}

#[test]
fn time_and_frequency_transforms_are_inverse() {
    let basis = small_basis();
    let back = analyze_time(&basis.mode_time(3), &basis.grid).unwrap();
    assert!((back - basis.mode_freq(3)).norm() < 1e-12);
}

#[test]
fn resonant_comb_repeats_every_period() {
    let basis = small_basis();
    let comb = synthesize_comb(&basis, 0, 0.0, 4, &unit_pump(0.0)).unwrap();
    for k in 1..4 {
        assert_eq!(comb.samples.periods[k], comb.samples.periods[0]);
    }
    let norm = 1.0 / (2.0 * PI).sqrt();
    assert!((comb.samples.periods[0][20] - basis.modes_time[(20, 0)] * norm).norm() < 1e-15);
}

#[test]
fn half_shift_comb_alternates_sign() {
    let basis = small_basis();
    let comb = synthesize_comb(&basis, 1, PI, 4, &unit_pump(0.0)).unwrap();
    for k in 0..4 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (a, b) in comb.samples.periods[k].iter().zip(&comb.samples.periods[0]) {
            assert!((a - b * sign).norm() < 1e-14);
        }
    }
}

#[test]
fn comb_is_quasi_periodic() {
    let basis = small_basis();
    for (theta, delta0) in [(0.3, 0.0), (-1.2, 0.7), (PI, -2.0)] {
        let comb = synthesize_comb(&basis, 2, theta, 6, &unit_pump(delta0)).unwrap();
        assert!(comb.quasi_periodicity_error() < 1e-9);
        assert_relative_eq!(comb.ceo, theta + delta0);
    }
}

#[test]
fn comb_spectrum_is_offset_by_the_shift() {
    // Pulse-to-pulse transform at a fixed window sample peaks at θ + Δ0.
    let basis = small_basis();
    let k = 16;
    let thetas = theta_grid(k);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(k);
    for (m, delta_m) in [(3usize, 0usize), (5, 2), (12, 7)] {
        let delta0 = 2.0 * PI * delta_m as f64 / k as f64;
        let comb = synthesize_comb(&basis, 0, thetas[m], k, &unit_pump(delta0)).unwrap();
        let c = basis.grid.center();
        let mut seq: Vec<Complex64> = comb.samples.periods.iter().map(|p| p[c]).collect();
        fft.process(&mut seq);
        let peak = (0..k).max_by(|&a, &b| seq[a].norm().total_cmp(&seq[b].norm())).unwrap();
        // Forward DFT bin b collects e^{−i 2π b k / K}.
        assert_eq!(peak, (m + delta_m) % k);
    }
}

#[test]
fn comb_inner_products() {
    let basis = small_basis();
    let pump = unit_pump(0.4);
    let k = 8;
    let f00 = synthesize_comb(&basis, 0, 0.0, k, &pump).unwrap();
    let f10 = synthesize_comb(&basis, 1, 0.0, k, &pump).unwrap();
    assert_relative_eq!(comb_inner_product(&f00, &f00).unwrap().re, 1.0 / (2.0 * PI), epsilon = 1e-12);
    assert!(comb_inner_product(&f00, &f10).unwrap().norm() < 1e-9);
    let thetas = theta_grid(k);
    for &theta in &thetas[1..k] {
        let fm = synthesize_comb(&basis, 0, theta, k, &pump).unwrap();
        // Σ_k e^{ik(θm−θ0)} vanishes on the discrete grid.
        assert!(comb_inner_product(&f00, &fm).unwrap().norm() < 1e-12);
    }
}

#[test]
fn comb_outside_kept_modes_or_window_is_rejected() {
    let basis = small_basis();
    assert!(synthesize_comb(&basis, basis.n_kept, 0.0, 2, &unit_pump(0.0)).is_err());
    let short = PumpConfig::gaussian(1.0, 0.01, 0.0, 1.0).unwrap();
    assert_eq!(synthesize_comb(&basis, 0, 0.0, 2, &short).unwrap_err().code(), "grid_mismatch");
}

#[test]
fn pulse_projection() {
    let basis = small_basis();
    let mut field = PulseTrain::zeros(&basis, 20.0, 5);
    assert_eq!(project_pulse(&field, &basis, 0, 3).unwrap(), Complex64::new(0.0, 0.0));
    field.periods[3] = basis.mode_time(0).iter().copied().collect();
    assert_relative_eq!(project_pulse(&field, &basis, 0, 3).unwrap().re, 1.0, epsilon = 1e-12);
    assert!(project_pulse(&field, &basis, 1, 3).unwrap().norm() < 1e-12);
    assert!(project_pulse(&field, &basis, 0, 2).unwrap().norm() < 1e-15);
    assert_eq!(project_pulse(&field, &basis, 0, 5).unwrap_err().code(), "index_out_of_range");
}

#[test]
fn pulse_synthesis_round_trip() {
    let basis = small_basis();
    let mut rng = common::rng(5);
    let coeffs: Vec<Vec<Complex64>> = (0..4)
        .map(|_| (0..3).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let field = synthesize_pulses(&basis, &coeffs, 20.0).unwrap();
    for (n, row) in coeffs.iter().enumerate() {
        for (k, a) in row.iter().enumerate() {
            assert!((project_pulse(&field, &basis, n, k).unwrap() - a).norm() < 1e-9);
        }
    }
}

#[test]
fn comb_expansion_is_complete() {
    let grid = FrequencyGrid::new(31, 8.0).unwrap();
    let basis = schmidt_decompose(&common::double_gaussian(grid, 0.9, 0.1), 1e-6).unwrap();
    let pump = unit_pump(0.25);
    let k = 5;
    let mut rng = common::rng(17);
    let mut field = PulseTrain::zeros(&basis, pump.t0, k);
    for period in field.periods.iter_mut() {
        let spec = DMatrix::from_fn(grid.n_points(), 1, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        *period = synthesize_time(&spec, &grid).column(0).iter().copied().collect();
    }
    let coeffs = comb_coefficients(&field, &basis, &pump).unwrap();
    let rebuilt = reconstruct_from_combs(&coeffs, &basis, &pump).unwrap();
    let err: f64 = rebuilt
        .periods
        .iter()
        .flatten()
        .zip(field.periods.iter().flatten())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        * field.dt;
    assert!((err / field.norm_sqr()).sqrt() <= 1e-6);
}

#[test]
fn gains_do_not_depend_on_pump_offset() {
    let grid = common::default_grid(61);
    let crystal = common::bbo_crystal();
    let a = schmidt_decompose(&build_kernel(&grid, &common::pump(0.0), &crystal).unwrap(), 1e-6).unwrap();
    let b = schmidt_decompose(&build_kernel(&grid, &common::pump(1.3), &crystal).unwrap(), 1e-6).unwrap();
    assert_eq!(a.gains, b.gains);
}

#[test]
fn physical_kernel_invariants() {
    let grid = common::default_grid(101);
    let kernel = build_kernel(&grid, &common::pump(0.0), &common::bbo_crystal()).unwrap();
    let basis = schmidt_decompose(&kernel, DEFAULT_GAIN_CUTOFF).unwrap();
    assert!(basis.orthonormality_error() < 1e-10);
    assert!(basis.reconstruction_residual(&kernel) < 1e-8);
    assert!(basis.gains.windows(2).all(|w| w[0] >= w[1]));
    assert!(basis.n_kept > 1);
}

#[test]
fn gain_cutoff_counts_kept_modes() {
    let grid = FrequencyGrid::new(61, 10.0).unwrap();
    let basis = schmidt_decompose(&common::double_gaussian(grid, 0.9, 0.1), 0.01).unwrap();
    // μ = 1/2, so g_n/g_0 ≥ 0.01 for n ≤ 6.
    assert_eq!(basis.n_kept, 7);
}
