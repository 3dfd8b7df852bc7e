//! Convolution, pooling and SVD checked against direct evaluations.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use photoconv_core::autograd::{MaskMode, ParamRole, ParameterStore, Tape};
use photoconv_core::layers::{conv_forward, pool, svd_check, ActivationSpec, ConvolutionLayer, FilterMask};
use photoconv_core::optics::{ideal_dft, ideal_truncated_dft, CenteredIndexRange};
use photoconv_core::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Ideal-transform convolution layer with random amplitude and phase mask.
fn random_conv(n: usize, rng: &mut ChaCha8Rng) -> (ConvolutionLayer, ParameterStore, Vec<Complex64>) {
    let mut store = ParameterStore::new();
    let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let theta: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let peak = alpha.iter().cloned().fold(0.0, f64::max);
    let factors = alpha
        .iter()
        .zip(&theta)
        .map(|(a, t)| Complex64::from_polar(a / peak, 2.0 * PI * t))
        .collect();
    let a = store.add("alpha", vec![n], alpha, ParamRole::MaskAmplitude).unwrap();
    let t = store.add("theta", vec![n], theta, ParamRole::MaskPhase).unwrap();
    let mask = FilterMask::new(MaskMode::AmpPhase, n, Some(a), Some(t)).unwrap();
    let f = ideal_dft(n, false).unwrap();
    let layer = ConvolutionLayer::new(f.clone(), mask, f, ActivationSpec::LINEAR, None).unwrap();
    (layer, store, factors)
}

fn run_conv(layer: &ConvolutionLayer, store: &ParameterStore, u: &[Complex64]) -> Vec<Complex64> {
    let mut tape = Tape::new(store);
    let x = tape.constant(u.to_vec());
    let y = conv_forward(layer, &mut tape, x).unwrap();
    tape.value(y).to_vec()
}

/// `y_j = Σ_n u_{-n} h_{j-n}` with `h_m = (1/N) Σ_k a_k e^{-i 2π k m / N}`,
/// all indices centered and taken mod N.
fn circular_oracle(u: &[Complex64], a: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    let range = CenteredIndexRange::new(n).unwrap();
    let wrap = |m: i64| range.position_of((m - range.offset()).rem_euclid(n as i64) + range.offset()).unwrap();
    let h = |m: i64| -> Complex64 {
        range
            .iter()
            .zip(a)
            .map(|(k, ak)| ak * Complex64::from_polar(1.0, -2.0 * PI * (k * m) as f64 / n as f64))
            .sum::<Complex64>()
            / n as f64
    };
    range
        .iter()
        .map(|j| range.iter().map(|m| u[wrap(-m)] * h(j - m)).sum())
        .collect()
}

#[test]
fn convolution_matches_direct_circular_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [4, 8, 16] {
        for _ in 0..5 {
            let (layer, store, factors) = random_conv(n, &mut rng);
            let u = random_vec(&mut rng, n);
            let y = run_conv(&layer, &store, &u);
            let oracle = circular_oracle(&u, &factors);
            for j in 0..n {
                assert!((y[j] - oracle[j]).norm() < 1e-10, "n={n} j={j}: {} vs {}", y[j], oracle[j]);
            }
        }
    }
}

#[test]
fn flat_phase_mask_reverses_the_input() {
    for n in [4, 5, 8, 16] {
        let mut store = ParameterStore::new();
        let t = store.add("theta", vec![n], vec![0.0; n], ParamRole::MaskPhase).unwrap();
        let mask = FilterMask::new(MaskMode::PhaseOnly, n, None, Some(t)).unwrap();
        let f = ideal_dft(n, false).unwrap();
        let layer = ConvolutionLayer::new(f.clone(), mask, f, ActivationSpec::LINEAR, None).unwrap();
        let u: Vec<Complex64> = (0..n).map(|k| Complex64::new(k as f64 + 1.0, 0.5 * k as f64)).collect();
        let y = run_conv(&layer, &store, &u);
        let range = CenteredIndexRange::new(n).unwrap();
        for (pos, idx) in range.iter().enumerate() {
            let src = (-idx - range.offset()).rem_euclid(n as i64) as usize;
            assert!((y[pos] - u[src]).norm() < 1e-12, "n={n}");
        }
    }
}

#[test]
fn pooling_keeps_dc_and_drops_nyquist() {
    let f = ideal_truncated_dft(4, 8).unwrap();
    let store = ParameterStore::new();
    let mut tape = Tape::new(&store);
    let flat = tape.constant(vec![Complex64::new(0.7, 0.0); 8]);
    let y = pool(&mut tape, flat, &f).unwrap();
    // centered output indices -2..1; DC sits at position 2
    for (pos, z) in tape.value(y).iter().enumerate() {
        let expected = if pos == 2 { 0.7 * 8f64.sqrt() } else { 0.0 };
        assert!((z - Complex64::new(expected, 0.0)).norm() < 1e-12);
    }
    let alternating = tape.constant((0..8).map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect());
    let y = pool(&mut tape, alternating, &f).unwrap();
    assert!(tape.value(y).iter().all(|z| z.norm() < 1e-12));
    let square = ideal_dft(8, false).unwrap();
    assert!(pool(&mut tape, flat, &square).is_err());
}

#[test]
fn pooling_then_inverse_is_a_low_pass_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_vec(&mut rng, 16);
    let spectrum = |k: i64| -> Complex64 {
        (0..16)
            .map(|p| x[p] * Complex64::from_polar(0.25, -2.0 * PI * (k * (p as i64 - 8)) as f64 / 16.0))
            .sum()
    };
    let oracle: Vec<Complex64> = (-4..4)
        .map(|m: i64| {
            (-4..4)
                .map(|k: i64| spectrum(k) * Complex64::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * (k * m) as f64 / 8.0))
                .sum()
        })
        .collect();
    let store = ParameterStore::new();
    let mut tape = Tape::new(&store);
    let u = tape.constant(x.clone());
    let pooled = pool(&mut tape, u, &ideal_truncated_dft(8, 16).unwrap()).unwrap();
    let back = tape.matvec(&ideal_dft(8, true).unwrap().entries, pooled).unwrap();
    for (a, b) in tape.value(back).iter().zip(&oracle) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn fused_linear_layer_equals_sequential_application() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (layer, store, factors) = random_conv(12, &mut rng);
    let f = ideal_dft(12, false).unwrap().entries;
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(factors));
    let fused = &*f * a * &*f;
    let u = random_vec(&mut rng, 12);
    let y = run_conv(&layer, &store, &u);
    let direct = fused * nalgebra::DVector::from_vec(u);
    for k in 0..12 {
        assert!((y[k] - direct[k]).norm() < 1e-10);
    }
}

fn argmax_power(v: &DVector<f64>) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i].abs() > v[best].abs() { i } else { best })
}

#[test]
fn svd_example_10x16() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let w = DMatrix::from_fn(10, 16, |_, _| rng.random_range(-2.0..2.0));
    let s = svd_check(&w).unwrap();
    assert!((s.reconstruct() - &w).amax() < 1e-9);
    let scaled = s.scaled_matrix();
    for _ in 0..100 {
        let x = DVector::from_fn(16, |_, _| rng.random_range(-1.0..1.0));
        assert_eq!(argmax_power(&(&w * &x)), argmax_power(&(&scaled * &x)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn svd_factorisation_properties(seed in any::<u64>(), rows in 1usize..14, cols in 1usize..18, spread in 0.1f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-spread..spread));
        let s = svd_check(&w).unwrap();
        prop_assert!(s.orthogonality_error() < 1e-9);
        prop_assert!((s.reconstruct() - &w).amax() < 1e-9);
        prop_assert!(s.scaled_sigma().iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
        prop_assert!(s.sigma.windows(2).all(|p| p[0] >= p[1]));
        prop_assert!(s.beta_amp >= 1.0);
        let scaled = s.scaled_matrix();
        let inputs: Vec<DVector<f64>> = (0..100).map(|_| DVector::from_fn(cols, |_, _| rng.random_range(-1.0..1.0))).collect();
        for x in &inputs {
            prop_assert_eq!(argmax_power(&(&w * x)), argmax_power(&(&scaled * x)));
        }
        prop_assert!(s.predictions_agree(&w, &inputs));
    }

    #[test]
    fn phase_only_mask_preserves_power(n in 1usize..40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParameterStore::new();
        let t = store.add("theta", vec![n], (0..n).map(|_| rng.random_range(-3.0..3.0)).collect(), ParamRole::MaskPhase).unwrap();
        let mask = FilterMask::new(MaskMode::PhaseOnly, n, None, Some(t)).unwrap();
        let d = mask.diagonal(&store).unwrap();
        prop_assert!(d.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        let f = ideal_dft(n, false).unwrap();
        let layer = ConvolutionLayer::new(f.clone(), mask, f, ActivationSpec::LINEAR, None).unwrap();
        let u = random_vec(&mut rng, n);
        let y = run_conv(&layer, &store, &u);
        let (pu, py): (f64, f64) = (u.iter().map(|z| z.norm_sqr()).sum(), y.iter().map(|z| z.norm_sqr()).sum());
        prop_assert!((pu - py).abs() < 1e-10 * pu.max(1.0));
    }

    #[test]
    fn realised_amplitudes_stay_in_unit_interval(n in 1usize..30, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParameterStore::new();
        let a = store.add("alpha", vec![n], (0..n).map(|_| rng.random_range(-4.0..4.0)).collect(), ParamRole::MaskAmplitude).unwrap();
        let t = store.add("theta", vec![n], (0..n).map(|_| rng.random()).collect(), ParamRole::MaskPhase).unwrap();
        let mask = FilterMask::new(MaskMode::AmpPhase, n, Some(a), Some(t)).unwrap();
        let d = mask.diagonal(&store).unwrap();
        prop_assert!(d.iter().all(|z| z.norm() <= 1.0 + 1e-15));
        prop_assert!(d.iter().any(|z| (z.norm() - 1.0).abs() < 1e-15));
    }
}
