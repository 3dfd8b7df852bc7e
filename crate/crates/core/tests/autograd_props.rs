//! Finite-difference checks of every tape primitive and the algebraic
//! properties of the forward pass.

use std::f64::consts::PI;
use std::sync::Arc;

use photoconv_core::autograd::{
    check_gradients, relative_error, BiasSource, MaskMode, MaskParams, ParamRole, ParameterStore, PhaseMode, Tape,
};
use photoconv_core::optics::ideal_dft;
use photoconv_core::{Complex64, ComplexMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-6;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Worst relative error between the tape adjoint of `v` and central
/// differences of `loss(v)` in its real and imaginary parts.
fn input_gradient_error<F>(v: &[Complex64], adjoint: &[Complex64], loss: F) -> f64
where
    F: Fn(&[Complex64]) -> f64,
{
    let mut worst = 0.0f64;
    for j in 0..v.len() {
        for (part, unit) in [(adjoint[j].re, Complex64::new(H, 0.0)), (adjoint[j].im, Complex64::new(0.0, H))] {
            let mut plus = v.to_vec();
            plus[j] += unit;
            let mut minus = v.to_vec();
            minus[j] -= unit;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * H);
            worst = worst.max(relative_error(part, numeric));
        }
    }
    worst
}

fn matvec_power(m: &Arc<ComplexMatrix>, v: &[Complex64], select: Option<usize>) -> (f64, Vec<Complex64>) {
    let store = ParameterStore::new();
    let mut tape = Tape::new(&store);
    let x = tape.variable(v.to_vec());
    let y = tape.matvec(m, x).unwrap();
    let l = tape.power_loss(y, select).unwrap();
    let value = tape.scalar(l).unwrap();
    let back = tape.backward(l).unwrap();
    (value, back.inputs[&x].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn matvec_input_gradient_matches_finite_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Arc::new(random_matrix(&mut rng, 5, 5));
        let v = random_vec(&mut rng, 5);
        let (_, adjoint) = matvec_power(&m, &v, None);
        let err = input_gradient_error(&v, &adjoint, |w| matvec_power(&m, w, None).0);
        prop_assert!(err < 1e-5, "relative error {err}");
    }

    #[test]
    fn mask_with_softmax_loss_matches_finite_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 8;
        let mut store = ParameterStore::new();
        let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.0)).collect();
        let theta: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let a = store.add("alpha", vec![n], alpha, ParamRole::MaskAmplitude).unwrap();
        let t = store.add("theta", vec![n], theta, ParamRole::MaskPhase).unwrap();
        let beta = store.add("beta", vec![1], vec![rng.random_range(0.5..2.0)], ParamRole::OutputScale).unwrap();
        let mask = MaskParams { mode: MaskMode::AmpPhase, amplitude: Some(a), phase: Some(t), perturbation: None };
        let input = random_vec(&mut rng, n);
        let label = rng.random_range(0..n);
        let report = check_gradients(
            |tape| {
                let x = tape.constant(input.clone());
                let y = tape.diagonal_mask(&mask, x)?;
                tape.power_softmax_xent(y, beta, label)
            },
            &mut store,
            H,
        ).unwrap();
        prop_assert!(report.max_relative_error() < 1e-5, "{report:?}");
    }

    #[test]
    fn phase_gradient_of_selected_power_vanishes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let mut store = ParameterStore::new();
        let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.0)).collect();
        let a = store.add("alpha", vec![n], alpha, ParamRole::MaskAmplitude).unwrap();
        let t = store.add("theta", vec![n], (0..n).map(|_| rng.random()).collect(), ParamRole::MaskPhase).unwrap();
        let mask = MaskParams { mode: MaskMode::AmpPhase, amplitude: Some(a), phase: Some(t), perturbation: None };
        let input = random_vec(&mut rng, n);
        let m = rng.random_range(0..n);
        let graph = |tape: &mut Tape<'_>| {
            let x = tape.constant(input.clone());
            let y = tape.diagonal_mask(&mask, x)?;
            tape.power_loss(y, Some(m))
        };
        let grads = {
            let mut tape = Tape::new(&store);
            let l = graph(&mut tape).unwrap();
            tape.backward(l).unwrap().grads
        };
        prop_assert!(grads.get(t).iter().all(|g| g.abs() < 1e-12));
        let report = check_gradients(graph, &mut store, H).unwrap();
        prop_assert!(report.max_relative_error() < 1e-5, "{report:?}");
    }

    #[test]
    fn modrelu_away_from_kinks_matches_finite_differences(seed in any::<u64>(), keep in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 7;
        let input = random_vec(&mut rng, n);
        // biases keep |z| + b at least 1e-3 from zero
        let bias: Vec<f64> = input
            .iter()
            .map(|z| {
                let b: f64 = rng.random_range(-1.0..0.5);
                if (z.norm() + b).abs() < 1e-2 { b + 0.05 } else { b }
            })
            .collect();
        let mut store = ParameterStore::new();
        let b = store.add("bias", vec![n], bias, ParamRole::Bias).unwrap();
        let beta = store.add("beta", vec![1], vec![1.3], ParamRole::OutputScale).unwrap();
        let phase = if keep { PhaseMode::Keep } else { PhaseMode::Zero };
        let label = rng.random_range(0..n);
        let report = check_gradients(
            |tape| {
                let x = tape.constant(input.clone());
                let y = tape.modrelu(x, BiasSource::PerElement(b), phase)?;
                tape.power_softmax_xent(y, beta, label)
            },
            &mut store,
            H,
        ).unwrap();
        prop_assert!(report.max_relative_error() < 1e-5, "{report:?}");

        // input adjoint through the activation
        let loss_of = |v: &[Complex64]| {
            let mut tape = Tape::new(&store);
            let x = tape.variable(v.to_vec());
            let y = tape.modrelu(x, BiasSource::PerElement(b), phase).unwrap();
            let l = tape.power_softmax_xent(y, beta, label).unwrap();
            let value = tape.scalar(l).unwrap();
            let back = tape.backward(l).unwrap();
            (value, back.inputs[&x].clone())
        };
        let adjoint = loss_of(&input).1;
        let err = input_gradient_error(&input, &adjoint, |v| loss_of(v).0);
        prop_assert!(err < 1e-5, "input relative error {err}");
    }

    #[test]
    fn real_matvec_matches_finite_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, cols) = (4, 3);
        let mut store = ParameterStore::new();
        let w = store
            .add("w", vec![rows, cols], (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect(), ParamRole::Weight)
            .unwrap();
        let beta = store.add("beta", vec![1], vec![0.9], ParamRole::OutputScale).unwrap();
        let input = random_vec(&mut rng, cols);
        let label = rng.random_range(0..rows);
        let report = check_gradients(
            |tape| {
                let x = tape.constant(input.clone());
                let y = tape.real_matvec(w, rows, cols, x)?;
                let y = tape.modrelu(y, BiasSource::None, PhaseMode::Zero)?;
                tape.power_softmax_xent(y, beta, label)
            },
            &mut store,
            H,
        ).unwrap();
        prop_assert!(report.max_relative_error() < 1e-5, "{report:?}");
    }

    #[test]
    fn softmax_loss_input_and_scale_gradients(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 10;
        let mut store = ParameterStore::new();
        let beta = store.add("beta", vec![1], vec![rng.random_range(0.3..2.0)], ParamRole::OutputScale).unwrap();
        let input = random_vec(&mut rng, n);
        let label = rng.random_range(0..n);
        let report = check_gradients(
            |tape| {
                let x = tape.constant(input.clone());
                tape.power_softmax_xent(x, beta, label)
            },
            &mut store,
            H,
        ).unwrap();
        prop_assert!(report.max_relative_error() < 1e-5, "{report:?}");
        let loss_of = |v: &[Complex64]| {
            let mut tape = Tape::new(&store);
            let x = tape.variable(v.to_vec());
            let l = tape.power_softmax_xent(x, beta, label).unwrap();
            let value = tape.scalar(l).unwrap();
            (value, tape.backward(l).unwrap().inputs[&x].clone())
        };
        let adjoint = loss_of(&input).1;
        let err = input_gradient_error(&input, &adjoint, |v| loss_of(v).0);
        prop_assert!(err < 1e-5, "input relative error {err}");
    }

    #[test]
    fn matvec_and_mask_are_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let m = Arc::new(random_matrix(&mut rng, n, n));
        let mut store = ParameterStore::new();
        let t = store.add("theta", vec![n], (0..n).map(|_| rng.random()).collect(), ParamRole::MaskPhase).unwrap();
        let mask = MaskParams { mode: MaskMode::PhaseOnly, amplitude: None, phase: Some(t), perturbation: None };
        let (u, v) = (random_vec(&mut rng, n), random_vec(&mut rng, n));
        let mut tape = Tape::new(&store);
        let run = |tape: &mut Tape<'_>, x: Vec<Complex64>| {
            let x = tape.constant(x);
            let y = tape.matvec(&m, x).unwrap();
            let y = tape.diagonal_mask(&mask, y).unwrap();
            tape.value(y).to_vec()
        };
        let combo: Vec<Complex64> = u.iter().zip(&v).map(|(p, q)| p * a + q * b).collect();
        let lhs = run(&mut tape, combo);
        let (fu, fv) = (run(&mut tape, u), run(&mut tape, v));
        for k in 0..n {
            prop_assert!((lhs[k] - (fu[k] * a + fv[k] * b)).norm() < 1e-12);
        }
    }

    #[test]
    fn unitary_matvec_conserves_energy(n in 1usize..40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = ideal_dft(n, false).unwrap().entries;
        let v = random_vec(&mut rng, n);
        let store = ParameterStore::new();
        let mut tape = Tape::new(&store);
        let x = tape.constant(v.clone());
        let y = tape.matvec(&f, x).unwrap();
        let before: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let after: f64 = tape.value(y).iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn prediction_ignores_output_gain_and_global_phase(seed in any::<u64>(), gain in 0.01f64..100.0, phi in 0.0..2.0 * PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_vec(&mut rng, 10);
        let rotated: Vec<Complex64> = v.iter().map(|z| z * Complex64::from_polar(gain.sqrt(), phi)).collect();
        prop_assert_eq!(photoconv_core::autograd::predict(&v), photoconv_core::autograd::predict(&rotated));
    }
}

#[test]
fn repeated_passes_are_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 12;
    let m = Arc::new(random_matrix(&mut rng, n, n));
    let mut store = ParameterStore::new();
    let t = store.add("theta", vec![n], (0..n).map(|_| rng.random()).collect(), ParamRole::MaskPhase).unwrap();
    let beta = store.add("beta", vec![1], vec![1.1], ParamRole::OutputScale).unwrap();
    let mask = MaskParams { mode: MaskMode::PhaseOnly, amplitude: None, phase: Some(t), perturbation: None };
    let input = random_vec(&mut rng, n);
    let run = || {
        let mut tape = Tape::new(&store);
        let x = tape.constant(input.clone());
        let y = tape.matvec(&m, x).unwrap();
        let y = tape.diagonal_mask(&mask, y).unwrap();
        let l = tape.power_softmax_xent(y, beta, 3).unwrap();
        let value = tape.scalar(l).unwrap();
        let grads = tape.backward(l).unwrap().grads;
        (value.to_bits(), grads.get(t).iter().map(|g| g.to_bits()).collect::<Vec<_>>())
    };
    assert_eq!(run(), run());
}
