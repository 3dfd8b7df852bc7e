//! Noise marginals against their analytic laws, and injection/retraining
//! invariants on a small synthetic task.

use std::f64::consts::PI;

use photoconv_core::layers::{Layer, Network};
use photoconv_core::noise::{degradation_sweep, inject, retrain, NoiseKind, NoiseSampler, NoiseSpec, NoiseTarget, RetrainScope};
use photoconv_core::trainer::{build_network, evaluate, train, Dataset, NetworkConfig, TrainSpec};
use photoconv_core::ComplexMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

const DRAWS: usize = 100_000;

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`.
fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Critical value at α = 0.01.
fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn phase_noise_is_normal_with_width_two_pi_sigma() {
    for (sigma, seed) in [(0.01, 1), (0.05, 2), (0.1, 3)] {
        let mut s = NoiseSampler::new(sigma, NoiseKind::Phase, seed).unwrap();
        let draws: Vec<f64> = (0..DRAWS).map(|_| s.phase()).collect();
        let (_, std) = mean_std(&draws);
        assert!((std / (2.0 * PI * sigma) - 1.0).abs() < 0.02, "σ={sigma}: std {std}");
        let law = Normal::new(0.0, 2.0 * PI * sigma).unwrap();
        let d = ks_statistic(draws, |x| law.cdf(x));
        assert!(d < ks_critical(DRAWS), "σ={sigma}: D={d}");
    }
}

#[test]
fn amplitude_noise_is_a_folded_normal() {
    for (sigma, seed) in [(0.01, 4), (0.05, 5), (0.1, 6)] {
        let mut s = NoiseSampler::new(sigma, NoiseKind::Amplitude, seed).unwrap();
        let draws: Vec<f64> = (0..DRAWS).map(|_| s.amplitude()).collect();
        assert!(draws.iter().all(|a| (0.0..=1.0).contains(a)));
        let (mean, _) = mean_std(&draws);
        let expected = 1.0 - sigma * (2.0 / PI).sqrt();
        assert!((mean / expected - 1.0).abs() < 0.02, "σ={sigma}: mean {mean}");
        let std_normal = Normal::new(0.0, 1.0).unwrap();
        // P(a <= x) = P(|δ| >= 1 - x)
        let cdf = |x: f64| 2.0 * (1.0 - std_normal.cdf((1.0 - x) / sigma));
        let d = ks_statistic(draws, cdf);
        assert!(d < ks_critical(DRAWS), "σ={sigma}: D={d}");
    }
}

#[test]
fn complex_factors_combine_both_marginals() {
    let mut s = NoiseSampler::new(0.05, NoiseKind::Complex, 9).unwrap();
    let factors: Vec<_> = (0..DRAWS).map(|_| s.factor()).collect();
    let (_, phase_std) = mean_std(&factors.iter().map(|z| z.arg()).collect::<Vec<_>>());
    let (amp_mean, _) = mean_std(&factors.iter().map(|z| z.norm()).collect::<Vec<_>>());
    assert!((phase_std / (2.0 * PI * 0.05) - 1.0).abs() < 0.02);
    assert!((amp_mean / (1.0 - 0.05 * (2.0 / PI).sqrt()) - 1.0).abs() < 0.02);
}

/// Ten noisy prototypes on 64 pixels; linearly separable enough for a tiny
/// photonic network to learn quickly.
fn prototype_data(samples: usize, seed: u64) -> Dataset {
    let mut proto_rng = ChaCha8Rng::seed_from_u64(1234);
    let prototypes: Vec<Vec<f64>> = (0..10).map(|_| (0..64).map(|_| proto_rng.random::<f64>()).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(samples * 64);
    let mut labels = Vec::with_capacity(samples);
    for i in 0..samples {
        let c = i % 10;
        values.extend(prototypes[c].iter().map(|p| (p + rng.random_range(-0.25..0.25)).clamp(0.0, 1.0)));
        labels.push(c as u8);
    }
    Dataset::new(64, 10, values, labels).unwrap()
}

fn trained_small_network() -> (Network, Dataset, Dataset) {
    let config = NetworkConfig {
        inputs: 64,
        ..NetworkConfig::preset("pcnn-32-16")
    };
    let mut net = build_network(&config).unwrap();
    let (tr, te) = (prototype_data(600, 1), prototype_data(300, 2));
    let spec = TrainSpec {
        epochs: 6,
        ..TrainSpec::default()
    };
    train(&mut net, &tr, &te, &spec).unwrap();
    (net, tr, te)
}

fn optical_matrices(net: &Network) -> Vec<ComplexMatrix> {
    net.layers
        .iter()
        .flat_map(|l| match l {
            Layer::Convolution(c) => vec![(*c.f_in.entries).clone(), (*c.f_out.entries).clone()],
            Layer::Diffractive(d) => vec![(*d.transform.entries).clone()],
            Layer::Transform(t) => vec![(*t.entries).clone()],
            Layer::FullyConnected(_) => vec![],
        })
        .collect()
}

#[test]
fn noise_degrades_monotonically_and_retraining_keeps_optics_fixed() {
    let (net, tr, te) = trained_small_network();
    let clean = evaluate(&net, &te).unwrap().accuracy;
    assert!(clean > 0.9, "synthetic task should be learnt: {clean}");

    let sigmas = [0.02, 0.04, 0.08, 0.16];
    let targets = [NoiseTarget::StarMatrices, NoiseTarget::FilterMasks];
    let rows = degradation_sweep(&net, &sigmas, &[NoiseKind::Phase], &targets, 20, &te, 77).unwrap();
    for pair in rows.windows(2) {
        assert!(
            pair[1].mean_acc <= pair[0].mean_acc + 0.01,
            "σ {} → {}: {} vs {}",
            pair[0].sigma,
            pair[1].sigma,
            pair[0].mean_acc,
            pair[1].mean_acc
        );
    }

    let zero = degradation_sweep(&net, &[0.0], &[NoiseKind::Complex], &targets, 2, &te, 1).unwrap();
    assert_eq!(zero[0].mean_acc, clean);

    let spec = NoiseSpec::new(0.05, NoiseKind::Phase, 5);
    let a = inject(&net, &spec).unwrap();
    let b = inject(&net, &spec).unwrap();
    assert_eq!(optical_matrices(&a), optical_matrices(&b));
    assert_ne!(optical_matrices(&a), optical_matrices(&net));
    let weights = |n: &Network| n.params.snapshot();
    assert_eq!(weights(&a), weights(&net));

    for scope in [RetrainScope::FinalLayerOnly, RetrainScope::Full] {
        let mut noisy = a.clone();
        let before = optical_matrices(&noisy);
        let spec = TrainSpec {
            epochs: 2,
            calibrate_output_scale: false,
            ..TrainSpec::default()
        };
        retrain(&mut noisy, scope, &tr, &te, &spec).unwrap();
        assert_eq!(optical_matrices(&noisy), before, "{scope:?}");
        let changed: Vec<String> = noisy
            .params
            .iter()
            .zip(a.params.iter())
            .filter(|((_, p), (_, q))| p.values != q.values)
            .map(|((_, p), _)| p.name.clone())
            .collect();
        match scope {
            RetrainScope::FinalLayerOnly => assert_eq!(changed, vec!["layer3.weight".to_string()]),
            RetrainScope::Full => assert!(changed.len() >= 3 && !changed.contains(&"output_scale".to_string())),
        }
    }
}
