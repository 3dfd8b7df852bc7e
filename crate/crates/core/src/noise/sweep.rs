use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::inject::{inject, NoiseKind, NoiseSpec, NoiseTarget};
use crate::autograd::ParamRole;
use crate::error::{Error, Result};
use crate::fmt::full;
use crate::layers::Network;
use crate::trainer::{evaluate, Dataset};

/// Seed for instance `parts` of a sweep seeded with `base` (SplitMix64
/// mixing, so neighbouring instances get unrelated streams).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut x = base;
    for &p in parts {
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x = z ^ (z >> 31);
    }
    x
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegradationRow {
    pub sigma: f64,
    pub kind: NoiseKind,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub instances: usize,
    pub seed: u64,
    pub accuracies: Vec<f64>,
}

/// Test accuracy of `instances` independently perturbed copies for every
/// `(σ, kind)`. Rows are ordered by σ, then kind.
pub fn degradation_sweep(
    network: &Network,
    sigmas: &[f64],
    kinds: &[NoiseKind],
    targets: &[NoiseTarget],
    instances: usize,
    data: &Dataset,
    seed: u64,
) -> Result<Vec<DegradationRow>> {
    if instances < 2 {
        return Err(Error::InvalidConfig("a degradation sweep needs at least 2 instances".into()));
    }
    let mut rows = Vec::with_capacity(sigmas.len() * kinds.len());
    for (si, &sigma) in sigmas.iter().enumerate() {
        for (ki, &kind) in kinds.iter().enumerate() {
            let row_seed = derive_seed(seed, &[si as u64, ki as u64]);
            let accuracies = (0..instances)
                .map(|i| {
                    let spec = NoiseSpec {
                        sigma,
                        kind,
                        targets: targets.to_vec(),
                        seed: derive_seed(row_seed, &[i as u64]),
                    };
                    Ok(evaluate(&inject(network, &spec)?, data)?.accuracy)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean_acc, std_acc) = mean_std(&accuracies);
            log::info!("sigma {sigma} {}: {mean_acc:.4} ± {std_acc:.4}", kind.as_str());
            rows.push(DegradationRow {
                sigma,
                kind,
                mean_acc,
                std_acc,
                instances,
                seed: row_seed,
                accuracies,
            });
        }
    }
    Ok(rows)
}

pub fn write_degradation_csv<W: Write>(out: W, rows: &[DegradationRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sigma", "kind", "mean_acc", "std_acc", "instances", "seed"])?;
    for r in rows {
        w.write_record([
            full(r.sigma),
            r.kind.as_str().to_string(),
            full(r.mean_acc),
            full(r.std_acc),
            r.instances.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasNoiseRow {
    pub delta_b: f64,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub instances: usize,
    pub seed: u64,
}

/// Adds `N(0, Δb^2)` to every trainable bias and reports test accuracy.
pub fn bias_noise_sweep(
    network: &Network,
    deltas: &[f64],
    instances: usize,
    data: &Dataset,
    seed: u64,
) -> Result<Vec<BiasNoiseRow>> {
    let biases: Vec<_> = network
        .params
        .iter()
        .filter(|(_, p)| p.role == ParamRole::Bias)
        .map(|(id, _)| id)
        .collect();
    if biases.is_empty() {
        return Err(Error::InvalidConfig("network has no bias parameters".into()));
    }
    if instances == 0 {
        return Err(Error::InvalidConfig("bias-noise sweep needs at least 1 instance".into()));
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for (di, &delta_b) in deltas.iter().enumerate() {
        let normal = Normal::new(0.0, delta_b)
            .map_err(|e| Error::InvalidConfig(format!("bias noise width {delta_b}: {e}")))?;
        let row_seed = derive_seed(seed, &[di as u64]);
        let mut accuracies = Vec::with_capacity(instances);
        for i in 0..instances {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(row_seed, &[i as u64]));
            let mut noisy = network.clone();
            for &id in &biases {
                for b in noisy.params.get_mut(id).values.iter_mut() {
                    *b += normal.sample(&mut rng);
                }
            }
            accuracies.push(evaluate(&noisy, data)?.accuracy);
        }
        let (mean_acc, std_acc) = mean_std(&accuracies);
        rows.push(BiasNoiseRow {
            delta_b,
            mean_acc,
            std_acc,
            instances,
            seed: row_seed,
        });
    }
    Ok(rows)
}

pub fn write_bias_noise_csv<W: Write>(out: W, rows: &[BiasNoiseRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta_b", "mean_acc", "std_acc", "instances", "seed"])?;
    for r in rows {
        w.write_record([
            full(r.delta_b),
            full(r.mean_acc),
            full(r.std_acc),
            r.instances.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, &[0, 0]);
        assert_ne!(a, derive_seed(1, &[0, 1]));
        assert_ne!(a, derive_seed(2, &[0, 0]));
        assert_eq!(a, derive_seed(1, &[0, 0]));
    }

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
