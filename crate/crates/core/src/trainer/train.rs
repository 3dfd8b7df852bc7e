use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::dataset::Dataset;
use super::evaluate::evaluate;
use crate::error::{Error, Result};
use crate::fmt::full;
use crate::layers::{Network, SampleOutcome};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSpec {
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamConfig,
    /// Seeds the shuffling order.
    pub seed: u64,
    /// Use only the first `n` training / test samples.
    pub train_subset: Option<usize>,
    pub test_subset: Option<usize>,
    /// Set `β` before training so initial logits have unit spread.
    pub calibrate_output_scale: bool,
    pub calibration_samples: usize,
}

impl Default for TrainSpec {
    fn default() -> Self {
        Self {
            batch_size: 8,
            epochs: 80,
            adam: AdamConfig::default(),
            seed: 0,
            train_subset: None,
            test_subset: None,
            calibrate_output_scale: true,
            calibration_samples: 64,
        }
    }
}

impl TrainSpec {
    /// 10 000 training samples, 2 000 test samples, 10 epochs.
    pub fn desk_scale() -> Self {
        Self {
            epochs: 10,
            train_subset: Some(10_000),
            test_subset: Some(2_000),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.adam.learning_rate.is_nan() || self.adam.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Metrics after one epoch. Training figures are averages over the epoch's
/// minibatches, taken before each update; test figures use the end-of-epoch
/// parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_loss: f64,
    pub test_acc: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Test loss / accuracy before the first update.
    pub initial_test_loss: f64,
    pub initial_test_accuracy: f64,
    pub final_test_accuracy: f64,
    pub parameter_count: usize,
    pub output_scale: f64,
    pub wall_clock_s: f64,
}

/// Sets `β` so that `β^2 |v|^2` has unit standard deviation over the outputs
/// of the first `samples` inputs. Returns the new `β` (unchanged when the
/// powers have no spread).
pub fn calibrate_output_scale(network: &mut Network, data: &Dataset, samples: usize) -> Result<f64> {
    let n = samples.min(data.len());
    let outputs: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| Ok(network.output(data.sample(i))?.iter().map(|z| z.norm_sqr()).collect()))
        .collect::<Result<_>>()?;
    let powers: Vec<f64> = outputs.into_iter().flatten().collect();
    if powers.len() > 1 {
        let mean = powers.iter().sum::<f64>() / powers.len() as f64;
        let var = powers.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (powers.len() - 1) as f64;
        let std = var.sqrt();
        if std > 0.0 && std.is_finite() {
            network.set_output_gain(std.powf(-0.5));
        }
    }
    Ok(network.output_gain())
}

/// Minibatch Adam on the cross-entropy of output powers. Per-sample
/// gradients are computed in parallel and summed in sample order, so the
/// result does not depend on the thread count.
pub fn train(network: &mut Network, train_data: &Dataset, test_data: &Dataset, spec: &TrainSpec) -> Result<TrainReport> {
    spec.validate()?;
    let start = Instant::now();
    let train_set = match spec.train_subset {
        Some(n) => train_data.head(n),
        None => train_data.clone(),
    };
    let test_set = match spec.test_subset {
        Some(n) => test_data.head(n),
        None => test_data.clone(),
    };
    if spec.calibrate_output_scale {
        calibrate_output_scale(network, &train_set, spec.calibration_samples)?;
    }
    let initial = evaluate(network, &test_set)?;
    let mut adam = Adam::new(spec.adam, &network.params);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut records = Vec::with_capacity(spec.epochs);
    let mut last_test_accuracy = initial.accuracy;

    for epoch in 1..=spec.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (batch, chunk) in order.chunks(spec.batch_size).enumerate() {
            let net: &Network = network;
            let outcomes: Vec<SampleOutcome> = chunk
                .par_iter()
                .map(|&i| net.loss_and_gradients(train_set.sample(i), train_set.label(i)))
                .collect::<Result<_>>()?;
            let mut grads = net.params.gradients_zeroed();
            let mut batch_loss = 0.0;
            for (o, &i) in outcomes.iter().zip(chunk) {
                grads.add_assign(&o.gradients);
                batch_loss += o.loss;
                correct += usize::from(o.prediction == train_set.label(i));
            }
            if !batch_loss.is_finite() || !grads.all_finite() {
                return Err(Error::Divergence { epoch, batch });
            }
            grads.scale(1.0 / chunk.len() as f64);
            loss_sum += batch_loss;
            adam.step(&mut network.params, &grads);
        }
        let test = evaluate(network, &test_set)?;
        let n = train_set.len().max(1) as f64;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / n,
            train_acc: correct as f64 / n,
            test_loss: test.mean_loss,
            test_acc: test.accuracy,
        };
        log::info!(
            "epoch {epoch}: train loss {:.4} acc {:.4}, test loss {:.4} acc {:.4}",
            record.train_loss,
            record.train_acc,
            record.test_loss,
            record.test_acc
        );
        last_test_accuracy = test.accuracy;
        records.push(record);
    }
    Ok(TrainReport {
        epochs: records,
        initial_test_loss: initial.mean_loss,
        initial_test_accuracy: initial.accuracy,
        final_test_accuracy: last_test_accuracy,
        parameter_count: network.parameter_count(),
        output_scale: network.output_gain(),
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

pub const REPORT_HEADER: [&str; 5] = ["epoch", "train_loss", "train_acc", "test_loss", "test_acc"];

/// Writes `epoch,train_loss,train_acc,test_loss,test_acc` rows, optionally
/// preceded by fixed leading columns (e.g. scope and sigma).
pub fn write_report_csv<W: Write>(out: W, report: &TrainReport, leading: &[(&str, String)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = leading.iter().map(|(k, _)| *k).chain(REPORT_HEADER).collect();
    w.write_record(&header)?;
    for r in &report.epochs {
        let mut row: Vec<String> = leading.iter().map(|(_, v)| v.clone()).collect();
        row.push(r.epoch.to_string());
        row.extend([r.train_loss, r.train_acc, r.test_loss, r.test_acc].map(full));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
