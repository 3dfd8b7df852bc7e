//! Desk-scale noise study on PCNN-112-16: degradation at a few noise levels
//! and recovery by final-layer and full retraining.
//!
//! `cargo run --release -p photoconv-core --example noise_study -- [DATA_DIR]`

use std::path::PathBuf;

use photoconv_core::noise::{degradation_sweep, inject, retrain, retrain_spec, NoiseKind, NoiseSpec, NoiseTarget, RetrainScope};
use photoconv_core::trainer::{build_network, evaluate, load_mnist, train, NetworkConfig, Split, TrainSpec};

fn main() -> photoconv_core::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/mnist".into()));
    let train_data = load_mnist(&dir, Split::Train)?.head(10_000);
    let test_data = load_mnist(&dir, Split::Test)?.head(2_000);
    let mut net = build_network(&NetworkConfig::preset("pcnn-112-16"))?;
    train(&mut net, &train_data, &test_data, &TrainSpec::desk_scale())?;
    let clean = evaluate(&net, &test_data)?.accuracy;
    println!("clean {clean:.4}");
    let targets = [NoiseTarget::StarMatrices, NoiseTarget::FilterMasks];
    let rows = degradation_sweep(
        &net,
        &[0.01, 0.05, 0.1],
        &[NoiseKind::Phase, NoiseKind::Amplitude, NoiseKind::Complex],
        &targets,
        5,
        &test_data,
        0,
    )?;
    for r in &rows {
        println!("sigma {:.2} {:9} mean {:.4} std {:.4}", r.sigma, r.kind.as_str(), r.mean_acc, r.std_acc);
    }
    let noisy = inject(&net, &NoiseSpec::new(0.05, NoiseKind::Phase, 0))?;
    println!("noisy {:.4}", evaluate(&noisy, &test_data)?.accuracy);
    for scope in [RetrainScope::FinalLayerOnly, RetrainScope::Full] {
        let mut n = noisy.clone();
        let report = retrain(&mut n, scope, &train_data, &test_data, &retrain_spec())?;
        println!("retrain {} {:.4}", scope.as_str(), report.final_test_accuracy);
    }
    Ok(())
}
