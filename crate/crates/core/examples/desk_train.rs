//! Trains PCNN-112-16 on a 10k/2k MNIST subset for 10 epochs.
//!
//! `cargo run --release -p photoconv-core --example desk_train -- [DATA_DIR] [SEED]`

use std::path::PathBuf;

use photoconv_core::trainer::{build_network, load_mnist, train, NetworkConfig, Split, TrainSpec};

fn main() -> photoconv_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "data/mnist".into()));
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let train_data = load_mnist(&dir, Split::Train)?;
    let test_data = load_mnist(&dir, Split::Test)?;
    let mut net = build_network(&NetworkConfig {
        seed,
        ..NetworkConfig::preset("pcnn-112-16")
    })?;
    let spec = TrainSpec {
        seed,
        ..TrainSpec::desk_scale()
    };
    let report = train(&mut net, &train_data, &test_data, &spec)?;
    for r in &report.epochs {
        println!(
            "epoch {:2}  train {:.4} / {:.4}  test {:.4} / {:.4}",
            r.epoch, r.train_loss, r.train_acc, r.test_loss, r.test_acc
        );
    }
    println!(
        "test accuracy {:.4} after {:.1} s ({} parameters, beta {:.3})",
        report.final_test_accuracy, report.wall_clock_s, report.parameter_count, report.output_scale
    );
    Ok(())
}
