use std::io::Write;

use crate::error::{Error, Result};
use crate::fmt::full;
use crate::layers::{Layer, Network};
use crate::optics::{ideal_truncated_dft, overlap_fidelity, TransferMatrix};
use crate::trainer::{build_network, train, Dataset, NetworkConfig, OpticsMode, TrainSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityAccuracyRow {
    pub theta_deg: f64,
    /// Radius of the input star coupler.
    pub radius_m: f64,
    /// Overlap fidelity of the input star coupler against its ideal DFT.
    pub fidelity: f64,
    pub accuracy: f64,
}

fn input_coupler(network: &Network) -> Option<&TransferMatrix> {
    network.layers.iter().find_map(|l| match l {
        Layer::Convolution(c) => Some(&c.f_in),
        Layer::Diffractive(d) => Some(&d.transform),
        Layer::Transform(t) => Some(t),
        Layer::FullyConnected(_) => None,
    })
}

/// Builds the configured network with physical star couplers at each edge
/// angle, trains it and records the test accuracy next to the input
/// coupler's fidelity.
pub fn fidelity_accuracy_sweep(
    config: &NetworkConfig,
    thetas_deg: &[f64],
    train_data: &Dataset,
    test_data: &Dataset,
    spec: &TrainSpec,
) -> Result<Vec<FidelityAccuracyRow>> {
    let OpticsMode::Physical { .. } = config.optics else {
        return Err(Error::InvalidConfig("fidelity/accuracy sweep needs physical optics".into()));
    };
    let mut rows = Vec::with_capacity(thetas_deg.len());
    for &theta in thetas_deg {
        let mut cfg = config.clone();
        if let OpticsMode::Physical { theta_n0_deg, .. } = &mut cfg.optics {
            *theta_n0_deg = theta;
        }
        let mut network = build_network(&cfg)?;
        let coupler = input_coupler(&network)
            .ok_or_else(|| Error::InvalidStack("network has no star coupler".into()))?;
        let radius_m = match &coupler.provenance {
            crate::optics::Provenance::StarCoupler(g) => g.radius_m,
            _ => f64::NAN,
        };
        let ideal = ideal_truncated_dft(coupler.outputs(), coupler.inputs())?;
        let fidelity = overlap_fidelity(&coupler.entries, &ideal.entries)?;
        let report = train(&mut network, train_data, test_data, spec)?;
        log::info!("theta {theta} deg: F {fidelity:.5}, accuracy {:.4}", report.final_test_accuracy);
        rows.push(FidelityAccuracyRow {
            theta_deg: theta,
            radius_m,
            fidelity,
            accuracy: report.final_test_accuracy,
        });
    }
    Ok(rows)
}

pub fn write_fidelity_accuracy_csv<W: Write>(out: W, rows: &[FidelityAccuracyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta_deg", "R_m", "F", "accuracy"])?;
    for r in rows {
        w.write_record([full(r.theta_deg), full(r.radius_m), full(r.fidelity), full(r.accuracy)])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
