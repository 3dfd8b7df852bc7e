use std::io::Write;

use super::coupler::coupling_matrix;
use super::dft::ideal_dft;
use super::geometry::{normalized_radius, ParaxialPolicy, SlabOptics, StarCouplerGeometry};
use super::metrics::{fidelity, transmission};
use super::quadrature::QuadratureSpec;
use crate::error::{Error, Result};
use crate::fmt::full;

/// One row of the fidelity/transmission trade-off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TradeoffPoint {
    /// Outermost port angle in radians.
    pub theta_n0: f64,
    pub radius_m: f64,
    pub normalized_radius_m: f64,
    pub fidelity: f64,
    pub transmission: f64,
}

/// Sweeps the edge angle `θ_n0` linearly over `theta_range` (radians,
/// inclusive) for an `n x n` coupler; the radius at each step follows from
/// placing the outermost port at `θ_n0`.
pub fn tradeoff_sweep(
    n: usize,
    theta_range: (f64, f64),
    steps: usize,
    optics: SlabOptics,
    quad: &QuadratureSpec,
    policy: &ParaxialPolicy,
) -> Result<Vec<TradeoffPoint>> {
    let (lo, hi) = theta_range;
    let bound = policy.bound_deg.to_radians();
    if !(lo > 0.0 && lo <= hi && hi <= bound + 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "sweep range must satisfy 0 < start <= end <= {} deg, got {:.4}..{:.4} deg",
            policy.bound_deg,
            lo.to_degrees(),
            hi.to_degrees()
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidConfig("sweep needs at least one step".into()));
    }
    let reference = ideal_dft(n, false)?;
    (0..steps)
        .map(|i| {
            let theta = if steps == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            };
            let geometry = StarCouplerGeometry::from_edge_angle(optics, theta, n, n, policy)?;
            let m = coupling_matrix(&geometry, quad)?;
            Ok(TradeoffPoint {
                theta_n0: theta,
                radius_m: geometry.radius_m,
                normalized_radius_m: normalized_radius(theta, optics.slab_wavelength()),
                fidelity: fidelity(&m.entries, &reference.entries)?,
                transmission: transmission(&m.entries)?,
            })
        })
        .collect()
}

/// CSV with header `theta_deg,R_m,R_norm_m,F,T`.
pub fn write_tradeoff_csv<W: Write>(out: W, points: &[TradeoffPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta_deg", "R_m", "R_norm_m", "F", "T"])?;
    for p in points {
        w.write_record([
            full(p.theta_n0.to_degrees()),
            full(p.radius_m),
            full(p.normalized_radius_m),
            full(p.fidelity),
            full(p.transmission),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_ratio_follows_edge_angle() {
        let pts = tradeoff_sweep(
            64,
            (5f64.to_radians(), 15f64.to_radians()),
            3,
            SlabOptics::default(),
            &QuadratureSpec::default(),
            &ParaxialPolicy::default(),
        )
        .unwrap();
        let ratio = pts[0].radius_m / pts[2].radius_m;
        let expect = (15f64.to_radians().sin() / 5f64.to_radians().sin()).powi(2);
        assert!((ratio - expect).abs() < 1e-9);
        assert!((expect - 8.8).abs() < 0.1);
        let mut buf = Vec::new();
        write_tradeoff_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta_deg,R_m,R_norm_m,F,T\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn rejects_out_of_range_sweeps() {
        let run = |lo: f64, hi: f64| {
            tradeoff_sweep(
                8,
                (lo.to_radians(), hi.to_radians()),
                2,
                SlabOptics::default(),
                &QuadratureSpec::default(),
                &ParaxialPolicy::default(),
            )
        };
        assert!(run(0.0, 10.0).is_err());
        assert!(run(5.0, 16.0).is_err());
        assert!(run(10.0, 5.0).is_err());
    }
}
