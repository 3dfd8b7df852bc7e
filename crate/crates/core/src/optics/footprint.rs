use serde::{Deserialize, Serialize};

use super::geometry::radius_for_edge_angle;
use crate::error::{Error, Result};

/// Parameters for comparing an FFT-style MZI mesh with a star-coupler DFT.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FootprintModel {
    pub mzi_width_m: f64,
    pub mzi_height_m: f64,
    /// `R_norm = λ̃ / sin^2 θ_n0`.
    pub normalized_radius_m: f64,
    /// `λ̃ = λ / n_s`.
    pub slab_wavelength_m: f64,
    /// Routing allowance added on each side of the slab bounding box.
    pub margin_m: f64,
}

impl Default for FootprintModel {
    fn default() -> Self {
        Self {
            mzi_width_m: 100e-6,
            mzi_height_m: 60e-6,
            normalized_radius_m: 10e-6,
            slab_wavelength_m: 1550e-9 / 2.85,
            margin_m: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FootprintReport {
    pub ports: usize,
    /// `N log2(N) / 2` MZIs of a Cooley–Tukey mesh.
    pub mzi_count: u64,
    pub mzi_area_m2: f64,
    pub edge_angle_rad: f64,
    pub star_radius_m: f64,
    /// Slab extent along the optical axis: the two confocal arcs sit one
    /// radius apart.
    pub star_length_m: f64,
    /// Angular aperture `2 R sin θ_n0`.
    pub star_width_m: f64,
    pub star_area_m2: f64,
    /// `mzi_area / star_area`.
    pub ratio: f64,
}

pub fn footprint_compare(n: usize, model: &FootprintModel) -> Result<FootprintReport> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let sin2 = model.slab_wavelength_m / model.normalized_radius_m;
    if !(sin2 > 0.0 && sin2 <= 1.0) {
        return Err(Error::GeometryInfeasible(format!(
            "normalised radius {} m is below the slab wavelength {} m",
            model.normalized_radius_m, model.slab_wavelength_m
        )));
    }
    let theta = sin2.sqrt().asin();
    let mzi_count = (n as u64) * u64::from(n.trailing_zeros()) / 2;
    let mzi_area = mzi_count as f64 * model.mzi_width_m * model.mzi_height_m;
    let radius = radius_for_edge_angle(n, theta, model.slab_wavelength_m)?;
    let length = radius + 2.0 * model.margin_m;
    let width = 2.0 * radius * theta.sin() + 2.0 * model.margin_m;
    let star_area = length * width;
    Ok(FootprintReport {
        ports: n,
        mzi_count,
        mzi_area_m2: mzi_area,
        edge_angle_rad: theta,
        star_radius_m: radius,
        star_length_m: length,
        star_width_m: width,
        star_area_m2: star_area,
        ratio: mzi_area / star_area,
    })
}
