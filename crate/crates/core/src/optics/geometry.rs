use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::index::CenteredIndexRange;
use crate::error::{Error, Result};

/// Material and mode parameters of the slab region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabOptics {
    /// Vacuum wavelength in meters.
    pub wavelength_m: f64,
    /// Effective index of the slab.
    pub slab_index: f64,
    /// Gaussian mode width parameter `w` in meters.
    pub mode_width_m: f64,
}

impl Default for SlabOptics {
    fn default() -> Self {
        Self {
            wavelength_m: 1550e-9,
            slab_index: 2.85,
            mode_width_m: 500e-9,
        }
    }
}

impl SlabOptics {
    /// `λ̃ = λ / n_s`.
    pub fn slab_wavelength(&self) -> f64 {
        self.wavelength_m / self.slab_index
    }

    /// `k̃ = 2π n_s / λ`.
    pub fn slab_wavenumber(&self) -> f64 {
        2.0 * PI * self.slab_index / self.wavelength_m
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.wavelength_m) || !ok(self.slab_index) || !ok(self.mode_width_m) {
            return Err(Error::GeometryInfeasible(format!(
                "wavelength, slab index and mode width must be positive and finite, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// How strictly fan-out angles are held to the small-angle regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParaxialPolicy {
    /// Angles above this raise a warning (or an error when `strict`).
    pub bound_deg: f64,
    /// Angles above this are always rejected.
    pub hard_limit_deg: f64,
    pub strict: bool,
}

impl Default for ParaxialPolicy {
    fn default() -> Self {
        Self {
            bound_deg: 15.0,
            hard_limit_deg: 20.0,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveguideAngles {
    /// Radians, one per centered index in ascending order.
    pub angles: Vec<f64>,
    /// Set when some `|θ|` lies between the paraxial bound and the hard limit.
    pub exceeds_paraxial_bound: bool,
}

/// Port angles `θ_n = asin(n sqrt(λ̃/(N R)))` for the `n` in the centered
/// range of size `n_ports`.
pub fn waveguide_angles(
    n_ports: usize,
    radius_m: f64,
    slab_wavelength_m: f64,
    policy: &ParaxialPolicy,
) -> Result<WaveguideAngles> {
    port_angles(n_ports, n_ports, radius_m, slab_wavelength_m, policy)
}

/// Angles for `count` centered ports placed with the pitch of an
/// `pitch_ports`-point transform. `count < pitch_ports` gives the near-axis
/// outputs of a pooling coupler.
pub(crate) fn port_angles(
    count: usize,
    pitch_ports: usize,
    radius_m: f64,
    slab_wavelength_m: f64,
    policy: &ParaxialPolicy,
) -> Result<WaveguideAngles> {
    let range = CenteredIndexRange::new(count)?;
    if pitch_ports == 0 {
        return Err(Error::InvalidSize("pitch port count must be >= 1".into()));
    }
    if !(radius_m.is_finite() && radius_m > 0.0) {
        return Err(Error::GeometryInfeasible(format!("radius must be positive, got {radius_m}")));
    }
    let pitch = (slab_wavelength_m / (pitch_ports as f64 * radius_m)).sqrt();
    let mut angles = Vec::with_capacity(count);
    let mut exceeds = false;
    for n in range.iter() {
        let s = n as f64 * pitch;
        if s.abs() > 1.0 {
            return Err(Error::GeometryInfeasible(format!(
                "port n={n}: sin θ = {s:.6} > 1 (radius {radius_m:e} m too small for {pitch_ports} ports)"
            )));
        }
        let theta = s.asin();
        let deg = theta.abs().to_degrees();
        if deg > policy.hard_limit_deg || (policy.strict && deg > policy.bound_deg) {
            let limit_deg = if policy.strict { policy.bound_deg } else { policy.hard_limit_deg };
            return Err(Error::ParaxialLimit {
                angle_deg: deg,
                limit_deg,
            });
        }
        exceeds |= deg > policy.bound_deg;
        angles.push(theta);
    }
    if exceeds {
        log::warn!(
            "fan-out angle beyond the {} deg paraxial bound; scalar model accuracy degrades",
            policy.bound_deg
        );
    }
    Ok(WaveguideAngles {
        angles,
        exceeds_paraxial_bound: exceeds,
    })
}

/// Radius that puts the outermost port `n0` at `theta_n0`:
/// `R = |n0|^2 λ̃ / (N sin^2 θ_n0)`.
pub fn radius_for_edge_angle(n_ports: usize, theta_n0: f64, slab_wavelength_m: f64) -> Result<f64> {
    let edge = CenteredIndexRange::new(n_ports)?.max_abs();
    if edge == 0 {
        return Err(Error::InvalidSize("a single-port coupler has no edge angle".into()));
    }
    let s = theta_n0.sin();
    if s == 0.0 || !s.is_finite() {
        return Err(Error::GeometryInfeasible(format!("edge angle {theta_n0} rad gives no radius")));
    }
    Ok((edge * edge) as f64 * slab_wavelength_m / (n_ports as f64 * s * s))
}

/// N-independent normalised radius `λ̃ / sin^2 θ_n0`.
pub fn normalized_radius(theta_n0: f64, slab_wavelength_m: f64) -> f64 {
    let s = theta_n0.sin();
    slab_wavelength_m / (s * s)
}

/// Physical description of an `N`-input, `M`-output DFT star coupler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarCouplerGeometry {
    pub optics: SlabOptics,
    pub radius_m: f64,
    pub inputs: usize,
    pub outputs: usize,
    pub input_angles: Vec<f64>,
    pub output_angles: Vec<f64>,
}

impl StarCouplerGeometry {
    /// Places ports on the DFT angles for the given radius. Outputs use the
    /// pitch of the `inputs`-point transform, so `outputs < inputs` keeps the
    /// central (low-frequency) ports of the same transform.
    pub fn dft(
        optics: SlabOptics,
        radius_m: f64,
        inputs: usize,
        outputs: usize,
        policy: &ParaxialPolicy,
    ) -> Result<Self> {
        optics.validate()?;
        if outputs > inputs {
            return Err(Error::InvalidSize(format!(
                "star coupler expects M <= N, got N={inputs}, M={outputs}"
            )));
        }
        let lt = optics.slab_wavelength();
        let input_angles = port_angles(inputs, inputs, radius_m, lt, policy)?.angles;
        let output_angles = port_angles(outputs, inputs, radius_m, lt, policy)?.angles;
        let geometry = Self {
            optics,
            radius_m,
            inputs,
            outputs,
            input_angles,
            output_angles,
        };
        geometry.validate(policy)?;
        Ok(geometry)
    }

    /// Geometry whose outermost input port sits at `theta_n0` (radians).
    pub fn from_edge_angle(
        optics: SlabOptics,
        theta_n0: f64,
        inputs: usize,
        outputs: usize,
        policy: &ParaxialPolicy,
    ) -> Result<Self> {
        let radius = radius_for_edge_angle(inputs, theta_n0, optics.slab_wavelength())?;
        Self::dft(optics, radius, inputs, outputs, policy)
    }

    /// `sqrt(λ̃ / (N R))`, the sine increment between neighbouring ports.
    pub fn sine_pitch(&self) -> f64 {
        (self.optics.slab_wavelength() / (self.inputs as f64 * self.radius_m)).sqrt()
    }

    pub fn edge_angle(&self) -> f64 {
        self.input_angles.first().copied().unwrap_or(0.0).abs()
    }

    pub fn validate(&self, policy: &ParaxialPolicy) -> Result<()> {
        self.optics.validate()?;
        let ratio = self.optics.mode_width_m / self.radius_m;
        if ratio.is_nan() || ratio >= 1e-2 {
            return Err(Error::GeometryInfeasible(format!(
                "mode width / radius = {ratio:.3e}, need w << R (< 1e-2)"
            )));
        }
        if self.input_angles.len() != self.inputs || self.output_angles.len() != self.outputs {
            return Err(Error::shape(
                format!("{} input / {} output angles", self.inputs, self.outputs),
                format!("{} / {}", self.input_angles.len(), self.output_angles.len()),
            ));
        }
        let pitch = self.sine_pitch();
        for (angles, count) in [(&self.input_angles, self.inputs), (&self.output_angles, self.outputs)] {
            let range = CenteredIndexRange::new(count)?;
            for (theta, n) in angles.iter().zip(range.iter()) {
                if (theta.sin() - n as f64 * pitch).abs() > 1e-12 {
                    return Err(Error::GeometryInfeasible(format!(
                        "port n={n} at {theta} rad is off the DFT placement"
                    )));
                }
                if theta.abs().to_degrees() > policy.hard_limit_deg {
                    return Err(Error::ParaxialLimit {
                        angle_deg: theta.abs().to_degrees(),
                        limit_deg: policy.hard_limit_deg,
                    });
                }
            }
        }
        Ok(())
    }
}
