use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::dft::{Provenance, TransferMatrix};
use super::geometry::StarCouplerGeometry;
use super::index::CenteredIndexRange;
use super::quadrature::{GaussLegendre, QuadratureSpec};
use crate::error::Result;
use crate::linalg::ComplexMatrix;

/// Power-normalised Gaussian waveguide mode expressed in angle,
/// `(2/(π w^2))^{1/4} exp(-(R θ / w)^2)`.
#[inline]
pub fn gaussian_mode(theta: f64, radius_m: f64, mode_width_m: f64) -> f64 {
    let x = radius_m * theta / mode_width_m;
    (2.0 / (PI * mode_width_m * mode_width_m)).powf(0.25) * (-x * x).exp()
}

/// Scalar-diffraction coupling matrix of a star coupler, `κ[m][n]` from input
/// port `n` to output port `m`.
///
/// For every input the field radiated onto the output arc is
/// `U(θ'_m) = e^{i k̃R} / sqrt(i λ̃ R) ∫ Φ(θ - θ_n) e^{-i k̃R s(θ) s(θ'_m)} R cos θ dθ`
/// and the coupling into output `m` is
/// `κ = U(θ'_m) ∫ Φ(θ' - θ'_m) e^{-i k̃R (θ' - θ'_m) s(θ_n)} R dθ'`,
/// with `s` the phase kernel. Both integrals are evaluated by quadrature over
/// `± half_width_modes · w / R` around the port. The constant phase is then
/// removed so the centre entry is real and positive.
pub fn coupling_matrix(geometry: &StarCouplerGeometry, quad: &QuadratureSpec) -> Result<TransferMatrix> {
    quad.validate()?;
    geometry.optics.validate()?;
    let radius = geometry.radius_m;
    let w = geometry.optics.mode_width_m;
    let lt = geometry.optics.slab_wavelength();
    let kr = geometry.optics.slab_wavenumber() * radius;
    let kernel = quad.kernel;
    let half = quad.half_width_modes * w / radius;
    let rule = GaussLegendre::new(quad.points_per_panel);

    // e^{i k̃R} / sqrt(i λ̃ R)
    let prefactor = Complex64::from_polar(1.0, kr.rem_euclid(2.0 * PI)) / Complex64::new(0.0, lt * radius).sqrt();
    let out_s: Vec<f64> = geometry.output_angles.iter().map(|&t| kernel.apply(t)).collect();

    let columns: Vec<Vec<Complex64>> = geometry
        .input_angles
        .par_iter()
        .map(|&theta_n| {
            let s_n = kernel.apply(theta_n);
            // receiving-mode overlap; independent of m after shifting θ' by θ'_m
            let outer = rule.integrate_adaptive(-half, half, quad.tolerance, quad.max_refinements, |u| {
                Complex64::from_polar(gaussian_mode(u, radius, w) * radius, -kr * u * s_n)
            })?;
            let emit = EmitterRule::new(&rule, theta_n, half, radius, w, kr, kernel);
            out_s
                .iter()
                .map(|&s_m| {
                    let inner = emit.integrate(s_m, quad, &rule)?;
                    Ok(prefactor * inner * outer)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut entries = ComplexMatrix::zeros(geometry.outputs, geometry.inputs);
    for (n, col) in columns.into_iter().enumerate() {
        for (m, k) in col.into_iter().enumerate() {
            entries[(m, n)] = k;
        }
    }

    let center = entries[(
        centre_position(geometry.outputs)?,
        centre_position(geometry.inputs)?,
    )];
    let global_phase_removed = center.norm() > 0.0;
    if global_phase_removed {
        let unit = center.conj() / center.norm();
        entries.iter_mut().for_each(|z| *z *= unit);
    }
    Ok(TransferMatrix {
        entries: std::sync::Arc::new(entries),
        provenance: Provenance::StarCoupler(Box::new(geometry.clone())),
        global_phase_removed,
    })
}

fn centre_position(n: usize) -> Result<usize> {
    let r = CenteredIndexRange::new(n)?;
    Ok(r.position_of(0).expect("centered range contains 0"))
}

/// Pre-tabulated emitting-mode integrand `Φ(θ - θ_n) R cos θ` on the one- and
/// two-panel composite rules, so each output angle costs two dot products.
struct EmitterRule {
    theta_n: f64,
    half: f64,
    radius: f64,
    width: f64,
    kr: f64,
    kernel: super::quadrature::PhaseKernel,
    coarse: Vec<(f64, f64)>,
    fine: Vec<(f64, f64)>,
    fine_l1: f64,
}

impl EmitterRule {
    fn new(
        rule: &GaussLegendre,
        theta_n: f64,
        half: f64,
        radius: f64,
        width: f64,
        kr: f64,
        kernel: super::quadrature::PhaseKernel,
    ) -> Self {
        let tab = |panels| {
            let (xs, ws) = rule.composite(theta_n - half, theta_n + half, panels);
            xs.iter()
                .zip(ws)
                .map(|(&t, wq)| {
                    let amp = wq * gaussian_mode(t - theta_n, radius, width) * radius * t.cos();
                    (amp, kr * kernel.apply(t))
                })
                .collect::<Vec<_>>()
        };
        let coarse = tab(1);
        let fine = tab(2);
        let fine_l1 = fine.iter().map(|(a, _)| a.abs()).sum();
        Self {
            theta_n,
            half,
            radius,
            width,
            kr,
            kernel,
            coarse,
            fine,
            fine_l1,
        }
    }

    fn integrate(&self, s_m: f64, quad: &QuadratureSpec, rule: &GaussLegendre) -> Result<Complex64> {
        let sum = |tab: &[(f64, f64)]| -> Complex64 {
            tab.iter()
                .map(|&(a, phase)| Complex64::from_polar(a, -phase * s_m))
                .sum()
        };
        let coarse = sum(&self.coarse);
        let fine = sum(&self.fine);
        if (fine - coarse).norm() <= quad.tolerance * self.fine_l1 {
            return Ok(fine);
        }
        let (theta_n, radius, width, kr, kernel) = (self.theta_n, self.radius, self.width, self.kr, self.kernel);
        rule.integrate_adaptive(
            theta_n - self.half,
            theta_n + self.half,
            quad.tolerance,
            quad.max_refinements,
            |t| {
                Complex64::from_polar(
                    gaussian_mode(t - theta_n, radius, width) * radius * t.cos(),
                    -kr * kernel.apply(t) * s_m,
                )
            },
        )
    }
}
