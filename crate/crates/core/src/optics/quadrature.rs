//! Composite Gauss–Legendre quadrature with refinement by panel doubling.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How angles enter the propagation phases of the coupling integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKernel {
    /// Small-angle phases `k̃ R θ θ'`; ports still sit on the exact
    /// `asin` placement, so the residual `θ - sin θ` mismatch shows up as
    /// phase error at the outermost ports.
    #[default]
    Paraxial,
    /// Phases written with `sin θ sin θ'`.
    Sine,
}

impl PhaseKernel {
    #[inline]
    pub fn apply(self, theta: f64) -> f64 {
        match self {
            PhaseKernel::Paraxial => theta,
            PhaseKernel::Sine => theta.sin(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Gauss–Legendre order of each panel.
    pub points_per_panel: usize,
    /// Integration window half-width in units of the mode width `w` (in arc length).
    pub half_width_modes: f64,
    /// Accept when successive estimates differ by at most
    /// `tolerance * ∫|integrand|`.
    pub tolerance: f64,
    /// Maximum number of panel doublings after the first comparison.
    pub max_refinements: usize,
    pub kernel: PhaseKernel,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            points_per_panel: 64,
            half_width_modes: 5.0,
            tolerance: 1e-10,
            max_refinements: 4,
            kernel: PhaseKernel::default(),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_panel < 2 {
            return Err(Error::InvalidConfig("quadrature needs >= 2 points per panel".into()));
        }
        if self.half_width_modes.is_nan()
            || self.tolerance.is_nan()
            || self.half_width_modes <= 0.0
            || self.tolerance <= 0.0
        {
            return Err(Error::InvalidConfig(
                "quadrature half width and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Same spec with twice the points per panel.
    pub fn doubled(&self) -> Self {
        Self {
            points_per_panel: self.points_per_panel * 2,
            ..*self
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be >= 1");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights of the composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.order());
        let mut ws = Vec::with_capacity(panels * self.order());
        for p in 0..panels {
            let mid = a + h * (p as f64 + 0.5);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * h * x);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }

    pub fn integrate<F: Fn(f64) -> Complex64>(&self, a: f64, b: f64, panels: usize, f: F) -> Complex64 {
        let (xs, ws) = self.composite(a, b, panels);
        xs.iter().zip(&ws).map(|(&x, &w)| f(x) * w).sum()
    }

    /// Integrates with 1, 2, 4, ... panels until two successive estimates
    /// agree to `tolerance * ∫|f|`.
    pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
        &self,
        a: f64,
        b: f64,
        tolerance: f64,
        max_refinements: usize,
        f: F,
    ) -> Result<Complex64> {
        let mut panels = 1;
        let mut coarse = self.integrate(a, b, panels, &f);
        for _ in 0..=max_refinements {
            panels *= 2;
            let (xs, ws) = self.composite(a, b, panels);
            let mut fine = Complex64::new(0.0, 0.0);
            let mut l1 = 0.0;
            for (&x, &w) in xs.iter().zip(&ws) {
                let v = f(x);
                fine += v * w;
                l1 += v.norm() * w;
            }
            if (fine - coarse).norm() <= tolerance * l1.max(f64::MIN_POSITIVE) {
                return Ok(fine);
            }
            coarse = fine;
        }
        let fine = self.integrate(a, b, panels * 2, &f);
        Err(Error::QuadratureNonConvergence { coarse, fine })
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in [1usize, 2, 3, 8, 64, 128] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
            for i in 0..n {
                assert!((g.nodes()[i] + g.nodes()[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let g = GaussLegendre::new(5);
        for deg in 0..10i32 {
            let got = g.integrate(-1.0, 1.0, 1, |x| Complex64::new(x.powi(deg), 0.0)).re;
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn gaussian_fourier_integral_matches_closed_form() {
        // ∫ e^{-x^2} e^{-i k x} dx = sqrt(π) e^{-k^2/4}
        let g = GaussLegendre::new(64);
        let k = 3.0;
        let got = g
            .integrate_adaptive(-8.0, 8.0, 1e-12, 4, |x| Complex64::from_polar((-x * x).exp(), -k * x))
            .unwrap();
        let exact = PI.sqrt() * (-k * k / 4.0).exp();
        assert!((got.re - exact).abs() < 1e-12 && got.im.abs() < 1e-12);
    }

    #[test]
    fn wild_integrand_reports_non_convergence() {
        let g = GaussLegendre::new(4);
        let err = g
            .integrate_adaptive(0.0, 1.0, 1e-14, 1, |x| Complex64::from_polar(1.0, 4000.0 * x * x))
            .unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }
}
