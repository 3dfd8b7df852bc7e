//! Ideal centered DFTs and star-coupler transfer matrices.
//!
//! A star coupler with ports on two confocal arcs of radius `R` performs an
//! approximate DFT when the port angles follow `sin θ_n = n·sqrt(λ̃/(N R))`.
//! [`coupling_matrix`] evaluates the scalar-diffraction coupling integrals
//! numerically; [`fidelity`] and [`transmission`] summarise how close the
//! result is to [`ideal_dft`].

mod coupler;
mod dft;
mod footprint;
mod geometry;
mod index;
mod metrics;
pub mod quadrature;
mod sweep;

pub use coupler::{coupling_matrix, gaussian_mode};
pub use dft::{ideal_dft, ideal_truncated_dft, Provenance, TransferMatrix};
pub use footprint::{footprint_compare, FootprintModel, FootprintReport};
pub use geometry::{
    normalized_radius, radius_for_edge_angle, waveguide_angles, ParaxialPolicy, SlabOptics,
    StarCouplerGeometry, WaveguideAngles,
};
pub use index::CenteredIndexRange;
pub use metrics::{fidelity, overlap_fidelity, transmission};
pub use quadrature::{GaussLegendre, PhaseKernel, QuadratureSpec};
pub use sweep::{tradeoff_sweep, write_tradeoff_csv, TradeoffPoint};
