use std::f64::consts::PI;

use std::sync::Arc;

use num_complex::Complex64;

use super::geometry::StarCouplerGeometry;
use super::index::CenteredIndexRange;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Where a transfer matrix came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Ideal { inverse: bool },
    StarCoupler(Box<StarCouplerGeometry>),
    /// Multiplicative noise applied on top of another matrix.
    Perturbed(Box<Provenance>),
}

/// An `M x N` field-coupling matrix, rows are output ports and columns input
/// ports, both in centered index order. Entries are shared so that network
/// layers and tapes can hold them without copying.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    pub entries: Arc<ComplexMatrix>,
    pub provenance: Provenance,
    pub global_phase_removed: bool,
}

impl TransferMatrix {
    pub fn new(entries: ComplexMatrix, provenance: Provenance) -> Self {
        Self {
            entries: Arc::new(entries),
            provenance,
            global_phase_removed: false,
        }
    }

    pub fn outputs(&self) -> usize {
        self.entries.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self.provenance, Provenance::Ideal { .. })
    }
}

/// Unitary centered DFT, `(1/sqrt N) exp(-+ i 2π n m / N)` with the minus sign
/// for the forward transform.
pub fn ideal_dft(n: usize, inverse: bool) -> Result<TransferMatrix> {
    if n == 0 {
        return Err(Error::InvalidSize("DFT size must be >= 1".into()));
    }
    let entries = centered_kernel(n, n, n, inverse);
    Ok(TransferMatrix::new(entries, Provenance::Ideal { inverse }))
}

/// The `M x N` forward DFT restricted to the `M` centered output frequencies:
/// the ideal spectral-pooling matrix (`M <= N`).
pub fn ideal_truncated_dft(outputs: usize, inputs: usize) -> Result<TransferMatrix> {
    if outputs == 0 || inputs == 0 {
        return Err(Error::InvalidSize("pooling DFT needs M, N >= 1".into()));
    }
    if outputs > inputs {
        return Err(Error::InvalidSize(format!(
            "pooling keeps M <= N frequencies, got M={outputs}, N={inputs}"
        )));
    }
    let entries = centered_kernel(outputs, inputs, inputs, false);
    Ok(TransferMatrix::new(entries, Provenance::Ideal { inverse: false }))
}

fn centered_kernel(rows: usize, cols: usize, period: usize, inverse: bool) -> ComplexMatrix {
    let out_range = CenteredIndexRange::new(rows).expect("rows >= 1");
    let in_range = CenteredIndexRange::new(cols).expect("cols >= 1");
    let sign = if inverse { 1.0 } else { -1.0 };
    let norm = 1.0 / (period as f64).sqrt();
    let p = period as i64;
    ComplexMatrix::from_fn(rows, cols, |r, c| {
        let m = out_range.index_at(r);
        let n = in_range.index_at(c);
        // reduce n*m mod N before scaling so large N keeps full phase accuracy
        let k = (n * m).rem_euclid(p) as f64;
        Complex64::from_polar(norm, sign * 2.0 * PI * k / period as f64)
    })
}
