//! Dense complex linear algebra shared by the optics and network code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// `max |M^H M - I|` over all entries.
pub fn unitarity_error(m: &ComplexMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let mut worst = 0.0f64;
    for (r, c) in (0..gram.nrows()).flat_map(|r| (0..gram.ncols()).map(move |c| (r, c))) {
        let target = if r == c { 1.0 } else { 0.0 };
        worst = worst.max((gram[(r, c)] - Complex64::new(target, 0.0)).norm());
    }
    worst
}

/// Largest entry-wise modulus of `a - b`. Panics on shape mismatch.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Total power `sum |v|^2`.
pub fn power(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Dense `M v` on slices, used where the tape keeps plain vectors.
pub(crate) fn matvec_into(m: &ComplexMatrix, x: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(m.ncols(), x.len());
    debug_assert_eq!(m.nrows(), out.len());
    out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
    // column-major storage: accumulate column by column
    for (c, &xc) in x.iter().enumerate() {
        if xc.re == 0.0 && xc.im == 0.0 {
            continue;
        }
        let col = m.column(c);
        for (o, &a) in out.iter_mut().zip(col.iter()) {
            *o += a * xc;
        }
    }
}

/// Dense `M^H y` on slices.
pub(crate) fn adjoint_matvec_into(m: &ComplexMatrix, y: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(m.nrows(), y.len());
    debug_assert_eq!(m.ncols(), out.len());
    for (c, o) in out.iter_mut().enumerate() {
        let col = m.column(c);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&a, &yr) in col.iter().zip(y.iter()) {
            acc += a.conj() * yr;
        }
        *o = acc;
    }
}
