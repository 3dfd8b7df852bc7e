use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, ComplexMatrix};

/// Normalised trace overlap with a unitary reference,
/// `|Tr((C √N / ‖C‖_F)^H R) / N|^2`.
///
/// The candidate is scaled to the Frobenius norm of an `N x N` unitary
/// (`√N`), so a candidate equal to the reference up to a global phase and a
/// positive scale scores exactly 1.
pub fn fidelity(candidate: &ComplexMatrix, reference: &ComplexMatrix) -> Result<f64> {
    if candidate.shape() != reference.shape() {
        return Err(Error::shape(
            format!("{:?}", reference.shape()),
            format!("{:?}", candidate.shape()),
        ));
    }
    let n = square_size(candidate)?;
    let norm = frobenius_norm(candidate);
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let overlap: num_complex::Complex64 = candidate
        .iter()
        .zip(reference.iter())
        .map(|(c, r)| c.conj() * r)
        .sum();
    let scaled = overlap * ((n as f64).sqrt() / norm) / n as f64;
    Ok(scaled.norm_sqr())
}

/// `|<C, R>|^2 / (‖C‖_F^2 ‖R‖_F^2)` for matrices of any common shape. Equals
/// [`fidelity`] when `R` is square unitary, and also applies to truncated
/// (pooling) couplers.
pub fn overlap_fidelity(candidate: &ComplexMatrix, reference: &ComplexMatrix) -> Result<f64> {
    if candidate.shape() != reference.shape() {
        return Err(Error::shape(
            format!("{:?}", reference.shape()),
            format!("{:?}", candidate.shape()),
        ));
    }
    let (nc, nr) = (frobenius_norm(candidate), frobenius_norm(reference));
    if nc == 0.0 || nr == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let overlap: num_complex::Complex64 = candidate
        .iter()
        .zip(reference.iter())
        .map(|(c, r)| c.conj() * r)
        .sum();
    Ok(overlap.norm_sqr() / (nc * nc * nr * nr))
}

/// Mean column power, `Tr(M^H M) / N`.
pub fn transmission(m: &ComplexMatrix) -> Result<f64> {
    let n = square_size(m)?;
    let total: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    Ok(total / n as f64)
}

fn square_size(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::shape("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidSize("empty matrix".into()));
    }
    Ok(m.nrows())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_fidelity_agrees_with_square_form() {
        let f = ideal_dft(6, false).unwrap().entries;
        let g = ComplexMatrix::from_fn(6, 6, |r, c| f[(r, c)] * num_complex::Complex64::from_polar(1.0, 0.05 * (r * c) as f64));
        let a = fidelity(&g, &f).unwrap();
        let b = overlap_fidelity(&g, &f).unwrap();
        assert!((a - b).abs() < 1e-14);
        let pool = crate::optics::ideal_truncated_dft(3, 6).unwrap().entries;
        assert!((overlap_fidelity(&pool.map(|z| z * 0.3), &pool).unwrap() - 1.0).abs() < 1e-14);
    }
    use crate::optics::ideal_dft;
    use num_complex::Complex64;

    #[test]
    fn self_fidelity_and_global_phase() {
        for n in [1usize, 4, 21] {
            let f = ideal_dft(n, false).unwrap().entries;
            assert!((fidelity(&f, &f).unwrap() - 1.0).abs() < 1e-12);
            let rotated = f.map(|z| z * Complex64::from_polar(0.3, 1.234));
            assert!((fidelity(&rotated, &f).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transmission_of_scaled_dft() {
        let f = ideal_dft(8, false).unwrap().entries;
        assert!((transmission(&f).unwrap() - 1.0).abs() < 1e-12);
        let half = f.map(|z| z * 0.5);
        assert!((transmission(&half).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn error_paths() {
        let f = ideal_dft(4, false).unwrap().entries;
        let g = ideal_dft(5, false).unwrap().entries;
        assert!(matches!(fidelity(&f, &g), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(fidelity(&ComplexMatrix::zeros(4, 4), &f), Err(Error::ZeroMatrix)));
        assert!(transmission(&ComplexMatrix::zeros(2, 3)).is_err());
    }
}
