use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `W = β_amp · U · Σ' · V^T` with square orthogonal `U`, `V` and
/// `Σ' = Σ / β_amp`.
#[derive(Clone, Debug)]
pub struct SvdFactorization {
    pub u: DMatrix<f64>,
    /// Singular values in decreasing order, `min(M, N)` of them.
    pub sigma: Vec<f64>,
    pub v_t: DMatrix<f64>,
    pub beta_amp: f64,
}

impl SvdFactorization {
    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn cols(&self) -> usize {
        self.v_t.ncols()
    }

    /// Attenuator settings `Σ / β_amp`.
    pub fn scaled_sigma(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| s / self.beta_amp).collect()
    }

    /// `U · diag(s) · V^T` as an `M x N` matrix.
    fn compose(&self, s: &[f64]) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows(), self.cols());
        for (i, &v) in s.iter().enumerate() {
            d[(i, i)] = v;
        }
        &self.u * d * &self.v_t
    }

    /// The optically realisable matrix `W' = U Σ' V^T`.
    pub fn scaled_matrix(&self) -> DMatrix<f64> {
        self.compose(&self.scaled_sigma())
    }

    /// `β_amp · U Σ' V^T`, which should reproduce `W`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.scaled_matrix() * self.beta_amp
    }

    /// `max(|U^T U - I|, |V V^T - I|)`.
    pub fn orthogonality_error(&self) -> f64 {
        let eu = &self.u.transpose() * &self.u - DMatrix::identity(self.rows(), self.rows());
        let ev = &self.v_t * self.v_t.transpose() - DMatrix::identity(self.cols(), self.cols());
        eu.amax().max(ev.amax())
    }

    /// Whether `argmax |W' x|^2` equals `argmax |W x|^2` for every input.
    pub fn predictions_agree(&self, w: &DMatrix<f64>, inputs: &[DVector<f64>]) -> bool {
        let scaled = self.scaled_matrix();
        inputs.iter().all(|x| argmax_power(&(w * x)) == argmax_power(&(&scaled * x)))
    }
}

fn argmax_power(v: &DVector<f64>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] * v[i] > v[best] * v[best] {
            best = i;
        }
    }
    best
}

/// SVD of a real weight matrix with `β_amp = max(1, σ_max)`, so every
/// attenuator value `Σ'` lies in `[0, 1]`.
pub fn svd_check(w: &DMatrix<f64>) -> Result<SvdFactorization> {
    let (m, n) = w.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidSize("SVD of an empty matrix".into()));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Svd("matrix has non-finite entries".into()));
    }
    let svd = nalgebra::linalg::SVD::try_new(w.clone(), true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Svd("iteration limit reached".into()))?;
    let thin_u = svd.u.ok_or_else(|| Error::Svd("missing U".into()))?;
    let thin_vt = svd.v_t.ok_or_else(|| Error::Svd("missing V^T".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_cols: Vec<DVector<f64>> = order.iter().map(|&i| thin_u.column(i).into_owned()).collect();
    let v_cols: Vec<DVector<f64>> = order.iter().map(|&i| thin_vt.row(i).transpose()).collect();
    let u = complete_basis(u_cols, m);
    let v = complete_basis(v_cols, n);
    let beta_amp = sigma.first().copied().unwrap_or(0.0).max(1.0);
    Ok(SvdFactorization {
        u,
        sigma,
        v_t: v.transpose(),
        beta_amp,
    })
}

/// Extends orthonormal columns to a full `dim x dim` orthogonal matrix by
/// Gram-Schmidt on the standard basis.
fn complete_basis(mut cols: Vec<DVector<f64>>, dim: usize) -> DMatrix<f64> {
    let mut e = 0;
    while cols.len() < dim && e < dim {
        let mut v = DVector::zeros(dim);
        v[e] = 1.0;
        e += 1;
        for _ in 0..2 {
            for c in &cols {
                let p = c.dot(&v);
                v.axpy(-p, c, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / norm);
        }
    }
    DMatrix::from_columns(&cols)
}
