//! Dense matrix SVD helpers shared by the decompositions and the solvers.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Thin SVD `A = U diag(sigma) V^H` with `sigma` sorted nonincreasing.
pub(crate) struct ThinSvd<T: Scalar> {
    pub u: DMatrix<T>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<T>,
}

/// Scalars the SVD backend handles: `f64` and `Complex64`.
pub(crate) trait Scalar: ComplexField<RealField = f64> + faer::traits::ComplexField<Real = f64> {}

impl<T> Scalar for T where T: ComplexField<RealField = f64> + faer::traits::ComplexField<Real = f64> {}

/// Relative reconstruction error above which a returned SVD is rejected.
const SVD_CHECK_TOL: f64 = 1e-10;

fn to_faer<T: Scalar>(a: &DMatrix<T>) -> faer::Mat<T> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].clone())
}

fn from_faer<T: Scalar>(a: faer::MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].clone())
}

pub(crate) fn thin_svd<T: Scalar>(a: &DMatrix<T>, slice: usize) -> Result<ThinSvd<T>> {
    let svd = to_faer(a).thin_svd().map_err(|_| Error::SvdFailed { slice })?;
    let d = svd.S().column_vector();
    let sigma: Vec<f64> = (0..d.nrows()).map(|i| d[i].clone().real()).collect();
    let u = from_faer(svd.U());
    let v = from_faer(svd.V());
    let residual = (recompose(&u, &sigma, &v) - a).norm();
    if !(residual <= SVD_CHECK_TOL * a.norm()) || sigma.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::SvdFailed { slice });
    }
    Ok(ThinSvd { u, sigma, v })
}

pub(crate) fn singular_values<T: Scalar>(a: &DMatrix<T>, slice: usize) -> Result<Vec<f64>> {
    to_faer(a).singular_values().map_err(|_| Error::SvdFailed { slice })
}

/// Extends the orthonormal columns of `q` to an orthonormal basis of the
/// whole space. Each new column starts from the standard basis vector with
/// the largest component outside the current span and is orthogonalized
/// twice.
pub(crate) fn complete_basis<T: Scalar>(q: &DMatrix<T>) -> DMatrix<T>
{
    let (m, r) = q.shape();
    let mut basis = DMatrix::<T>::zeros(m, m);
    basis.columns_mut(0, r).copy_from(q);
    let mut outside: Vec<f64> = (0..m)
        .map(|i| 1.0 - (0..r).map(|c| q[(i, c)].clone().modulus_squared()).sum::<f64>())
        .collect();
    for col in r..m {
        let pick = (0..m)
            .max_by(|&a, &b| outside[a].total_cmp(&outside[b]))
            .expect("non-empty basis");
        let mut v = DVector::<T>::zeros(m);
        v[pick] = T::one();
        for _ in 0..2 {
            for c in 0..col {
                let b = basis.column(c);
                let coef = b.dotc(&v);
                v.axpy(-coef, &b.clone_owned(), T::one());
            }
        }
        let norm = v.norm();
        v.unscale_mut(norm);
        for i in 0..m {
            outside[i] -= v[i].clone().modulus_squared();
        }
        basis.set_column(col, &v);
    }
    basis
}

/// Full SVD with square unitary factors: `A = U S V^H`, `U` is `m x m`, `V`
/// is `n x n` and `sigma` holds the `min(m, n)` diagonal entries of `S`.
pub(crate) fn full_svd<T: Scalar>(a: &DMatrix<T>, slice: usize) -> Result<ThinSvd<T>>
{
    let thin = thin_svd(a, slice)?;
    let (m, n) = a.shape();
    let u = if thin.u.ncols() < m { complete_basis(&thin.u) } else { thin.u };
    let v = if thin.v.ncols() < n { complete_basis(&thin.v) } else { thin.v };
    Ok(ThinSvd { u, sigma: thin.sigma, v })
}

/// `U diag(weights) V^H` over the leading `weights.len()` columns.
pub(crate) fn recompose<T: Scalar>(u: &DMatrix<T>, weights: &[f64], v: &DMatrix<T>) -> DMatrix<T>
{
    let mut scaled = u.columns(0, weights.len()).clone_owned();
    for (c, &w) in weights.iter().enumerate() {
        scaled.column_mut(c).scale_mut(w);
    }
    scaled * v.columns(0, weights.len()).adjoint()
}

/// Singular value thresholding `U diag((sigma - tau)_+) V^H`; also returns
/// the nuclear norm of the result.
pub(crate) fn svt<T: Scalar>(w: &DMatrix<T>, tau: f64, slice: usize) -> Result<(DMatrix<T>, f64)>
{
    let svd = thin_svd(w, slice)?;
    let kept: Vec<f64> = svd.sigma.iter().map(|s| (s - tau).max(0.0)).collect();
    let rank = kept.iter().take_while(|&&s| s > 0.0).count();
    let nuclear = kept.iter().sum();
    if rank == 0 {
        return Ok((DMatrix::zeros(w.nrows(), w.ncols()), 0.0));
    }
    Ok((recompose(&svd.u, &kept[..rank], &svd.v), nuclear))
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

pub(crate) fn real_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}
