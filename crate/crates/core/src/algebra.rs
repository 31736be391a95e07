//! The t-product algebra: products, transposes, identities and orthogonality.
//!
//! Everything here accepts order-3 tensors and, where the definition carries
//! over slice by slice in the Fourier domain, higher orders whose trailing
//! extents agree.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{fold_trailing_modes, unfold_trailing_modes, SpectralTensor};
use crate::tensor::DenseTensor;

fn expect_tensor(t: &DenseTensor, what: &str) -> Result<()> {
    if t.order() < 3 {
        return Err(Error::dim(format!("{what} needs order >= 3, got order {}", t.order())));
    }
    Ok(())
}

/// Slice-wise product of two spectra, `C_hat(k) = A_hat(k) * B_hat(k)`.
pub(crate) fn spectral_product(a: &SpectralTensor, b: &SpectralTensor) -> SpectralTensor {
    let (n1, _, slices) = a.dims();
    let (_, n4, _) = b.dims();
    let mut out = SpectralTensor::zeros(n1, n4, a.modes());
    let mut done: Vec<Option<DMatrix<Complex64>>> = vec![None; slices];
    for k in 0..slices {
        let partner = a.conjugate_partner(k);
        let m = match &done[partner] {
            Some(p) if partner < k => p.conjugate(),
            _ => a.slice(k) * b.slice(k),
        };
        out.set_slice(k, &m);
        done[k] = Some(m);
    }
    out
}

/// `C = A * B` with `C(i,j,:) = sum_k A(i,k,:) conv B(k,j,:)`, evaluated in
/// the Fourier domain.
pub fn t_product(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    expect_tensor(a, "t_product")?;
    expect_tensor(b, "t_product")?;
    if a.order() != b.order() || a.dims()[2..] != b.dims()[2..] {
        return Err(Error::dim(format!("tube extents of {:?} and {:?} differ", a.dims(), b.dims())));
    }
    if a.cols() != b.rows() {
        return Err(Error::dim(format!("inner extents of {:?} and {:?} differ", a.dims(), b.dims())));
    }
    let c = spectral_product(&fold_trailing_modes(a)?, &fold_trailing_modes(b)?);
    unfold_trailing_modes(&c)
}

/// Transposes every frontal slice and reverses the order of slices `2..n3`.
/// For higher orders each trailing index is reversed the same way.
pub fn t_transpose(a: &DenseTensor) -> Result<DenseTensor> {
    expect_tensor(a, "t_transpose")?;
    let (n1, n2) = (a.rows(), a.cols());
    let modes = &a.dims()[2..];
    let mut dims = vec![n2, n1];
    dims.extend_from_slice(modes);
    let block = n1 * n2;
    let src = a.data();
    let mut data = vec![0.0; src.len()];
    for k in 0..a.slice_count() {
        let from = crate::fourier::conjugate_partner(modes, k);
        for j in 0..n2 {
            for i in 0..n1 {
                data[k * block + j + n2 * i] = src[from * block + i + n1 * j];
            }
        }
    }
    Ok(DenseTensor::from_parts(dims, data))
}

/// `n1 x n1 x n3` tensor whose first frontal slice is the identity matrix and
/// whose other slices are zero.
pub fn identity_tensor(n1: usize, n3: usize) -> Result<DenseTensor> {
    identity_with_modes(n1, &[n3])
}

pub(crate) fn identity_with_modes(n: usize, modes: &[usize]) -> Result<DenseTensor> {
    let mut dims = vec![n, n];
    dims.extend_from_slice(modes);
    let mut data = DenseTensor::zeros(&dims)?.into_data();
    for i in 0..n {
        data[i + n * i] = 1.0;
    }
    Ok(DenseTensor::from_parts(dims, data))
}

/// True when `Q^T * Q` and `Q * Q^T` are both within `tol` (Frobenius) of the
/// identity tensor.
pub fn is_orthogonal(q: &DenseTensor, tol: f64) -> Result<bool> {
    expect_tensor(q, "is_orthogonal")?;
    if q.rows() != q.cols() {
        return Err(Error::dim(format!("frontal slices of {:?} are not square", q.dims())));
    }
    let eye = identity_with_modes(q.rows(), &q.dims()[2..])?;
    let qt = t_transpose(q)?;
    let left = t_product(&qt, q)?.distance(&eye)?;
    let right = t_product(q, &qt)?.distance(&eye)?;
    Ok(left <= tol && right <= tol)
}
