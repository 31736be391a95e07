//! The t-SVD `M = U * S * V^T`, its truncations, and the rank and norm
//! measures read off the Fourier-domain singular values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{t_product, t_transpose};
use crate::error::{Error, Result};
use crate::fourier::{fold_trailing_modes, unfold_trailing_modes, SpectralTensor};
use crate::linalg::{full_svd, real_part, singular_values, to_complex};
use crate::tensor::DenseTensor;

/// Default numerical-rank threshold, relative to the largest singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Factors of `M = U * S * V^T`: `U` is `n1 x n1 x n3`, `S` is f-diagonal
/// `n1 x n2 x n3` and `V` is `n2 x n2 x n3`. Higher-order inputs keep their
/// trailing extents on all three factors.
#[derive(Clone, Debug)]
pub struct TSvdFactors {
    pub u: DenseTensor,
    pub s: DenseTensor,
    pub v: DenseTensor,
}

impl TSvdFactors {
    /// Number of diagonal tubes, `min(n1, n2)`.
    pub fn tube_count(&self) -> usize {
        self.s.rows().min(self.s.cols())
    }

    /// Fourier-domain diagonal `s_hat(i, i, k)`, indexed `[k][i]`.
    pub fn spectral_diagonal(&self) -> Result<Vec<Vec<f64>>> {
        let sh = fold_trailing_modes(&self.s)?;
        let r = self.tube_count();
        Ok((0..sh.slice_count()).map(|k| (0..r).map(|i| sh.get(i, i, k).re).collect()).collect())
    }

    fn check_shapes(&self) -> Result<()> {
        let (u, s, v) = (self.u.dims(), self.s.dims(), self.v.dims());
        let ok = u.len() >= 3
            && u.len() == s.len()
            && s.len() == v.len()
            && u[2..] == s[2..]
            && s[2..] == v[2..]
            && u[0] == u[1]
            && v[0] == v[1]
            && u[0] == s[0]
            && v[0] == s[1];
        if !ok {
            return Err(Error::dim(format!("inconsistent factor extents U {u:?}, S {s:?}, V {v:?}")));
        }
        Ok(())
    }
}

/// Tensor multi-rank: the numerical rank of each Fourier-domain frontal slice.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiRank {
    pub ranks: Vec<usize>,
    pub tol: f64,
}

impl MultiRank {
    /// The scalar complexity measure `||p||_1`.
    pub fn l1(&self) -> usize {
        self.ranks.iter().sum()
    }
}

/// Computes the t-SVD by a full SVD of every Fourier-domain frontal slice.
///
/// Only one slice of each conjugate pair is decomposed and the partner gets
/// the conjugate factors, which keeps the inverse transforms real. Slices
/// that are their own partner (frequency zero, and the Nyquist frequency for
/// even extents) are real, so a real SVD is used there.
pub fn tsvd(m: &DenseTensor) -> Result<TSvdFactors> {
    let spec = fold_trailing_modes(m)?;
    let (n1, n2, slices) = spec.dims();
    let modes = spec.modes().to_vec();
    let mut uh = SpectralTensor::zeros(n1, n1, &modes);
    let mut sh = SpectralTensor::zeros(n1, n2, &modes);
    let mut vh = SpectralTensor::zeros(n2, n2, &modes);
    for k in 0..slices {
        let partner = spec.conjugate_partner(k);
        if partner < k {
            uh.mirror_slice(partner, k);
            sh.mirror_slice(partner, k);
            vh.mirror_slice(partner, k);
            continue;
        }
        let slice = spec.slice(k);
        let (u, sigma, v) = if partner == k {
            let f = full_svd(&real_part(&slice), k)?;
            (to_complex(&f.u), f.sigma, to_complex(&f.v))
        } else {
            let f = full_svd(&slice, k)?;
            (f.u, f.sigma, f.v)
        };
        let mut diag = DMatrix::<Complex64>::zeros(n1, n2);
        for (i, &s) in sigma.iter().enumerate() {
            diag[(i, i)] = Complex64::new(s, 0.0);
        }
        uh.set_slice(k, &u);
        sh.set_slice(k, &diag);
        vh.set_slice(k, &v);
    }
    Ok(TSvdFactors {
        u: unfold_trailing_modes(&uh)?,
        s: unfold_trailing_modes(&sh)?,
        v: unfold_trailing_modes(&vh)?,
    })
}

/// `U * S * V^T`.
pub fn reconstruct(f: &TSvdFactors) -> Result<DenseTensor> {
    f.check_shapes()?;
    t_product(&t_product(&f.u, &f.s)?, &t_transpose(&f.v)?)
}

/// Keeps the leading `cols` columns (lateral slices) of every frontal slice.
fn leading_block(t: &DenseTensor, rows: usize, cols: usize) -> DenseTensor {
    let (n1, n2) = (t.rows(), t.cols());
    let mut dims = t.dims().to_vec();
    dims[0] = rows;
    dims[1] = cols;
    let mut data = Vec::with_capacity(rows * cols * t.slice_count());
    for k in 0..t.slice_count() {
        for j in 0..cols {
            let start = k * n1 * n2 + j * n1;
            data.extend_from_slice(&t.data()[start..start + rows]);
        }
    }
    DenseTensor::from_parts(dims, data)
}

/// `M_k = sum_{i<k} U(:,i,:) * S(i,i,:) * V(:,i,:)^T`, the best Frobenius
/// approximation among t-products `X * Y` with inner extent `k`.
pub fn truncate_tubal(f: &TSvdFactors, k: usize) -> Result<DenseTensor> {
    f.check_shapes()?;
    let r = f.tube_count();
    if k == 0 || k > r {
        return Err(Error::arg(format!("tubal truncation k = {k} outside 1..={r}")));
    }
    let u = leading_block(&f.u, f.u.rows(), k);
    let s = leading_block(&f.s, k, k);
    let v = leading_block(&f.v, f.v.rows(), k);
    t_product(&t_product(&u, &s)?, &t_transpose(&v)?)
}

/// Singular values of every Fourier-domain frontal slice, indexed `[k][i]`
/// and sorted nonincreasing within each slice.
pub fn spectral_singular_values(a: &DenseTensor) -> Result<Vec<Vec<f64>>> {
    let spec = fold_trailing_modes(a)?;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(spec.slice_count());
    for k in 0..spec.slice_count() {
        let partner = spec.conjugate_partner(k);
        let sv = if partner < k {
            out[partner].clone()
        } else if partner == k {
            singular_values(&real_part(&spec.slice(k)), k)?
        } else {
            singular_values(&spec.slice(k), k)?
        };
        out.push(sv);
    }
    Ok(out)
}

/// Counts, per slice, the singular values above `tol` times the largest
/// singular value over all slices.
pub fn multi_rank(a: &DenseTensor, tol: f64) -> Result<MultiRank> {
    if !(tol > 0.0) {
        return Err(Error::arg(format!("rank tolerance must be positive, got {tol}")));
    }
    let sv = spectral_singular_values(a)?;
    let top = sv.iter().flatten().fold(0.0_f64, |m, &s| m.max(s));
    let ranks = sv.iter().map(|s| s.iter().filter(|&&x| x > tol * top).count()).collect();
    Ok(MultiRank { ranks, tol })
}

/// Number of diagonal tubes `S(i,i,:)` with norm above `tol * ||S||_F`.
pub fn tubal_rank(a: &DenseTensor, tol: f64) -> Result<usize> {
    let sv = spectral_singular_values(a)?;
    let r = sv.first().map_or(0, Vec::len);
    // Parseval: ||S(i,i,:)||^2 = (1/rho) sum_k s_hat(i,i,k)^2; the 1/rho cancels.
    let tube_sq: Vec<f64> = (0..r).map(|i| sv.iter().map(|s| s[i] * s[i]).sum()).collect();
    let total = tube_sq.iter().sum::<f64>().sqrt();
    Ok(tube_sq.iter().filter(|&&t| t.sqrt() > tol * total).count())
}

/// Tensor nuclear norm: the sum of the singular values of all Fourier-domain
/// frontal slices (unnormalized DFT scale).
pub fn tnn(a: &DenseTensor) -> Result<f64> {
    Ok(spectral_singular_values(a)?.iter().flatten().sum())
}

/// Block-diagonal matrix of the frontal slices, in slice order.
pub fn blkdiag(s: &SpectralTensor) -> DMatrix<Complex64> {
    let (n1, n2, slices) = s.dims();
    let mut out = DMatrix::<Complex64>::zeros(n1 * slices, n2 * slices);
    for k in 0..slices {
        out.view_mut((k * n1, k * n2), (n1, n2)).copy_from(&s.slice(k));
    }
    out
}

/// Frames of a circularly panning scene: `A(i, j, k) = X((i - k) mod n, j)`
/// for a Gaussian `n x width` image `X`. With `frames == n` every Fourier
/// slice is rank one and the tubal rank is one.
pub fn shifted_frames(n: usize, width: usize, frames: usize, seed: u64) -> Result<DenseTensor> {
    if n == 0 || width == 0 || frames == 0 {
        return Err(Error::arg("shifted frames need positive extents"));
    }
    let mut rng = crate::seeded_rng(seed);
    let image: Vec<f64> = (0..n * width).map(|_| StandardNormal.sample(&mut rng)).collect();
    DenseTensor::from_fn(&[n, width, frames], |ix| image[(ix[0] + n - ix[2] % n) % n + n * ix[1]])
}
