//! Transforms along the tube direction.
//!
//! The forward DFT is unnormalized and the inverse carries the `1/n` factor,
//! so a tensor and its spectrum obey `||X_hat||_F^2 = rho * ||X||_F^2` where
//! `rho` is the number of frontal slices. Every Fourier-domain singular value
//! (and therefore the tensor nuclear norm) is on this scale.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Relative bound on the imaginary part accepted by the inverse transforms.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-9;

/// A complex `n1 x n2 x rho` array: the image of a real tensor under the DFT
/// along every mode past the second. `modes` records the original trailing
/// extents so the transform can be inverted; for order-3 input it is `[n3]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTensor {
    rows: usize,
    cols: usize,
    modes: Vec<usize>,
    data: Vec<Complex64>,
}

impl SpectralTensor {
    pub fn new(rows: usize, cols: usize, modes: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let mut dims = vec![rows, cols];
        dims.extend_from_slice(&modes);
        let len = crate::tensor::check_dims(&dims)?;
        if modes.is_empty() {
            return Err(Error::dim("spectral tensor needs at least one trailing mode"));
        }
        if data.len() != len {
            return Err(Error::dim(format!("data length {} does not match extents {dims:?}", data.len())));
        }
        Ok(Self { rows, cols, modes, data })
    }

    pub(crate) fn zeros(rows: usize, cols: usize, modes: &[usize]) -> Self {
        let slices: usize = modes.iter().product();
        Self { rows, cols, modes: modes.to_vec(), data: vec![Complex64::new(0.0, 0.0); rows * cols * slices] }
    }

    /// `(n1, n2, rho)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.slice_count())
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn slice_count(&self) -> usize {
        self.modes.iter().product()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.data[i + self.rows * (j + self.cols * k)]
    }

    pub fn slice(&self, k: usize) -> DMatrix<Complex64> {
        let block = self.rows * self.cols;
        DMatrix::from_column_slice(self.rows, self.cols, &self.data[k * block..(k + 1) * block])
    }

    pub fn set_slice(&mut self, k: usize, m: &DMatrix<Complex64>) {
        assert_eq!(m.shape(), (self.rows, self.cols), "slice shape mismatch");
        let block = self.rows * self.cols;
        self.data[k * block..(k + 1) * block].copy_from_slice(m.as_slice());
    }

    /// Overwrites slice `to` with the conjugate of slice `from`.
    pub(crate) fn mirror_slice(&mut self, from: usize, to: usize) {
        let block = self.rows * self.cols;
        for t in 0..block {
            self.data[to * block + t] = self.data[from * block + t].conj();
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Index of the slice holding the complex conjugate of slice `k` when the
    /// spectrum comes from a real tensor: every trailing frequency negated.
    pub fn conjugate_partner(&self, k: usize) -> usize {
        conjugate_partner(&self.modes, k)
    }
}

pub(crate) fn conjugate_partner(modes: &[usize], k: usize) -> usize {
    let mut rem = k;
    let mut out = 0;
    let mut stride = 1;
    for &n in modes {
        let digit = rem % n;
        rem /= n;
        out += ((n - digit) % n) * stride;
        stride *= n;
    }
    out
}

/// Runs the 1-D transform along every trailing mode of a mode-1-fastest buffer.
fn transform_trailing(data: &mut [Complex64], block: usize, modes: &[usize], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = block;
    let mut lanes = Vec::new();
    for &n in modes {
        if n > 1 {
            let fft = planner.plan_fft(n, direction);
            let span = stride * n;
            lanes.clear();
            lanes.reserve(data.len());
            for base in (0..data.len()).step_by(span) {
                for off in 0..stride {
                    lanes.extend((0..n).map(|t| data[base + off + t * stride]));
                }
            }
            fft.process(&mut lanes);
            let scale = if direction == FftDirection::Inverse { 1.0 / n as f64 } else { 1.0 };
            let mut it = lanes.iter();
            for base in (0..data.len()).step_by(span) {
                for off in 0..stride {
                    for t in 0..n {
                        data[base + off + t * stride] = *it.next().unwrap() * scale;
                    }
                }
            }
        }
        stride *= n;
    }
}

/// DFT along modes 3..N followed by flattening the trailing modes into one
/// mode of extent `rho = n3 * n4 * ... * nN`.
pub fn fold_trailing_modes(t: &DenseTensor) -> Result<SpectralTensor> {
    if t.order() < 3 {
        return Err(Error::dim(format!("need order >= 3, got order {}", t.order())));
    }
    let dims = t.dims();
    let mut data: Vec<Complex64> = t.data().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform_trailing(&mut data, dims[0] * dims[1], &dims[2..], FftDirection::Forward);
    Ok(SpectralTensor { rows: dims[0], cols: dims[1], modes: dims[2..].to_vec(), data })
}

/// Inverse of [`fold_trailing_modes`]: restores the original shape and
/// returns the real part, failing if the imaginary residue is too large.
pub fn unfold_trailing_modes(s: &SpectralTensor) -> Result<DenseTensor> {
    let (dims, data) = inverse_complex(s);
    let residue = data.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    let bound = IMAGINARY_RESIDUE_TOL * s.frobenius_norm();
    if residue > bound {
        return Err(Error::SymmetryViolation { residue, bound });
    }
    Ok(DenseTensor::from_parts(dims, data.into_iter().map(|z| z.re).collect()))
}

/// Inverse transform keeping only the real part, with no residue check. This
/// is the orthogonal projection of the complex inverse onto real tensors.
pub(crate) fn unfold_real_part(s: &SpectralTensor) -> DenseTensor {
    let (dims, data) = inverse_complex(s);
    DenseTensor::from_parts(dims, data.into_iter().map(|z| z.re).collect())
}

fn inverse_complex(s: &SpectralTensor) -> (Vec<usize>, Vec<Complex64>) {
    let mut data = s.data.clone();
    transform_trailing(&mut data, s.rows * s.cols, &s.modes, FftDirection::Inverse);
    let mut dims = vec![s.rows, s.cols];
    dims.extend_from_slice(&s.modes);
    (dims, data)
}

pub fn dft_mode3(t: &DenseTensor) -> Result<SpectralTensor> {
    t.expect_order3("dft_mode3")?;
    fold_trailing_modes(t)
}

pub fn idft_mode3(s: &SpectralTensor) -> Result<DenseTensor> {
    if s.modes.len() != 1 {
        return Err(Error::dim(format!(
            "idft_mode3 needs an order-3 spectrum, got {} trailing modes",
            s.modes.len()
        )));
    }
    unfold_trailing_modes(s)
}

/// Applies `f` to every frontal slice of a conjugate-symmetric spectrum,
/// evaluating it only once per conjugate pair and mirroring the conjugate
/// result onto the partner slice. `f` receives the slice index and whether
/// the slice is its own partner (and hence real up to roundoff).
pub(crate) fn map_conjugate_pairs<F>(
    s: &SpectralTensor,
    out_rows: usize,
    out_cols: usize,
    mut f: F,
) -> Result<SpectralTensor>
where
    F: FnMut(usize, &DMatrix<Complex64>, bool) -> Result<DMatrix<Complex64>>,
{
    let mut out = SpectralTensor::zeros(out_rows, out_cols, &s.modes);
    for k in 0..s.slice_count() {
        let partner = s.conjugate_partner(k);
        if partner < k {
            out.mirror_slice(partner, k);
        } else {
            let m = f(k, &s.slice(k), partner == k)?;
            out.set_slice(k, &m);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tube_tensor(v: &[f64]) -> DenseTensor {
        DenseTensor::new(vec![1, 1, v.len()], v.to_vec()).unwrap()
    }

    #[test]
    fn delta_and_constant_tubes() {
        let s = dft_mode3(&tube_tensor(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(s.data().iter().all(|z| (*z - c(1.0, 0.0)).norm() < 1e-15));
        let s = dft_mode3(&tube_tensor(&[1.0, 1.0, 1.0, 1.0])).unwrap();
        let expect = [4.0, 0.0, 0.0, 0.0];
        for (z, e) in s.data().iter().zip(expect) {
            assert!((*z - c(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn inverse_of_scaled_delta() {
        let s = SpectralTensor::new(1, 1, vec![4], vec![c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let t = idft_mode3(&s).unwrap();
        assert_eq!(t.dims(), &[1, 1, 4]);
        assert!(t.data().iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn broken_symmetry_is_reported() {
        let mut s = dft_mode3(&tube_tensor(&[1.0, 1.0, 1.0, 1.0])).unwrap();
        s.data_mut()[1] += c(0.0, 1.0);
        assert!(matches!(idft_mode3(&s), Err(Error::SymmetryViolation { .. })));
    }

    #[test]
    fn order_checks() {
        let m = DenseTensor::zeros(&[2, 2]).unwrap();
        assert!(matches!(dft_mode3(&m), Err(Error::Dimension(_))));
        assert!(matches!(fold_trailing_modes(&m), Err(Error::Dimension(_))));
        let t4 = DenseTensor::zeros(&[2, 2, 2, 2]).unwrap();
        assert!(matches!(dft_mode3(&t4), Err(Error::Dimension(_))));
        let s4 = fold_trailing_modes(&t4).unwrap();
        assert!(matches!(idft_mode3(&s4), Err(Error::Dimension(_))));
    }

    #[test]
    fn fold_shape_arithmetic() {
        let t = DenseTensor::from_fn(&[3, 4, 3, 2], |ix| (ix[0] * 7 + ix[1] * 3 + ix[2] + ix[3] * 5) as f64 * 0.1).unwrap();
        let s = fold_trailing_modes(&t).unwrap();
        assert_eq!(s.dims(), (3, 4, 6));
        assert_eq!(s.modes(), &[3, 2]);
        let back = unfold_trailing_modes(&s).unwrap();
        assert_eq!(back.dims(), t.dims());
        assert!(back.distance(&t).unwrap() < 1e-12);
    }

    #[test]
    fn partner_indices() {
        assert_eq!(conjugate_partner(&[5], 0), 0);
        assert_eq!(conjugate_partner(&[5], 1), 4);
        assert_eq!(conjugate_partner(&[4], 2), 2);
        // (k3, k4) = (1, 1) in a 3 x 2 grid pairs with (2, 1).
        assert_eq!(conjugate_partner(&[3, 2], 1 + 3), 2 + 3);
        assert_eq!(conjugate_partner(&[3, 2], 3), 3);
    }
}
