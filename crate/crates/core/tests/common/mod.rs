//! Reference computations written directly from the definitions, without
//! going through the library's FFT or SVD paths.

#![allow(dead_code)]

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tubal::DenseTensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(dims: &[usize], rng: &mut ChaCha8Rng) -> DenseTensor {
    DenseTensor::from_fn(dims, |_| rng.sample(StandardNormal)).unwrap()
}

pub fn complex_gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn relative(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.distance(b).unwrap() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// `C(i,j,:) = sum_l A(i,l,:) (*) B(l,j,:)` with the circular convolution
/// written out index by index.
pub fn direct_t_product(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let (n1, n2, n3) = (a.dims()[0], a.dims()[1], a.dims()[2]);
    let n4 = b.dims()[1];
    DenseTensor::from_fn(&[n1, n4, n3], |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let mut acc = 0.0;
        for l in 0..n2 {
            for t in 0..n3 {
                acc += a.get(&[i, l, t]) * b.get(&[l, j, (k + n3 - t) % n3]);
            }
        }
        acc
    })
    .unwrap()
}

/// Frontal slices of the DFT along mode 3, by the O(n3^2) sum.
pub fn naive_spectrum(a: &DenseTensor) -> Vec<DMatrix<Complex64>> {
    let (n1, n2, n3) = (a.dims()[0], a.dims()[1], a.dims()[2]);
    (0..n3)
        .map(|f| {
            DMatrix::from_fn(n1, n2, |i, j| {
                (0..n3)
                    .map(|t| Complex64::from_polar(a.get(&[i, j, t]), -TAU * (f * t) as f64 / n3 as f64))
                    .sum()
            })
        })
        .collect()
}

pub fn block_diagonal(slices: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let (r, c) = slices[0].shape();
    let mut out = DMatrix::zeros(r * slices.len(), c * slices.len());
    for (k, s) in slices.iter().enumerate() {
        out.view_mut((k * r, k * c), (r, c)).copy_from(s);
    }
    out
}

pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn nuclear_norm(m: &DMatrix<Complex64>) -> f64 {
    singular_values(m).iter().sum()
}

/// `threshold * sum_ij ||x(i,j,:)|| + 0.5 ||x - d||^2`.
pub fn tube_objective(x: &DenseTensor, d: &DenseTensor, threshold: f64) -> f64 {
    let (n1, n2, n3) = (x.dims()[0], x.dims()[1], x.dims()[2]);
    let mut tubes = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            tubes += (0..n3).map(|k| x.get(&[i, j, k]).powi(2)).sum::<f64>().sqrt();
        }
    }
    let gap = x.distance(d).unwrap();
    threshold * tubes + 0.5 * gap * gap
}

/// Random tensor of Frobenius norm `size`.
pub fn perturbation(dims: &[usize], size: f64, rng: &mut ChaCha8Rng) -> DenseTensor {
    let e = gaussian(dims, rng);
    let n = e.frobenius_norm();
    e.scale(size / n)
}
