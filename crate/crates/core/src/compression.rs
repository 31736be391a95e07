//! Truncation-based compression: rank-`k1` SVD of the frame matrix, global
//! selection of the `k2` largest Fourier-domain singular values, and the
//! first `k3` singular tubes of the t-SVD.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::fourier::{fold_trailing_modes, unfold_real_part, unfold_trailing_modes, SpectralTensor};
use crate::linalg::{real_part, recompose, thin_svd, to_complex, ThinSvd};
use crate::tensor::DenseTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CompressionMethod {
    /// Rank-`k1` SVD of the `n1*n2 x n3` matrix of vectorized frames.
    Svd,
    /// Keep the `k2` largest Fourier-domain singular values over all slices.
    Tsvd,
    /// Keep the first `k3` singular tubes.
    TsvdTubal,
}

impl CompressionMethod {
    pub fn label(self) -> &'static str {
        match self {
            CompressionMethod::Svd => "svd",
            CompressionMethod::Tsvd => "tsvd",
            CompressionMethod::TsvdTubal => "tsvd_tubal",
        }
    }

    /// Largest legal truncation parameter for an `n1 x n2 x n3` tensor.
    pub fn max_k(self, (n1, n2, n3): (usize, usize, usize)) -> usize {
        match self {
            CompressionMethod::Svd => (n1 * n2).min(n3),
            CompressionMethod::Tsvd => n1.min(n2) * n3,
            CompressionMethod::TsvdTubal => n1.min(n2),
        }
    }

    /// Entries of the tensor over entries of the retained factors.
    pub fn ratio(self, dims: (usize, usize, usize), k: usize) -> Result<Ratio<u128>> {
        self.check_k(dims, k)?;
        let (n1, n2, n3) = (dims.0 as u128, dims.1 as u128, dims.2 as u128);
        let k = k as u128;
        Ok(match self {
            CompressionMethod::Svd => Ratio::new(n1 * n2 * n3, k * (n1 * n2 + n3 + 1)),
            CompressionMethod::Tsvd => Ratio::new(n1 * n2 * n3, k * (n1 + n2 + 1)),
            CompressionMethod::TsvdTubal => Ratio::new(n1 * n2, k * (n1 + n2 + 1)),
        })
    }

    fn check_k(self, dims: (usize, usize, usize), k: usize) -> Result<()> {
        let max = self.max_k(dims);
        if k == 0 || k > max {
            return Err(Error::arg(format!("{} truncation k = {k} outside 1..={max}", self.label())));
        }
        Ok(())
    }
}

impl fmt::Display for CompressionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CompressionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(CompressionMethod::Svd),
            "tsvd" => Ok(CompressionMethod::Tsvd),
            "tubal" | "tsvd_tubal" => Ok(CompressionMethod::TsvdTubal),
            other => Err(Error::arg(format!("unknown compression method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionReport {
    pub method: CompressionMethod,
    pub k: usize,
    pub ratio: Ratio<u128>,
    pub rse_db: f64,
}

impl CompressionReport {
    pub fn ratio_f64(&self) -> f64 {
        *self.ratio.numer() as f64 / *self.ratio.denom() as f64
    }
}

/// `20 log10(||rec - ref|| / ||ref||)`; an exact match gives `-inf`.
pub fn rse_db(rec: &DenseTensor, reference: &DenseTensor) -> Result<f64> {
    let err = rec.distance(reference)?;
    let norm = reference.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::arg("RSE reference tensor is zero"));
    }
    if err == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(20.0 * (err / norm).log10())
}

enum Factorization {
    Frames(ThinSvd<f64>),
    Spectral { slices: Vec<ThinSvd<Complex64>>, modes: Vec<usize> },
}

/// A decomposition computed once and truncated at any legal `k`.
pub struct Compressor {
    method: CompressionMethod,
    source: DenseTensor,
    dims: (usize, usize, usize),
    factors: Factorization,
}

impl Compressor {
    pub fn new(m: &DenseTensor, method: CompressionMethod) -> Result<Self> {
        let dims = m.expect_order3("compression")?;
        let factors = match method {
            CompressionMethod::Svd => Factorization::Frames(thin_svd(&m.matricize_frames(), 0)?),
            CompressionMethod::Tsvd | CompressionMethod::TsvdTubal => {
                let spec = fold_trailing_modes(m)?;
                let mut slices: Vec<ThinSvd<Complex64>> = Vec::with_capacity(spec.slice_count());
                for k in 0..spec.slice_count() {
                    let partner = spec.conjugate_partner(k);
                    let svd = if partner < k {
                        let p = &slices[partner];
                        ThinSvd { u: p.u.conjugate(), sigma: p.sigma.clone(), v: p.v.conjugate() }
                    } else if partner == k {
                        let r = thin_svd(&real_part(&spec.slice(k)), k)?;
                        ThinSvd { u: to_complex(&r.u), sigma: r.sigma, v: to_complex(&r.v) }
                    } else {
                        thin_svd(&spec.slice(k), k)?
                    };
                    slices.push(svd);
                }
                Factorization::Spectral { slices, modes: spec.modes().to_vec() }
            }
        };
        Ok(Self { method, source: m.clone(), dims, factors })
    }

    pub fn method(&self) -> CompressionMethod {
        self.method
    }

    pub fn approximate(&self, k: usize) -> Result<DenseTensor> {
        self.method.check_k(self.dims, k)?;
        let (n1, n2, n3) = self.dims;
        match &self.factors {
            Factorization::Frames(svd) => {
                if k == self.method.max_k(self.dims) {
                    return Ok(self.source.clone());
                }
                let m = recompose(&svd.u, &svd.sigma[..k], &svd.v);
                Ok(DenseTensor::from_parts(vec![n1, n2, n3], m.as_slice().to_vec()))
            }
            Factorization::Spectral { slices, modes } => {
                let kept = match self.method {
                    CompressionMethod::Tsvd => global_selection(slices, k),
                    _ => slices.iter().map(|s| (0..k.min(s.sigma.len())).collect()).collect(),
                };
                let mut spec = SpectralTensor::zeros(n1, n2, modes);
                for (slice, (svd, keep)) in slices.iter().zip(&kept).enumerate() {
                    spec.set_slice(slice, &truncated_slice(svd, keep, n1, n2));
                }
                match self.method {
                    // A conjugate pair may be split by the global cut, so the
                    // spectrum is projected back onto real tensors.
                    CompressionMethod::Tsvd => Ok(unfold_real_part(&spec)),
                    _ => unfold_trailing_modes(&spec),
                }
            }
        }
    }

    pub fn report(&self, k: usize, reference: &DenseTensor) -> Result<(DenseTensor, CompressionReport)> {
        let rec = self.approximate(k)?;
        let report = CompressionReport {
            method: self.method,
            k,
            ratio: self.method.ratio(self.dims, k)?,
            rse_db: rse_db(&rec, reference)?,
        };
        Ok((rec, report))
    }
}

/// Indices to keep per slice: the `k` largest values over all slices, ties
/// going to the smaller `(slice, diagonal index)`.
fn global_selection(slices: &[ThinSvd<Complex64>], k: usize) -> Vec<Vec<usize>> {
    let mut entries: Vec<(f64, usize, usize)> = slices
        .iter()
        .enumerate()
        .flat_map(|(j, s)| s.sigma.iter().enumerate().map(move |(i, &v)| (v, j, i)))
        .collect();
    entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut kept = vec![Vec::new(); slices.len()];
    for &(_, j, i) in entries.iter().take(k) {
        kept[j].push(i);
    }
    kept
}

fn truncated_slice(svd: &ThinSvd<Complex64>, keep: &[usize], n1: usize, n2: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::<Complex64>::zeros(n1, n2);
    for &i in keep {
        let s = Complex64::new(svd.sigma[i], 0.0);
        out += (svd.u.column(i) * s) * svd.v.column(i).adjoint();
    }
    out
}

fn compress(m: &DenseTensor, method: CompressionMethod, k: usize) -> Result<(DenseTensor, CompressionReport)> {
    method.check_k(m.expect_order3("compression")?, k)?;
    Compressor::new(m, method)?.report(k, m)
}

pub fn compress_matrix_svd(m: &DenseTensor, k1: usize) -> Result<(DenseTensor, CompressionReport)> {
    compress(m, CompressionMethod::Svd, k1)
}

pub fn compress_tsvd(m: &DenseTensor, k2: usize) -> Result<(DenseTensor, CompressionReport)> {
    compress(m, CompressionMethod::Tsvd, k2)
}

pub fn compress_tsvd_tubal(m: &DenseTensor, k3: usize) -> Result<(DenseTensor, CompressionReport)> {
    compress(m, CompressionMethod::TsvdTubal, k3)
}

/// One report per `k`, ordered by increasing compression ratio. RSE is
/// measured against `m` itself.
pub fn sweep(m: &DenseTensor, method: CompressionMethod, ks: &[usize]) -> Result<Vec<CompressionReport>> {
    sweep_against(m, m, method, ks)
}

/// Like [`sweep`] but measures RSE against a separate reference tensor.
pub fn sweep_against(
    m: &DenseTensor,
    reference: &DenseTensor,
    method: CompressionMethod,
    ks: &[usize],
) -> Result<Vec<CompressionReport>> {
    let dims = m.expect_order3("compression")?;
    m.expect_same_dims(reference)?;
    for &k in ks {
        method.check_k(dims, k)?;
    }
    let c = Compressor::new(m, method)?;
    let mut reports = ks.iter().map(|&k| c.report(k, reference).map(|(_, r)| r)).collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.ratio.cmp(&b.ratio));
    Ok(reports)
}
