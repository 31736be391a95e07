//! Tensor robust PCA `min ||L||_TNN + lambda ||S||_{1,1,2}  s.t.  M = L + S`
//! and the matrix baselines that work on the `n1*n2 x n3` frame matrix.
//!
//! Both RPCA variants share one scaled-dual ADMM loop:
//!
//! ```text
//! L <- prox_low_rank(M - S - W, 1/penalty)
//! S <- prox_sparse(M - L - W, lambda/penalty)
//! W <- W + L + S - M
//! ```

use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use crate::completion::{admm_complete, shrink_with_norm, SamplingMask, SolveTrace, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::svt;
use crate::tensor::{check_dims, DenseTensor};

/// `1/sqrt(max(n1, n2))`.
pub fn default_lambda_tensor(n1: usize, n2: usize) -> f64 {
    1.0 / (n1.max(n2) as f64).sqrt()
}

/// `1/sqrt(max(n1*n2, n3))`, the usual choice for the frame matrix.
pub fn default_lambda_matrix(n1: usize, n2: usize, n3: usize) -> f64 {
    1.0 / ((n1 * n2).max(n3) as f64).sqrt()
}

fn tube_norms(s: &DenseTensor) -> Vec<f64> {
    let block = s.rows() * s.cols();
    let mut sq = vec![0.0; block];
    for (l, x) in s.data().iter().enumerate() {
        sq[l % block] += x * x;
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Sum over `(i, j)` of the tube norms `||S(i,j,:)||_F`.
pub fn l112_norm(s: &DenseTensor) -> f64 {
    tube_norms(s).iter().sum()
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(Error::arg(format!("threshold must be nonnegative and finite, got {threshold}")));
    }
    Ok(())
}

/// Scales every tube by `(1 - threshold / ||d(i,j,:)||)_+`: the proximal map
/// of `threshold * ||.||_{1,1,2}`.
pub fn tube_shrink_l112(d: &DenseTensor, threshold: f64) -> Result<DenseTensor> {
    check_threshold(threshold)?;
    let block = d.rows() * d.cols();
    let factors: Vec<f64> = tube_norms(d)
        .into_iter()
        .map(|n| if n > threshold { 1.0 - threshold / n } else { 0.0 })
        .collect();
    Ok(DenseTensor::from_parts(
        d.dims().to_vec(),
        d.data().iter().enumerate().map(|(l, &x)| x * factors[l % block]).collect(),
    ))
}

/// Entrywise soft thresholding, the proximal map of `threshold * ||.||_1`.
pub fn soft_threshold(d: &DenseTensor, threshold: f64) -> Result<DenseTensor> {
    check_threshold(threshold)?;
    Ok(d.map(|x| x.signum() * (x.abs() - threshold).max(0.0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RpcaRecord {
    pub iter: usize,
    /// `||L + S - M||_F / ||M||_F`.
    pub feasibility: f64,
    /// TNN of `L` (nuclear norm of the frame matrix for the matrix baseline).
    pub low_rank_norm: f64,
    /// `||S||_{1,1,2}` (entrywise l1 norm for the matrix baseline).
    pub sparse_norm: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RpcaTrace {
    pub records: Vec<RpcaRecord>,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct RpcaResult {
    pub low_rank: DenseTensor,
    pub sparse: DenseTensor,
    pub trace: RpcaTrace,
}

fn admm_rpca<P, Q, N>(
    m: &DenseTensor,
    lambda: f64,
    cfg: &SolverConfig,
    mut low_rank_prox: P,
    mut sparse_prox: Q,
    sparse_norm: N,
) -> Result<RpcaResult>
where
    P: FnMut(&DenseTensor, f64) -> Result<(DenseTensor, f64)>,
    Q: FnMut(&DenseTensor, f64) -> Result<DenseTensor>,
    N: Fn(&DenseTensor) -> f64,
{
    cfg.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::arg(format!("lambda must be positive and finite, got {lambda}")));
    }
    let zeros = DenseTensor::zeros(m.dims())?;
    let norm = m.frobenius_norm();
    if norm == 0.0 {
        let trace = RpcaTrace { records: Vec::new(), converged: true };
        return Ok(RpcaResult { low_rank: zeros.clone(), sparse: zeros, trace });
    }
    let start = Instant::now();
    let tau = 1.0 / cfg.penalty;
    let sparse_tau = lambda / cfg.penalty;

    let mut low = m.clone();
    let mut sparse = zeros.clone();
    let mut dual = zeros;
    let mut trace = RpcaTrace::default();

    for iter in 1..=cfg.max_iters {
        let (low_next, low_rank_norm) = low_rank_prox(&m.sub(&sparse)?.sub(&dual)?, tau)?;
        let sparse_next = sparse_prox(&m.sub(&low_next)?.sub(&dual)?, sparse_tau)?;
        let gap = low_next.add(&sparse_next)?.sub(m)?;
        dual = dual.add(&gap)?;

        let dl = low_next.distance(&low)?;
        let ds = sparse_next.distance(&sparse)?;
        let change = (dl * dl + ds * ds).sqrt() / norm;
        let feasibility = gap.frobenius_norm() / norm;
        low = low_next;
        sparse = sparse_next;
        trace.records.push(RpcaRecord {
            iter,
            feasibility,
            low_rank_norm,
            sparse_norm: sparse_norm(&sparse),
            seconds: start.elapsed().as_secs_f64(),
        });
        if feasibility < cfg.tol && change < cfg.tol {
            trace.converged = true;
            break;
        }
    }
    Ok(RpcaResult { low_rank: low, sparse, trace })
}

/// Separates `m` into a low-TNN part and a tube-sparse part.
pub fn rpca_tensor(m: &DenseTensor, lambda: f64, cfg: &SolverConfig) -> Result<RpcaResult> {
    if m.order() < 3 {
        return Err(Error::dim(format!("rpca_tensor needs order >= 3, got order {}", m.order())));
    }
    admm_rpca(m, lambda, cfg, shrink_with_norm, tube_shrink_l112, l112_norm)
}

/// SVT of an order-2 tensor viewed as a matrix.
fn matrix_svt(t: &DenseTensor, tau: f64) -> Result<(DenseTensor, f64)> {
    let (rows, cols) = (t.rows(), t.cols());
    let (m, nuclear) = svt(&DMatrix::from_column_slice(rows, cols, t.data()), tau, 0)?;
    Ok((DenseTensor::from_parts(vec![rows, cols], m.as_slice().to_vec()), nuclear))
}

fn frame_matrix_dims(m: &DenseTensor, what: &str) -> Result<Vec<usize>> {
    if m.order() < 3 {
        return Err(Error::dim(format!("{what} needs order >= 3, got order {}", m.order())));
    }
    Ok(vec![m.rows() * m.cols(), m.slice_count()])
}

/// Matrix RPCA on the frame matrix (each frame vectorized into a column)
/// with entrywise-sparse corruption. `lambda` defaults to
/// [`default_lambda_matrix`].
pub fn rpca_matrix_baseline(m: &DenseTensor, lambda: Option<f64>, cfg: &SolverConfig) -> Result<RpcaResult> {
    let mdims = frame_matrix_dims(m, "rpca_matrix_baseline")?;
    let lambda = lambda.unwrap_or_else(|| default_lambda_matrix(m.rows(), m.cols(), m.slice_count()));
    let flat = m.reshape(&mdims)?;
    let l1 = |s: &DenseTensor| s.data().iter().map(|x| x.abs()).sum::<f64>();
    let res = admm_rpca(&flat, lambda, cfg, matrix_svt, soft_threshold, l1)?;
    Ok(RpcaResult {
        low_rank: res.low_rank.reshape(m.dims())?,
        sparse: res.sparse.reshape(m.dims())?,
        trace: res.trace,
    })
}

/// Nuclear-norm completion of the frame matrix with the same ADMM skeleton
/// as [`crate::completion::complete_tnn`].
pub fn complete_matrix_baseline(
    observed: &DenseTensor,
    mask: &SamplingMask,
    cfg: &SolverConfig,
) -> Result<(DenseTensor, SolveTrace)> {
    let mdims = frame_matrix_dims(observed, "complete_matrix_baseline")?;
    mask.expect_dims(observed)?;
    let flat_mask = SamplingMask::new(mdims.clone(), mask.observed().to_vec())?;
    let (z, trace) = admm_complete(&observed.reshape(&mdims)?, &flat_mask, cfg, matrix_svt)?;
    Ok((z.reshape(observed.dims())?, trace))
}

/// Gaussian tube-sparse noise. Mode 3 is cut into blocks of `block_len`
/// frames (the last may be shorter); in every block `floor(fraction*n1*n2)`
/// pixel positions are drawn without replacement and their tube segments
/// within the block are filled with `N(0, sigma^2)` samples.
pub fn synth_tube_sparse(
    dims: &[usize],
    fraction: f64,
    sigma: f64,
    block_len: usize,
    seed: u64,
) -> Result<DenseTensor> {
    check_dims(dims)?;
    if dims.len() != 3 {
        return Err(Error::dim(format!("tube noise needs an order-3 shape, got {dims:?}")));
    }
    let (n1, n2, n3) = (dims[0], dims[1], dims[2]);
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::arg(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::arg(format!("sigma must be nonnegative and finite, got {sigma}")));
    }
    if block_len == 0 || block_len > n3 {
        return Err(Error::arg(format!("block length {block_len} outside 1..={n3}")));
    }
    let pixels = n1 * n2;
    let per_block = (fraction * pixels as f64).floor() as usize;
    let mut rng = crate::seeded_rng(seed);
    let mut data = vec![0.0; pixels * n3];
    for start in (0..n3).step_by(block_len) {
        let end = (start + block_len).min(n3);
        let mut chosen = index::sample(&mut rng, pixels, per_block).into_vec();
        chosen.sort_unstable();
        for p in chosen {
            for k in start..end {
                let z: f64 = StandardNormal.sample(&mut rng);
                data[p + pixels * k] = sigma * z;
            }
        }
    }
    DenseTensor::new(dims.to_vec(), data)
}

/// Pixel positions `(i, j)` whose tube norm exceeds `tol`.
pub fn tube_support(s: &DenseTensor, tol: f64) -> Vec<(usize, usize)> {
    let n1 = s.rows();
    tube_norms(s)
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > tol)
        .map(|(p, _)| (p % n1, p / n1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::{sample_mask, synth_low_tubal_rank};
    use crate::compression::rse_db;

    #[test]
    fn lambda_defaults() {
        assert!((default_lambda_tensor(72, 128) - 0.088_388_347_648_318_44).abs() < 1e-15);
        assert_eq!(default_lambda_tensor(1, 1), 1.0);
        assert_eq!(default_lambda_tensor(9, 4), default_lambda_tensor(4, 9));
        assert!((default_lambda_matrix(72, 128, 80) - 1.0 / 96.0).abs() < 1e-16);
    }

    #[test]
    fn l112_cases() {
        let zero = DenseTensor::zeros(&[3, 2, 4]).unwrap();
        assert_eq!(l112_norm(&zero), 0.0);
        let mut t = zero.clone();
        t.set(&[1, 1, 0], 3.0);
        t.set(&[1, 1, 2], 4.0);
        assert_eq!(l112_norm(&t), 5.0);
        let flat = DenseTensor::new(vec![2, 2, 1], vec![1.0, -2.0, 0.5, -0.25]).unwrap();
        assert_eq!(l112_norm(&flat), 3.75);
    }

    #[test]
    fn tube_shrink_cases() {
        let d = DenseTensor::new(vec![1, 2, 2], vec![0.0, 0.3, 2.0, 0.4]).unwrap();
        // tube (0,0) = [0, 2] has norm 2; tube (0,1) = [0.3, 0.4] has norm 0.5
        let s = tube_shrink_l112(&d, 1.0).unwrap();
        assert_eq!(s.data(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(tube_shrink_l112(&d, 0.0).unwrap(), d);
        assert!(tube_shrink_l112(&d, -1.0).is_err());
    }

    #[test]
    fn single_frame_tube_shrink_is_soft_threshold() {
        let d = DenseTensor::new(vec![3, 2, 1], vec![1.5, -0.2, -3.0, 0.7, 0.0, 2.2]).unwrap();
        let a = tube_shrink_l112(&d, 0.5).unwrap();
        let b = soft_threshold(&d, 0.5).unwrap();
        assert!(a.distance(&b).unwrap() < 1e-15);
    }

    #[test]
    fn zero_input_gives_zero_parts() {
        let m = DenseTensor::zeros(&[4, 4, 3]).unwrap();
        let r = rpca_tensor(&m, 0.5, &SolverConfig::default()).unwrap();
        assert_eq!(r.low_rank.frobenius_norm() + r.sparse.frobenius_norm(), 0.0);
        let r = rpca_matrix_baseline(&m, None, &SolverConfig::default()).unwrap();
        assert_eq!(r.low_rank.frobenius_norm() + r.sparse.frobenius_norm(), 0.0);
    }

    #[test]
    fn huge_lambda_leaves_sparse_empty() {
        let m = synth_tube_sparse(&[6, 6, 4], 1.0, 1.0, 4, 3).unwrap();
        let r = rpca_tensor(&m, 1e6, &SolverConfig::default()).unwrap();
        assert_eq!(r.sparse.frobenius_norm(), 0.0);
        let gap = r.low_rank.distance(&m).unwrap() / m.frobenius_norm();
        assert!(gap < 1e-5, "gap {gap} after {} iterations", r.trace.records.len());
    }

    #[test]
    fn tube_noise_generator() {
        let s = synth_tube_sparse(&[5, 4, 12], 0.25, 1.0, 12, 1).unwrap();
        assert_eq!(tube_support(&s, 0.0).len(), 5);
        let s = synth_tube_sparse(&[5, 4, 12], 0.25, 1.0, 5, 1).unwrap();
        for (start, end) in [(0, 5), (5, 10), (10, 12)] {
            let nonzero = (0..20)
                .filter(|&p| (start..end).any(|k| s.data()[p + 20 * k] != 0.0))
                .count();
            assert_eq!(nonzero, 5);
        }
        let tiny = synth_tube_sparse(&[5, 4, 12], 0.01, 1.0, 3, 1).unwrap();
        assert_eq!(tiny.frobenius_norm(), 0.0);
        assert!(synth_tube_sparse(&[5, 4, 12], 0.0, 1.0, 3, 1).is_err());
        assert!(synth_tube_sparse(&[5, 4, 12], 0.5, 1.0, 13, 1).is_err());
        assert_eq!(s, synth_tube_sparse(&[5, 4, 12], 0.25, 1.0, 5, 1).unwrap());
    }

    #[test]
    fn matrix_rpca_recovers_rank_one_frames() {
        let a: Vec<f64> = (0..100).map(|i| ((i as f64) * 0.37).sin() * 2.0 + 0.5).collect();
        let b: Vec<f64> = (0..50).map(|k| ((k as f64) * 0.21).cos() + 1.2).collect();
        let low = DenseTensor::from_fn(&[10, 10, 50], |ix| a[ix[0] + 10 * ix[1]] * b[ix[2]]).unwrap();
        let mut rng = crate::seeded_rng(77);
        let spikes = index::sample(&mut rng, 5000, 50).into_vec();
        let mut m = low.clone();
        for (n, &p) in spikes.iter().enumerate() {
            let idx = [p % 10, (p / 10) % 10, p / 100];
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            m.set(&idx, m.get(&idx) + sign * 10.0);
        }
        let cfg = SolverConfig { tol: 1e-8, max_iters: 2000, ..SolverConfig::default() };
        let r = rpca_matrix_baseline(&m, None, &cfg).unwrap();
        let rse = rse_db(&r.low_rank, &low).unwrap();
        assert!(rse < -40.0, "rse {rse} after {} iterations", r.trace.records.len());
    }

    #[test]
    fn matrix_completion_baseline_cases() {
        let m = synth_low_tubal_rank(&[3, 4, 5], 2, 1).unwrap();
        let full = SamplingMask::full(m.dims()).unwrap();
        let (z, _) = complete_matrix_baseline(&m, &full, &SolverConfig::default()).unwrap();
        assert!(z.distance(&m).unwrap() < 1e-9 * m.frobenius_norm());

        let a: Vec<f64> = (0..64).map(|i| ((i as f64) * 0.53).sin() + 0.2).collect();
        let b: Vec<f64> = (0..40).map(|k| ((k as f64) * 0.31).cos() - 0.4).collect();
        let truth = DenseTensor::from_fn(&[8, 8, 40], |ix| a[ix[0] + 8 * ix[1]] * b[ix[2]]).unwrap();
        let mask = sample_mask(truth.dims(), 0.6, 5).unwrap();
        let cfg = SolverConfig { tol: 1e-9, max_iters: 3000, ..SolverConfig::default() };
        let (z, trace) = complete_matrix_baseline(&mask.apply(&truth).unwrap(), &mask, &cfg).unwrap();
        let rse = rse_db(&z, &truth).unwrap();
        assert!(rse < -60.0, "rse {rse} after {} iterations", trace.records.len());
    }
}
