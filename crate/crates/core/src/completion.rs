//! Tensor completion by TNN minimization under exact sampling constraints.
//!
//! The ADMM recursion alternates a projection onto the observed entries, a
//! slice-wise singular value thresholding in the Fourier domain with
//! threshold `1/penalty`, and a scaled dual update:
//!
//! ```text
//! X <- P_obs(Z - Q)
//! Z <- shrink(X + Q, 1/penalty)
//! Q <- Q + X - Z
//! ```

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{t_product, t_transpose};
use crate::error::{Error, Result};
use crate::fourier::{fold_trailing_modes, map_conjugate_pairs, unfold_trailing_modes, SpectralTensor};
use crate::linalg::{real_part, svt, to_complex};
use crate::tensor::{check_dims, DenseTensor};
use crate::tsvd::TSvdFactors;

/// Indicator of observed entries, one flag per tensor element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingMask {
    dims: Vec<usize>,
    observed: Vec<bool>,
    count: usize,
}

impl SamplingMask {
    pub fn new(dims: Vec<usize>, observed: Vec<bool>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if observed.len() != len {
            return Err(Error::dim(format!("mask length {} does not match extents {dims:?}", observed.len())));
        }
        let count = observed.iter().filter(|&&b| b).count();
        Ok(Self { dims, observed, count })
    }

    pub fn full(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Self::new(dims.to_vec(), vec![true; len])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn is_observed(&self, linear_index: usize) -> bool {
        self.observed[linear_index]
    }

    /// `P_Omega(t)`: keeps observed entries and zeroes the rest.
    pub fn apply(&self, t: &DenseTensor) -> Result<DenseTensor> {
        self.expect_dims(t)?;
        Ok(DenseTensor::from_parts(
            self.dims.clone(),
            t.data().iter().zip(&self.observed).map(|(&x, &o)| if o { x } else { 0.0 }).collect(),
        ))
    }

    pub(crate) fn expect_dims(&self, t: &DenseTensor) -> Result<()> {
        if t.dims() != self.dims.as_slice() {
            return Err(Error::dim(format!("mask extents {:?} differ from tensor extents {:?}", self.dims, t.dims())));
        }
        Ok(())
    }
}

/// Observes every entry independently with probability `rate`.
pub fn sample_mask(dims: &[usize], rate: f64, seed: u64) -> Result<SamplingMask> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::arg(format!("sampling rate must lie in (0, 1], got {rate}")));
    }
    let len = check_dims(dims)?;
    let mut rng = crate::seeded_rng(seed);
    let observed = (0..len).map(|_| rng.random::<f64>() < rate).collect();
    SamplingMask::new(dims.to_vec(), observed)
}

/// ADMM hyperparameters. `penalty` is the augmented-Lagrangian weight; the
/// nuclear-norm threshold it induces is `1/penalty`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub penalty: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { penalty: 1.0, tol: 1e-6, max_iters: 1000, seed: None }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(Error::arg(format!("penalty must be positive and finite, got {}", self.penalty)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::arg(format!("tolerance must be positive and finite, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::arg("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `||X - Z||_F / max(1, ||observed||_F)`.
    pub residual: f64,
    /// Nuclear-norm objective of the `Z` iterate.
    pub objective: f64,
    /// Wall time since the solve started.
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// Iteration whose iterate was returned.
    pub returned_iter: usize,
}

/// Pins the observed entries and keeps `candidate` everywhere else: the
/// least-squares projection onto the constraint set.
pub fn project_onto_observations(
    candidate: &DenseTensor,
    observed: &DenseTensor,
    mask: &SamplingMask,
) -> Result<DenseTensor> {
    candidate.expect_same_dims(observed)?;
    mask.expect_dims(candidate)?;
    Ok(DenseTensor::from_parts(
        candidate.dims().to_vec(),
        candidate
            .data()
            .iter()
            .zip(observed.data())
            .zip(mask.observed())
            .map(|((&c, &o), &m)| if m { o } else { c })
            .collect(),
    ))
}

/// Singular value shrinkage `U diag((sigma - tau)_+) V^H`, the proximal map
/// of `tau * ||.||_*`.
pub fn svt_complex(w: &DMatrix<Complex64>, tau: f64) -> Result<DMatrix<Complex64>> {
    if !(tau >= 0.0) {
        return Err(Error::arg(format!("threshold must be nonnegative, got {tau}")));
    }
    Ok(svt(w, tau, 0)?.0)
}

/// Slice-wise SVT in the Fourier domain; also returns the TNN of the result.
pub(crate) fn shrink_with_norm(t: &DenseTensor, tau: f64) -> Result<(DenseTensor, f64)> {
    if !(tau >= 0.0) {
        return Err(Error::arg(format!("threshold must be nonnegative, got {tau}")));
    }
    let spec = fold_trailing_modes(t)?;
    let (n1, n2, _) = spec.dims();
    let mut nuclear = 0.0;
    let shrunk = map_conjugate_pairs(&spec, n1, n2, |k, slice, self_partner| {
        if self_partner {
            let (m, nuc) = svt(&real_part(slice), tau, k)?;
            nuclear += nuc;
            Ok(to_complex(&m))
        } else {
            let (m, nuc) = svt(slice, tau, k)?;
            nuclear += 2.0 * nuc;
            Ok(m)
        }
    })?;
    Ok((unfold_trailing_modes(&shrunk)?, nuclear))
}

/// Proximal map of `tau * TNN`: SVT with threshold `tau` on every Fourier
/// slice, then back to the original domain.
pub fn shrink_slicewise(t: &DenseTensor, tau: f64) -> Result<DenseTensor> {
    Ok(shrink_with_norm(t, tau)?.0)
}

/// The same shrinkage expressed in the original domain: `U * (S * T) * V^T`
/// where `T` is f-diagonal and its `i`-th diagonal tube is the inverse DFT of
/// `(1 - tau / s_hat(i,i,k))_+` (zero where `s_hat` vanishes).
pub fn tubal_shrink(f: &TSvdFactors, tau: f64) -> Result<DenseTensor> {
    if !(tau >= 0.0) {
        return Err(Error::arg(format!("threshold must be nonnegative, got {tau}")));
    }
    let sh = fold_trailing_modes(&f.s)?;
    let n2 = f.s.cols();
    let mut th = SpectralTensor::zeros(n2, n2, sh.modes());
    for k in 0..sh.slice_count() {
        let mut slice = DMatrix::<Complex64>::zeros(n2, n2);
        for i in 0..f.tube_count() {
            let s = sh.get(i, i, k).re;
            if s > 0.0 {
                slice[(i, i)] = Complex64::new((1.0 - tau / s).max(0.0), 0.0);
            }
        }
        th.set_slice(k, &slice);
    }
    let threshold = unfold_trailing_modes(&th)?;
    let shrunk_core = t_product(&f.s, &threshold)?;
    t_product(&t_product(&f.u, &shrunk_core)?, &t_transpose(&f.v)?)
}

/// Shared ADMM skeleton for nuclear-norm completion; `shrink` is the
/// proximal map of the chosen norm and returns the norm of its output.
pub(crate) fn admm_complete<F>(
    observed: &DenseTensor,
    mask: &SamplingMask,
    cfg: &SolverConfig,
    mut shrink: F,
) -> Result<(DenseTensor, SolveTrace)>
where
    F: FnMut(&DenseTensor, f64) -> Result<(DenseTensor, f64)>,
{
    cfg.validate()?;
    mask.expect_dims(observed)?;
    if mask.count() == 0 {
        return Err(Error::arg("sampling mask observes no entries"));
    }
    let start = Instant::now();
    let tau = 1.0 / cfg.penalty;
    let pinned = mask.apply(observed)?;
    let scale = pinned.frobenius_norm().max(1.0);

    let mut z = pinned.clone();
    let mut q = DenseTensor::zeros(observed.dims())?;
    let mut trace = SolveTrace::default();
    let mut best: Option<(f64, DenseTensor)> = None;

    for iter in 1..=cfg.max_iters {
        let x = project_onto_observations(&z.sub(&q)?, &pinned, mask)?;
        let (z_next, objective) = shrink(&x.add(&q)?, tau)?;
        z = z_next;
        let gap = x.sub(&z)?;
        q = q.add(&gap)?;
        let residual = gap.frobenius_norm() / scale;
        trace.records.push(IterationRecord { iter, residual, objective, seconds: start.elapsed().as_secs_f64() });

        if residual < cfg.tol {
            trace.converged = true;
            trace.returned_iter = iter;
            return Ok((z, trace));
        }
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, z.clone()));
            trace.returned_iter = iter;
        }
    }
    let (_, z_best) = best.expect("at least one iteration ran");
    Ok((z_best, trace))
}

/// Recovers a tensor from its observed entries by minimizing the tensor
/// nuclear norm subject to agreeing with every observation. Unobserved
/// positions of `observed` are ignored. Orders above three are handled
/// through the multi-mode transform of [`fold_trailing_modes`].
///
/// If `max_iters` is reached first, the iterate with the smallest residual is
/// returned and `trace.converged` is false.
pub fn complete_tnn(
    observed: &DenseTensor,
    mask: &SamplingMask,
    cfg: &SolverConfig,
) -> Result<(DenseTensor, SolveTrace)> {
    if observed.order() < 3 {
        return Err(Error::dim(format!("complete_tnn needs order >= 3, got order {}", observed.order())));
    }
    admm_complete(observed, mask, cfg, shrink_with_norm)
}

/// Gaussian tensor of tubal rank `r`: `X * Y` with `X` of extents
/// `n1 x r x n3...` and `Y` of extents `r x n2 x n3...`.
pub fn synth_low_tubal_rank(dims: &[usize], r: usize, seed: u64) -> Result<DenseTensor> {
    check_dims(dims)?;
    if dims.len() < 3 {
        return Err(Error::dim(format!("need order >= 3, got order {}", dims.len())));
    }
    let limit = dims[0].min(dims[1]);
    if r == 0 || r > limit {
        return Err(Error::arg(format!("tubal rank {r} outside 1..={limit}")));
    }
    let mut rng = crate::seeded_rng(seed);
    let mut xd = dims.to_vec();
    xd[1] = r;
    let mut yd = dims.to_vec();
    yd[0] = r;
    let x = DenseTensor::from_fn(&xd, |_| StandardNormal.sample(&mut rng))?;
    let y = DenseTensor::from_fn(&yd, |_| StandardNormal.sample(&mut rng))?;
    t_product(&x, &y)
}
