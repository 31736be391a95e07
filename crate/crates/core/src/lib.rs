//! t-product tensor algebra and the recovery algorithms built on the t-SVD.
//!
//! A third-order tensor is treated as a matrix of tubes, with circular
//! convolution playing the role of scalar multiplication. Under the DFT along
//! the tubes the t-product becomes independent matrix products, one per
//! frontal slice, and the t-SVD, tensor multi-rank and tensor nuclear norm
//! (TNN) all come from per-slice matrix SVDs.
//!
//! On top of the algebra the crate provides:
//! - truncation-based compression ([`compression`]),
//! - TNN-penalized completion from sampled entries ([`completion`]),
//! - tensor robust PCA against tube-sparse corruption, with matrix baselines
//!   ([`rpca`]),
//! - the `TEN1` binary tensor format and CSV emitters ([`io`]).

pub mod algebra;
pub mod completion;
pub mod compression;
pub mod error;
pub mod fourier;
pub mod io;
mod linalg;
pub mod rpca;
pub mod tensor;
pub mod tsvd;

pub use algebra::{identity_tensor, is_orthogonal, t_product, t_transpose};
pub use error::{Error, Result};
pub use fourier::{dft_mode3, fold_trailing_modes, idft_mode3, unfold_trailing_modes, SpectralTensor};
pub use tensor::{frobenius_norm, tube_circ_conv, DenseTensor, Tube};
pub use tsvd::{
    blkdiag, multi_rank, reconstruct, shifted_frames, spectral_singular_values, tnn, truncate_tubal, tsvd,
    tubal_rank, MultiRank, TSvdFactors,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
