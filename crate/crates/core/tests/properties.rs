mod common;

use common::{block_diagonal, direct_t_product, gaussian, naive_spectrum, relative, rng, singular_values};
use proptest::prelude::*;
use tubal::completion::{complete_tnn, sample_mask, synth_low_tubal_rank, SolverConfig};
use tubal::io::{decode, encode_mask, encode_tensor, TensorData};
use tubal::rpca::{rpca_tensor, synth_tube_sparse};
use tubal::*;

fn tensor(max: usize) -> impl Strategy<Value = DenseTensor> {
    (1..=max, 1..=max, 1..=max, any::<u64>()).prop_map(|(a, b, c, seed)| gaussian(&[a, b, c], &mut rng(seed)))
}

/// `(A, B, C)` with chainable shapes and a shared tube length.
fn chain(max: usize) -> impl Strategy<Value = (DenseTensor, DenseTensor, DenseTensor)> {
    (1..=max, 1..=max, 1..=max, 1..=max, 1..=max, any::<u64>()).prop_map(|(n1, n2, n3, n4, t, seed)| {
        let mut r = rng(seed);
        (gaussian(&[n1, n2, t], &mut r), gaussian(&[n2, n3, t], &mut r), gaussian(&[n3, n4, t], &mut r))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(t in tensor(16)) {
        let back = idft_mode3(&dft_mode3(&t).unwrap()).unwrap();
        for (x, y) in back.data().iter().zip(t.data()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_is_conjugate_symmetric(t in tensor(8)) {
        let s = dft_mode3(&t).unwrap();
        let (n1, n2, n3) = s.dims();
        for k in 1..n3 {
            for i in 0..n1 {
                for j in 0..n2 {
                    // Bit-exact mirroring is not promised by the FFT, only by the algebra.
                    let gap = (s.get(i, j, k) - s.get(i, j, n3 - k).conj()).norm();
                    prop_assert!(gap < 1e-12 * (1.0 + s.get(i, j, k).norm()));
                }
            }
        }
    }

    #[test]
    fn parseval(t in tensor(10)) {
        let s = dft_mode3(&t).unwrap();
        let n3 = t.dims()[2] as f64;
        let lhs = s.frobenius_norm().powi(2);
        let rhs = n3 * t.frobenius_norm().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn spectrum_matches_naive_dft(t in tensor(6)) {
        let s = dft_mode3(&t).unwrap();
        for (k, slice) in naive_spectrum(&t).iter().enumerate() {
            prop_assert!((s.slice(k) - slice).norm() <= 1e-11 * (1.0 + slice.norm()));
        }
    }

    #[test]
    fn product_matches_direct_convolution((a, b, _) in chain(6)) {
        let fast = t_product(&a, &b).unwrap();
        let direct = direct_t_product(&a, &b);
        prop_assert!(fast.distance(&direct).unwrap() <= 1e-11 * direct.frobenius_norm().max(1e-300));
    }

    #[test]
    fn product_laws((a, b, c) in chain(5)) {
        let left = t_product(&t_product(&a, &b).unwrap(), &c).unwrap();
        let right = t_product(&a, &t_product(&b, &c).unwrap()).unwrap();
        prop_assert!(relative(&left, &right) < 1e-11);

        let ab_t = t_transpose(&t_product(&a, &b).unwrap()).unwrap();
        let bt_at = t_product(&t_transpose(&b).unwrap(), &t_transpose(&a).unwrap()).unwrap();
        prop_assert!(relative(&ab_t, &bt_at) < 1e-11);

        let (n1, n2, t) = (a.dims()[0], a.dims()[1], a.dims()[2]);
        let right_id = t_product(&a, &identity_tensor(n2, t).unwrap()).unwrap();
        let left_id = t_product(&identity_tensor(n1, t).unwrap(), &a).unwrap();
        prop_assert!(relative(&right_id, &a) < 1e-11);
        prop_assert!(relative(&left_id, &a) < 1e-11);
    }

    #[test]
    fn factors_are_valid(t in tensor(8)) {
        let f = tsvd(&t).unwrap();
        prop_assert!(is_orthogonal(&f.u, 1e-9).unwrap());
        prop_assert!(is_orthogonal(&f.v, 1e-9).unwrap());
        let (n1, n2, n3) = (f.s.dims()[0], f.s.dims()[1], f.s.dims()[2]);
        for k in 0..n3 {
            for i in 0..n1 {
                for j in 0..n2 {
                    if i != j {
                        prop_assert!(f.s.get(&[i, j, k]).abs() < 1e-12);
                    }
                }
            }
        }
        let top = t.frobenius_norm() * (n3 as f64).sqrt();
        for diag in f.spectral_diagonal().unwrap() {
            prop_assert!(diag.iter().all(|&s| s >= -1e-12 * top));
            prop_assert!(diag.windows(2).all(|w| w[0] >= w[1] - 1e-12 * top));
        }
        prop_assert!(relative(&reconstruct(&f).unwrap(), &t) < 1e-9);
    }

    #[test]
    fn truncation_error_matches_discarded_spectrum(t in tensor(6), k_seed in any::<usize>()) {
        let f = tsvd(&t).unwrap();
        let r = f.tube_count();
        let k = 1 + k_seed % r;
        let err = truncate_tubal(&f, k).unwrap().distance(&t).unwrap().powi(2);
        let spectrum = naive_spectrum(&t);
        let n3 = spectrum.len() as f64;
        let discarded: f64 = spectrum.iter().map(|s| singular_values(s)[k..].iter().map(|x| x * x).sum::<f64>()).sum();
        let predicted = discarded / n3;
        prop_assert!((err - predicted).abs() <= 1e-8 * t.frobenius_norm().powi(2));
    }

    #[test]
    fn multi_rank_sum_is_block_rank(seed in any::<u64>(), r in 1usize..=3) {
        let m = synth_low_tubal_rank(&[5, 4, 3], r, seed).unwrap();
        let p = multi_rank(&m, 1e-8).unwrap();
        let block = block_diagonal(&naive_spectrum(&m));
        let sv = singular_values(&block);
        let rank = sv.iter().filter(|&&s| s > 1e-8 * sv[0]).count();
        prop_assert_eq!(p.l1(), rank);
        prop_assert_eq!(tubal_rank(&m, 1e-8).unwrap(), r);
    }

    #[test]
    fn ten1_round_trip_is_bit_exact(order in 2usize..=4, dims_seed in any::<u64>(), mask in any::<bool>()) {
        let mut r = rng(dims_seed);
        let dims: Vec<usize> = (0..order).map(|_| 1 + (rand::Rng::random::<u32>(&mut r) % 4) as usize).collect();
        let bytes = if mask {
            encode_mask(&sample_mask(&dims, 0.5, dims_seed).unwrap())
        } else {
            encode_tensor(&gaussian(&dims, &mut r))
        };
        let back = match decode(&bytes).unwrap() {
            TensorData::Real(t) => encode_tensor(&t),
            TensorData::Mask(m) => encode_mask(&m),
        };
        prop_assert_eq!(back, bytes);
    }

    #[test]
    fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..96)) {
        let _ = decode(&bytes);
    }

    #[test]
    fn decode_never_panics_on_valid_prefixes(bytes in proptest::collection::vec(any::<u8>(), 0..64), code in 1u32..=2) {
        let mut buf = b"TEN1".to_vec();
        buf.extend_from_slice(&code.to_le_bytes());
        buf.extend_from_slice(&bytes);
        if let Ok(data) = decode(&buf) {
            let again = match data {
                TensorData::Real(t) => encode_tensor(&t),
                TensorData::Mask(m) => encode_mask(&m),
            };
            prop_assert_eq!(again, buf);
        }
    }
}

/// The objective of the `Z` iterate is not monotone: it dips below the
/// optimum while the iterate is still infeasible and then oscillates back
/// onto it. Over the final half it must stay close to the TNN of the truth
/// and end on it.
#[test]
fn completion_objective_settles() {
    for seed in [0u64, 1, 3] {
        let m = synth_low_tubal_rank(&[8, 8, 4], 1, seed).unwrap();
        let mask = sample_mask(m.dims(), 0.6, 100 + seed).unwrap();
        let cfg = SolverConfig { tol: 1e-7, max_iters: 500, ..SolverConfig::default() };
        let (_, trace) = complete_tnn(&mask.apply(&m).unwrap(), &mask, &cfg).unwrap();
        let target = tnn(&m).unwrap();
        let tail = &trace.records[trace.records.len() / 2..];
        assert!(tail.iter().all(|r| (r.objective - target).abs() <= 1e-3 * target));
        assert!((tail.last().unwrap().objective - target).abs() <= 1e-6 * target);
    }
}

#[test]
fn solvers_are_deterministic() {
    let m = synth_low_tubal_rank(&[6, 5, 4], 2, 7).unwrap();
    let mask = sample_mask(m.dims(), 0.7, 8).unwrap();
    let cfg = SolverConfig::default();
    let strip = |t: &tubal::completion::SolveTrace| t.records.iter().map(|r| (r.iter, r.residual, r.objective)).collect::<Vec<_>>();
    let (a, ta) = complete_tnn(&mask.apply(&m).unwrap(), &mask, &cfg).unwrap();
    let (b, tb) = complete_tnn(&mask.apply(&m).unwrap(), &mask, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(strip(&ta), strip(&tb));

    let noisy = m.add(&synth_tube_sparse(m.dims(), 0.1, 1.0, 2, 3).unwrap()).unwrap();
    let ra = rpca_tensor(&noisy, 0.4, &cfg).unwrap();
    let rb = rpca_tensor(&noisy, 0.4, &cfg).unwrap();
    assert_eq!(ra.low_rank, rb.low_rank);
    assert_eq!(ra.sparse, rb.sparse);
    let f = |r: &tubal::rpca::RpcaResult| r.trace.records.iter().map(|x| (x.feasibility, x.low_rank_norm, x.sparse_norm)).collect::<Vec<_>>();
    assert_eq!(f(&ra), f(&rb));
    if ra.trace.converged {
        assert!(ra.trace.records.last().unwrap().feasibility < cfg.tol);
    }
}
