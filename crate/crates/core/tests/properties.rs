mod common;

use common::{quantize_exact, Dense, DenseEncoder};
use proptest::prelude::*;
use swldpc::alist::{read_alist, to_alist_string};
use swldpc::bits::{bits_from_u8s, hamming_distance};
use swldpc::bp::{quantize_llr, BpConfig, BpDecoder, CheckKernel, LlrqVector, TannerGraph};
use swldpc::code::{build_code, CodeSpec};
use swldpc::encoder::{codeword, encode};
use swldpc::joint::{alpha_from_weight, estimate_alpha};
use swldpc::source::{binary_entropy, generate_pair, CorrelationConfig};
use swldpc::{Bits, SourceBlock, SparseParityMatrix};

/// Small feasible code geometries: (k, n, dv).
fn geometry() -> impl Strategy<Value = (usize, usize, f64)> {
    (16usize..300, 15u32..60, 20u32..40).prop_filter_map("degree fits", |(k, rate_pct, dv10)| {
        let m = (k * rate_pct as usize / 100).max(4);
        let dv = dv10 as f64 / 10.0;
        (dv.ceil() as usize <= m).then_some((k, k + m, dv))
    })
}

fn small_code() -> impl Strategy<Value = SparseParityMatrix> {
    (geometry(), any::<u64>())
        .prop_map(|((k, n, dv), seed)| build_code(&CodeSpec::new("p", k, n, dv, 0.05), seed).unwrap())
}

fn bits(len: usize) -> impl Strategy<Value = Bits> {
    prop::collection::vec(any::<bool>(), len).prop_map(|v| v.into_iter().collect())
}

fn code_and_words() -> impl Strategy<Value = (SparseParityMatrix, Bits, Bits)> {
    small_code().prop_flat_map(|h| {
        let k = h.k();
        (Just(h), bits(k), bits(k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn construction_invariants(((k, n, dv), seed) in (geometry(), any::<u64>())) {
        let spec = CodeSpec::new("p", k, n, dv, 0.05);
        let h = build_code(&spec, seed).unwrap();
        let m = n - k;
        prop_assert_eq!(h.n_rows(), m);
        for (i, row) in h.rows().iter().enumerate() {
            prop_assert!(row.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(row.iter().all(|&c| (c as usize) < n));
            let parity: Vec<u32> = row.iter().copied().filter(|&c| c as usize >= k).collect();
            let expected: Vec<u32> = if i == 0 { vec![k as u32] } else { vec![(k + i - 1) as u32, (k + i) as u32] };
            prop_assert_eq!(parity, expected);
        }
        prop_assert!((h.mean_systematic_column_weight() - dv).abs() <= 0.15);
        prop_assert_eq!(h.gf2_rank(), m);
        prop_assert_eq!(Dense::from_columns(&h, 0, n).rank(), m);
        prop_assert_eq!(build_code(&spec, seed).unwrap(), h);
    }

    #[test]
    fn syndrome_and_linearity((h, a, b) in code_and_words()) {
        let za = encode(&h, &SourceBlock(a.clone())).unwrap();
        let zb = encode(&h, &SourceBlock(b.clone())).unwrap();
        prop_assert!(h.syndrome_ok(&codeword(&SourceBlock(a.clone()), &za)));
        let sum = SourceBlock(a ^ b);
        let zsum = encode(&h, &sum).unwrap();
        prop_assert_eq!(zsum.0, za.0 ^ zb.0);
        prop_assert_eq!(&encode(&h, &sum).unwrap().0, &DenseEncoder::new(&h).parity(&sum.0));
    }

    #[test]
    fn quantizer_matches_oracle_and_is_monotone(a in -1e4f64..1e4, b in -1e4f64..1e4, q in 0u32..6) {
        prop_assert_eq!(quantize_llr(a, q, 10_000), quantize_exact(a, q, 10_000));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize_llr(lo, q, 10_000) <= quantize_llr(hi, q, 10_000));
    }

    #[test]
    fn estimator_is_exact(k in 2usize..50_000, w_raw in any::<usize>()) {
        let w = w_raw % (k + 1);
        let s = alpha_from_weight(w, k);
        let wc = w.clamp(1, k - 1);
        prop_assert_eq!(s.flips, wc);
        prop_assert_eq!(s.p_hat, wc as f64 / k as f64);
        prop_assert!((s.alpha - (wc as f64 / (k - wc) as f64).ln()).abs() <= 1e-12);
        prop_assert_eq!(alpha_from_weight(k - wc, k).alpha, -s.alpha);
        prop_assert!((s.alpha - (s.p_hat / (1.0 - s.p_hat)).ln()).abs() <= 1e-12);
    }

    #[test]
    fn estimator_counts_disagreements(x in prop::collection::vec(0u8..2, 2..400), mask in prop::collection::vec(0u8..2, 400)) {
        let y: Vec<u8> = x.iter().zip(&mask).map(|(a, m)| a ^ m).collect();
        let (xb, yb) = (bits_from_u8s(&x), bits_from_u8s(&y));
        let w = hamming_distance(&xb, &yb);
        let s = estimate_alpha(&xb, &yb).unwrap();
        prop_assert_eq!(s.flips, w.clamp(1, x.len() - 1));
    }

    #[test]
    fn entropy_shape(p in 0.0f64..=0.5, d in 1e-6f64..0.1) {
        prop_assert!((binary_entropy(p) - binary_entropy(1.0 - p)).abs() < 1e-12);
        prop_assert!(binary_entropy(p) <= 1.0);
        if p + d <= 0.5 {
            prop_assert!(binary_entropy(p) < binary_entropy(p + d));
        }
    }

    #[test]
    fn pair_generation_is_reproducible(k in 1usize..3000, seed in any::<u64>(), mean in 0.01f64..0.2, frac in 0.0f64..1.0) {
        let cfg = CorrelationConfig::new(mean, mean * frac * 0.5, seed).unwrap();
        let a = generate_pair(k, &cfg).unwrap();
        prop_assert_eq!(&a, &generate_pair(k, &cfg).unwrap());
        prop_assert_eq!(a.x.len(), k);
        prop_assert!((cfg.mean_p - cfg.delta_p..=cfg.mean_p + cfg.delta_p).contains(&a.actual_p));
    }

    #[test]
    fn decoding_is_deterministic((h, x, y) in code_and_words(), kernel in prop_oneof![Just(CheckKernel::SumProduct), Just(CheckKernel::MinSum)]) {
        let g = TannerGraph::new(&h);
        let cfg = BpConfig { kernel, max_iters: 20, ..BpConfig::default() };
        let z = encode(&h, &SourceBlock(x)).unwrap();
        let init = swldpc::bp::init_from_side_info(&y, &z, (0.1f64 / 0.9).ln(), 3, 10_000);
        let a = BpDecoder::new(&g, cfg.clone()).decode(&init).unwrap();
        let b = BpDecoder::new(&g, cfg).decode(&init).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.syndrome_ok, h.syndrome_ok(&a.hard_bits));
        prop_assert!(a.posterior.values.iter().all(|v| v.abs() <= 10_000));
        if a.syndrome_ok {
            let xs = SourceBlock(a.systematic(h.k()));
            prop_assert_eq!(encode(&h, &xs).unwrap().0, z.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn alist_round_trip(h in small_code(), p in prop::option::of(0.001f64..0.499)) {
        let text = to_alist_string(&h, p);
        let back = read_alist(text.as_bytes()).unwrap();
        prop_assert_eq!(back.matrix, h);
        prop_assert_eq!(back.design_p, p);
    }
}

/// Every check has even degree, so the all-ones word is a codeword and
/// negating the input must negate the whole decoder state.
fn even_degree_toy() -> SparseParityMatrix {
    let systematic = vec![
        vec![0, 1, 2],
        vec![3, 4],
        vec![5, 6],
        vec![0, 7],
        vec![1, 3],
        vec![2, 5],
        vec![4, 6],
        vec![6, 7],
    ];
    let h = SparseParityMatrix::from_systematic_rows(8, systematic).unwrap();
    assert!(h.rows().iter().all(|r| r.len() % 2 == 0));
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sign_symmetry(values in prop::collection::vec(-60i32..=60, 16), kernel in prop_oneof![Just(CheckKernel::SumProduct), Just(CheckKernel::MinSum)], iters in 0usize..12) {
        let h = even_degree_toy();
        let g = TannerGraph::new(&h);
        let cfg = BpConfig { kernel, max_iters: iters, ..BpConfig::default() };
        let pos = LlrqVector { values: values.clone(), q: 3, s_max: 10_000 };
        let neg = LlrqVector { values: values.iter().map(|v| -v).collect(), q: 3, s_max: 10_000 };
        let a = BpDecoder::new(&g, cfg.clone()).decode(&pos).unwrap();
        let b = BpDecoder::new(&g, cfg).decode(&neg).unwrap();
        if a.iterations_used == b.iterations_used {
            let negated: Vec<i32> = a.posterior.values.iter().map(|v| -v).collect();
            prop_assert_eq!(&b.posterior.values, &negated);
            for (i, v) in a.posterior.values.iter().enumerate() {
                if *v != 0 {
                    prop_assert_ne!(a.hard_bits[i], b.hard_bits[i]);
                }
            }
        } else {
            // early exit differs only through tie-breaking at zero posteriors
            prop_assert!(a.posterior.values.contains(&0) || b.posterior.values.contains(&0));
        }
    }
}
