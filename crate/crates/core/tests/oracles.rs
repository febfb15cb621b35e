mod common;

use common::{float_bp, quantize_exact, random_bits, rng, DenseEncoder};
use rand::Rng;
use swldpc::bp::{init_from_side_info, quantize_llr, BpConfig, BpDecoder, TannerGraph};
use swldpc::code::{build_code, lookup, CodeSpec};
use swldpc::encoder::{codeword, encode};
use swldpc::source::{generate_frame, CorrelationConfig};
use swldpc::SourceBlock;

#[test]
fn encoder_matches_dense_solve_k1024() {
    let spec = CodeSpec::new("r05", 1024, 1536, 3.0, 0.05);
    let h = build_code(&spec, 9).unwrap();
    let oracle = DenseEncoder::new(&h);
    let mut r = rng(500);
    for _ in 0..500 {
        let x = SourceBlock(random_bits(&mut r, 1024));
        let z = encode(&h, &x).unwrap();
        assert_eq!(z.0, oracle.parity(&x.0));
        assert!(oracle.syndrome_is_zero(&codeword(&x, &z)));
    }
}

#[test]
fn hand_worked_parity() {
    let h = swldpc::SparseParityMatrix::from_systematic_rows(3, vec![vec![0, 2], vec![1, 2]]).unwrap();
    let x = SourceBlock::from_u8s(&[1, 1, 0]);
    let z = encode(&h, &x).unwrap();
    assert_eq!(z.to_u8s(), [1, 0]);
    assert!(DenseEncoder::new(&h).syndrome_is_zero(&codeword(&x, &z)));
}

#[test]
fn quantizer_agrees_with_exact_floor() {
    let mut r = rng(3);
    for _ in 0..200_000 {
        let l: f64 = r.random_range(-20.0..=20.0);
        assert_eq!(
            quantize_llr(l, 3, 10_000),
            quantize_exact(l, 3, 10_000),
            "l = {l:e}"
        );
    }
    // half-step boundaries and their floating-point neighbours
    for j in -400i32..=400 {
        let b = (j as f64 + 0.5) / 8.0;
        for l in [b, b.next_down(), b.next_up()] {
            assert_eq!(
                quantize_llr(l, 3, 10_000),
                quantize_exact(l, 3, 10_000),
                "l = {l:e}"
            );
        }
    }
    for q in 0..8 {
        for l in [1e-300, -1e-300, 5e-324, -5e-324, 1e3, -1e3, 1e10, -1e10] {
            assert_eq!(quantize_llr(l, q, 10_000), quantize_exact(l, q, 10_000));
        }
    }
}

#[test]
fn side_information_magnitude_at_p_tenth() {
    let alpha = (0.1f64 / 0.9).ln();
    assert_eq!(quantize_exact(alpha, 3, 10_000), -18);
    let y: swldpc::Bits = [true, false].into_iter().collect();
    let z = swldpc::ParityBlock::from_u8s(&[1, 0]);
    assert_eq!(
        init_from_side_info(&y, &z, alpha, 3, 10_000).values,
        [18, -18, 10_000, -10_000]
    );
    let zero = init_from_side_info(&y, &z, 0.0, 3, 10_000);
    assert_eq!(&zero.values[..2], [0, 0]);
}

// Frozen from the float decoder below: at p = 0.045 on L2-k1024 with code
// seed 1, floating-point belief propagation fails on 12 of 60 frames.
const FLOAT_FAILURES_L2_K1024: usize = 12;

#[test]
fn integer_decoder_tracks_floating_point() {
    let spec = lookup("L2-k1024").unwrap();
    let h = build_code(&spec, 1).unwrap();
    let g = TannerGraph::new(&h);
    let mut dec = BpDecoder::new(&g, BpConfig::default());
    let p: f64 = 0.045;
    let alpha = (p / (1.0 - p)).ln();
    let cfg = CorrelationConfig::new(p, 0.0, 77).unwrap();
    let (mut int_fail, mut float_fail) = (0, 0);
    for f in 0..60 {
        let pair = generate_frame(h.k(), &cfg, f).unwrap();
        let x = pair.source();
        let z = encode(&h, &x).unwrap();
        let out = dec
            .decode(&init_from_side_info(&pair.y, &z, alpha, 3, 10_000))
            .unwrap();
        int_fail += usize::from(out.systematic(h.k()) != x.0);

        let llr: Vec<f64> = pair
            .y
            .iter()
            .map(|b| if *b { -alpha } else { alpha })
            .chain(z.0.iter().map(|b| if *b { 1250.0 } else { -1250.0 }))
            .collect();
        let (hard, _) = float_bp(&h, &llr, 50);
        float_fail += usize::from(hard[..h.k()].iter().zip(x.0.iter()).any(|(a, b)| *a != *b));
    }
    assert_eq!(float_fail, FLOAT_FAILURES_L2_K1024);
    assert!(
        int_fail <= float_fail + 3,
        "integer {int_fail} vs float {float_fail}"
    );
}

#[test]
fn flip_fraction_concentrates() {
    let cfg = CorrelationConfig::new(0.1, 0.0, 21).unwrap();
    let tol = 3.0 * (0.1f64 * 0.9 / 16400.0).sqrt();
    let frames = 200;
    let inside = (0..frames)
        .filter(|&f| (generate_frame(16400, &cfg, f).unwrap().flip_fraction() - 0.1).abs() <= tol)
        .count();
    assert!(inside * 100 >= 99 * frames as usize, "{inside} of {frames}");
}

#[test]
fn flip_rate_converges_to_mean() {
    let cfg = CorrelationConfig::new(0.025, 0.005, 8).unwrap();
    let (k, frames) = (4096usize, 400u64);
    let flips: usize = (0..frames)
        .map(|f| {
            let p = generate_frame(k, &cfg, f).unwrap();
            swldpc::bits::hamming_distance(&p.x, &p.y)
        })
        .sum();
    let n = (k as u64 * frames) as f64;
    // per-bit variance includes the spread of the per-block probability
    let var = 0.025 * 0.975 / n + (0.005f64 * 0.005 / 3.0) / frames as f64;
    let mean = flips as f64 / n;
    assert!((mean - 0.025).abs() <= 4.0 * var.sqrt(), "mean {mean}");
}

#[test]
fn source_bits_are_balanced() {
    let cfg = CorrelationConfig::new(0.05, 0.0, 4).unwrap();
    let (k, frames) = (16400usize, 50u64);
    let ones: usize = (0..frames)
        .map(|f| generate_frame(k, &cfg, f).unwrap().x.count_ones())
        .sum();
    let n = (k as u64 * frames) as f64;
    assert!((ones as f64 / n - 0.5).abs() <= 4.0 * (0.25 / n).sqrt());
}

#[test]
fn perturbation_is_uniform_chi_square() {
    let (mean, delta) = (0.025, 0.005);
    let cfg = CorrelationConfig::new(mean, delta, 1234).unwrap();
    let n = 10_000u64;
    let mut bins = [0u32; 10];
    for f in 0..n {
        let p = generate_frame(1, &cfg, f).unwrap().actual_p;
        assert!((mean - delta..=mean + delta).contains(&p));
        let b = (((p - (mean - delta)) / (2.0 * delta)) * 10.0).floor() as usize;
        bins[b.min(9)] += 1;
    }
    let expected = n as f64 / 10.0;
    let chi2: f64 = bins
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    // 99% critical value of chi-square with 9 degrees of freedom
    assert!(chi2 < 21.666, "chi2 = {chi2}, bins {bins:?}");
}

#[test]
fn counting_oracle_regular_l1() {
    let spec = CodeSpec::new("L1", 16400, 26200, 3.0, 0.1);
    let h = build_code(&spec, 1).unwrap();
    let w = h.column_weights();
    assert!(w[..16400].iter().all(|&d| d == 3));
    let sys_ones: usize = w[..16400].iter().sum();
    assert_eq!(sys_ones, 3 * 16400);
    let sys_row = sys_ones as f64 / 9800.0;
    assert!((sys_row - 5.02).abs() < 0.005);
    assert!((h.mean_row_weight() - 7.02).abs() < 0.005);
}
