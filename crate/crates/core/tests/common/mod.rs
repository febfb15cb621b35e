//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use bitvec::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swldpc::{Bits, SparseParityMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut impl Rng, len: usize) -> Bits {
    (0..len).map(|_| rng.random_bool(0.5)).collect()
}

/// Dense GF(2) matrix, one packed word vector per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub rows: Vec<Vec<u64>>,
    pub cols: usize,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense {
            rows: vec![vec![0; cols.div_ceil(64)]; rows],
            cols,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r][c / 64] >> (c % 64) & 1 == 1
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.rows[r][c / 64] ^= 1 << (c % 64);
    }

    /// Columns `lo..hi` of `h`.
    pub fn from_columns(h: &SparseParityMatrix, lo: usize, hi: usize) -> Self {
        let mut d = Dense::zeros(h.n_rows(), hi - lo);
        for (r, row) in h.rows().iter().enumerate() {
            for &c in row {
                let c = c as usize;
                if (lo..hi).contains(&c) {
                    d.flip(r, c - lo);
                }
            }
        }
        d
    }

    pub fn mul_vec(&self, v: &BitSlice<u64>) -> Bits {
        assert_eq!(v.len(), self.cols);
        self.rows
            .iter()
            .map(|row| {
                let mut acc = 0u64;
                for (w, chunk) in row.iter().zip(v.chunks(64)) {
                    acc ^= w & chunk.load_le::<u64>();
                }
                acc.count_ones() % 2 == 1
            })
            .collect()
    }

    /// Gauss-Jordan inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<Dense> {
        let n = self.rows.len();
        assert_eq!(n, self.cols);
        let mut a = self.clone();
        let mut inv = Dense::zeros(n, n);
        for i in 0..n {
            inv.flip(i, i);
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col))?;
            a.rows.swap(col, pivot);
            inv.rows.swap(col, pivot);
            for r in 0..n {
                if r != col && a.get(r, col) {
                    let (src_a, src_i) = (a.rows[col].clone(), inv.rows[col].clone());
                    a.rows[r].iter_mut().zip(&src_a).for_each(|(x, y)| *x ^= y);
                    inv.rows[r].iter_mut().zip(&src_i).for_each(|(x, y)| *x ^= y);
                }
            }
        }
        Some(inv)
    }

    /// Rank by forward elimination.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..a.rows.len()).find(|&r| a.get(r, col)) else {
                continue;
            };
            a.rows.swap(rank, p);
            let src = a.rows[rank].clone();
            for r in rank + 1..a.rows.len() {
                if a.get(r, col) {
                    a.rows[r].iter_mut().zip(&src).for_each(|(x, y)| *x ^= y);
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Parity by solving `H_Z z = H_X x` with a dense inverse of `H_Z`.
pub struct DenseEncoder {
    hx: Dense,
    hz_inv: Dense,
    full: Dense,
}

impl DenseEncoder {
    pub fn new(h: &SparseParityMatrix) -> Self {
        let hz = Dense::from_columns(h, h.k(), h.n());
        DenseEncoder {
            hx: Dense::from_columns(h, 0, h.k()),
            hz_inv: hz.inverse().expect("parity part is invertible"),
            full: Dense::from_columns(h, 0, h.n()),
        }
    }

    pub fn parity(&self, x: &BitSlice<u64>) -> Bits {
        self.hz_inv.mul_vec(&self.hx.mul_vec(x))
    }

    pub fn syndrome_is_zero(&self, word: &BitSlice<u64>) -> bool {
        self.full.mul_vec(word).not_any()
    }
}

/// `floor(2^q * l + 1/2)` in exact integer arithmetic on the binary
/// expansion of `l`, clipped to `[-s_max, s_max]`.
pub fn quantize_exact(l: f64, q: u32, s_max: i32) -> i32 {
    assert!(l.is_finite());
    if l == 0.0 {
        return 0;
    }
    let bits = l.to_bits();
    let negative = bits >> 63 == 1;
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | 1 << 52, exp_field - 1075)
    };
    let m = if negative {
        -(mantissa as i128)
    } else {
        mantissa as i128
    };
    // 2^q * l = m * 2^e
    let e = exp + q as i64;
    let v: i128 = if e >= 0 {
        assert!(e < 60, "out of the oracle's range");
        m << e
    } else if -e > 100 {
        // |m * 2^e| < 2^-47, so the half-offset value lies strictly in (0, 1)
        0
    } else {
        let s = (-e) as u32;
        // floor((2m + 2^s) / 2^(s+1))
        (2 * m + (1i128 << s)).div_euclid(1i128 << (s + 1))
    };
    v.clamp(-(s_max as i128), s_max as i128) as i32
}

/// Floating-point sum-product decoder with the same flooding schedule and
/// sign convention (positive favours 1).
pub fn float_bp(h: &SparseParityMatrix, llr: &[f64], iters: usize) -> (Vec<bool>, bool) {
    let rows = h.rows();
    let mut v2c: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| llr[c as usize]).collect())
        .collect();
    let mut c2v = v2c.clone();
    let mut hard: Vec<bool> = llr.iter().map(|&l| l > 0.0).collect();
    let ok = |hard: &[bool]| {
        rows.iter()
            .all(|r| r.iter().filter(|&&c| hard[c as usize]).count() % 2 == 0)
    };
    if ok(&hard) {
        return (hard, true);
    }
    for _ in 0..iters {
        for (r, row) in rows.iter().enumerate() {
            for i in 0..row.len() {
                let mut t = 1.0;
                for j in 0..row.len() {
                    if j != i {
                        t *= (-v2c[r][j] / 2.0).tanh();
                    }
                }
                let t: f64 = t.clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                c2v[r][i] = -2.0 * t.atanh();
            }
        }
        let mut total = llr.to_vec();
        for (r, row) in rows.iter().enumerate() {
            for (i, &c) in row.iter().enumerate() {
                total[c as usize] += c2v[r][i];
            }
        }
        for (r, row) in rows.iter().enumerate() {
            for (i, &c) in row.iter().enumerate() {
                v2c[r][i] = (total[c as usize] - c2v[r][i]).clamp(-1250.0, 1250.0);
            }
        }
        hard = total.iter().map(|&t| t > 0.0).collect();
        if ok(&hard) {
            return (hard, true);
        }
    }
    (hard, false)
}

/// Upper tail `P[Bin(n, 1/2) >= wins]` by direct summation in log space.
pub fn sign_test_tail(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    (wins..=n)
        .map(|i| (ln_fact(n) - ln_fact(i) - ln_fact(n - i) - n as f64 * std::f64::consts::LN_2).exp())
        .sum()
}
