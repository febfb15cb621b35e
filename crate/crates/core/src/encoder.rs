//! Staircase encoding: the parity sequence is a running XOR of the
//! systematic row sums, so encoding costs one pass over the ones of `H^X`.

use crate::bits::{Bits, ParityBlock, SourceBlock};
use crate::code::{CodeSpec, SparseParityMatrix};
use crate::LengthMismatch;

/// Compresses `x` to its parity sequence `z` with `H [x, z]^T = 0`.
pub fn encode(h: &SparseParityMatrix, x: &SourceBlock) -> Result<ParityBlock, LengthMismatch> {
    LengthMismatch::check("source block", h.k(), x.len())?;
    let m = h.n_rows();
    let mut z = Bits::repeat(false, m);
    let mut acc = false;
    for i in 0..m {
        for &c in h.systematic_row(i) {
            acc ^= x.0[c as usize];
        }
        z.set(i, acc);
    }
    Ok(ParityBlock(z))
}

/// Concatenates `x` and `z` into the full codeword `[x, z]`.
pub fn codeword(x: &SourceBlock, z: &ParityBlock) -> Bits {
    let mut c = x.0.clone();
    c.extend_from_bitslice(&z.0);
    c
}

/// Compression rate of the source encoder, `(n - k) / k`.
pub fn compression_rate(spec: &CodeSpec) -> f64 {
    (spec.n - spec.k) as f64 / spec.k as f64
}
