//! Packed bit sequences.

use bitvec::prelude::*;

/// Packed bit storage used throughout the crate.
pub type Bits = BitVec<u64, Lsb0>;

/// Builds a packed sequence from 0/1 values. Any non-zero byte counts as 1.
pub fn bits_from_u8s(values: &[u8]) -> Bits {
    values.iter().map(|&v| v != 0).collect()
}

pub fn bits_to_u8s(bits: &BitSlice<u64, Lsb0>) -> Vec<u8> {
    bits.iter().map(|b| *b as u8).collect()
}

/// Unpacks `len` bits from bytes, most significant bit first.
///
/// Returns `None` when `bytes` is not exactly `ceil(len / 8)` long.
pub fn bits_from_bytes_msb(bytes: &[u8], len: usize) -> Option<Bits> {
    if bytes.len() != len.div_ceil(8) {
        return None;
    }
    let view = bytes.view_bits::<Msb0>();
    Some(view[..len].iter().by_vals().collect())
}

/// Packs bits into bytes, most significant bit first, zero padding the tail.
pub fn bits_to_bytes_msb(bits: &BitSlice<u64, Lsb0>) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    let view = out.view_bits_mut::<Msb0>();
    for (i, b) in bits.iter().by_vals().enumerate() {
        view.set(i, b);
    }
    out
}

/// Number of positions where `a` and `b` differ. Panics on length mismatch.
pub fn hamming_distance(a: &BitSlice<u64, Lsb0>, b: &BitSlice<u64, Lsb0>) -> usize {
    assert_eq!(a.len(), b.len(), "hamming distance of unequal lengths");
    let mut diff = a.to_bitvec();
    diff ^= b;
    diff.count_ones()
}

/// The source sequence `X`, `k` bits long.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceBlock(pub Bits);

/// The parity sequence `Z`, `n - k` bits long. This is the compressed form of
/// a [`SourceBlock`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParityBlock(pub Bits);

macro_rules! block_impl {
    ($t:ty) => {
        impl $t {
            pub fn from_u8s(values: &[u8]) -> Self {
                Self(bits_from_u8s(values))
            }

            pub fn zeros(len: usize) -> Self {
                Self(Bits::repeat(false, len))
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn bits(&self) -> &Bits {
                &self.0
            }

            pub fn to_u8s(&self) -> Vec<u8> {
                bits_to_u8s(&self.0)
            }
        }

        impl From<Bits> for $t {
            fn from(b: Bits) -> Self {
                Self(b)
            }
        }
    };
}

block_impl!(SourceBlock);
block_impl!(ParityBlock);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_byte_packing() {
        let bits = bits_from_u8s(&[1, 0, 1, 1, 0, 0, 0, 0, 1]);
        let bytes = bits_to_bytes_msb(&bits);
        assert_eq!(bytes, vec![0b1011_0000, 0b1000_0000]);
        assert_eq!(bits_from_bytes_msb(&bytes, 9).unwrap(), bits);
        assert!(bits_from_bytes_msb(&bytes, 17).is_none());
    }

    #[test]
    fn hamming() {
        let a = bits_from_u8s(&[1, 0, 1, 1]);
        let b = bits_from_u8s(&[0, 0, 1, 0]);
        assert_eq!(hamming_distance(&a, &b), 2);
    }
}
