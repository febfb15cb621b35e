//! On-disk block formats.
//!
//! Source and side-information files are a concatenation of blocks of
//! `ceil(k / 8)` bytes, bits packed most significant first. A parity stream
//! starts with a 16-byte header followed by blocks of `ceil((n - k) / 8)`
//! bytes:
//!
//! | bytes  | content                                   |
//! |--------|-------------------------------------------|
//! | 0..4   | magic `SWZ1`                              |
//! | 4..8   | `k`, u32 little endian                    |
//! | 8..12  | `n`, u32 little endian                    |
//! | 12..16 | code id: first 4 bytes of SHA-256 of the matrix in alist form, little endian |

use anyhow::{bail, ensure, Context, Result};
use sha2::{Digest, Sha256};
use std::path::Path;
use swldpc::alist::to_alist_string;
use swldpc::bits::{bits_from_bytes_msb, bits_to_bytes_msb, Bits};
use swldpc::SparseParityMatrix;

pub const MAGIC: &[u8; 4] = b"SWZ1";
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParityHeader {
    pub k: u32,
    pub n: u32,
    pub code_id: u32,
}

impl ParityHeader {
    pub fn for_code(h: &SparseParityMatrix) -> Self {
        ParityHeader {
            k: h.k() as u32,
            n: h.n() as u32,
            code_id: code_id(h),
        }
    }

    pub fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(MAGIC);
        out[4..8].copy_from_slice(&self.k.to_le_bytes());
        out[8..12].copy_from_slice(&self.n.to_le_bytes());
        out[12..16].copy_from_slice(&self.code_id.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        ensure!(
            bytes.len() >= HEADER_LEN,
            "parity stream shorter than its {HEADER_LEN}-byte header"
        );
        ensure!(&bytes[..4] == MAGIC, "bad parity stream magic {:?}", &bytes[..4]);
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        Ok(ParityHeader {
            k: word(4),
            n: word(8),
            code_id: word(12),
        })
    }
}

/// Identifies a matrix independently of its metadata.
pub fn code_id(h: &SparseParityMatrix) -> u32 {
    let digest = Sha256::digest(to_alist_string(h, None).as_bytes());
    u32::from_le_bytes(digest[..4].try_into().unwrap())
}

pub fn read_input(path: &Path, hex_text: bool) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if !hex_text {
        return Ok(raw);
    }
    let text: String = String::from_utf8(raw)
        .context("hex input is not UTF-8")?
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    hex::decode(&text).with_context(|| format!("decoding hex in {}", path.display()))
}

/// Splits a byte buffer into blocks of `bits` bits each.
pub fn split_blocks(bytes: &[u8], bits: usize, what: &str) -> Result<Vec<Bits>> {
    let width = bits.div_ceil(8);
    if bytes.is_empty() || !bytes.len().is_multiple_of(width) {
        bail!(
            "{what}: {} bytes is not a whole number of {width}-byte blocks",
            bytes.len()
        );
    }
    Ok(bytes
        .chunks(width)
        .map(|c| bits_from_bytes_msb(c, bits).expect("chunk has block width"))
        .collect())
}

pub fn join_blocks<'a>(blocks: impl IntoIterator<Item = &'a Bits>) -> Vec<u8> {
    blocks.into_iter().flat_map(|b| bits_to_bytes_msb(b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let h = ParityHeader {
            k: 16400,
            n: 22400,
            code_id: 0xdead_beef,
        };
        let bytes = h.to_bytes();
        assert_eq!(&bytes[..4], b"SWZ1");
        assert_eq!(&bytes[4..8], &[0x10, 0x40, 0, 0]);
        assert_eq!(ParityHeader::parse(&bytes).unwrap(), h);
        assert!(ParityHeader::parse(&bytes[..15]).is_err());
    }

    #[test]
    fn blocks_split_and_join() {
        let bytes = [0b1010_0000u8, 0b0100_0000, 0xff, 0x80];
        let blocks = split_blocks(&bytes, 10, "t").unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(
            blocks[0].iter().map(|b| *b as u8).collect::<Vec<_>>(),
            [1, 0, 1, 0, 0, 0, 0, 0, 0, 1]
        );
        assert_eq!(join_blocks(&blocks), bytes);
        assert!(split_blocks(&bytes[..3], 10, "t").is_err());
        assert!(split_blocks(&[], 10, "t").is_err());
    }
}
