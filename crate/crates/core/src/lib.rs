//! Slepian-Wolf compression of a binary source with systematic staircase
//! LDPC codes.
//!
//! The encoder keeps only the parity part `Z` of the codeword `[X, Z]`. The
//! decoder recovers `X` from `Z` and correlated side information `Y` with an
//! integer belief-propagation decoder wrapped in a loop that re-estimates the
//! crossover probability between `X` and `Y` after every decoding pass.
//!
//! Module map:
//!
//! * [`code`]: parity-check matrices, the code registry and PEG construction
//! * [`alist`]: alist serialization
//! * [`encoder`]: linear-time staircase encoding
//! * [`bp`]: quantized-LLR belief propagation
//! * [`joint`]: global/local iterative decoding with correlation estimation
//! * [`source`]: correlated source generation and entropy yardsticks
//! * [`sweep`]: Monte-Carlo sweeps and report emission

pub mod alist;
pub mod bits;
pub mod bp;
pub mod code;
pub mod encoder;
pub mod joint;
pub mod source;
pub mod sweep;

pub use bits::{Bits, ParityBlock, SourceBlock};
pub use bp::{BpConfig, BpDecoder, CheckKernel, DecodeOutcome, LlrqVector};
pub use code::{CodeSpec, SparseParityMatrix};
pub use joint::{CorrelationState, JointConfig, JointDecodeResult, JointDecoder};
pub use source::{CorrelationConfig, FramePair};

/// Raised when an operation is handed inputs whose lengths disagree with the
/// code they are used with.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{what}: expected length {expected}, got {actual}")]
pub struct LengthMismatch {
    pub what: &'static str,
    pub expected: usize,
    pub actual: usize,
}

impl LengthMismatch {
    pub(crate) fn check(what: &'static str, expected: usize, actual: usize) -> Result<(), Self> {
        if expected == actual {
            Ok(())
        } else {
            Err(LengthMismatch {
                what,
                expected,
                actual,
            })
        }
    }
}
