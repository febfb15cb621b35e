//! Correlated binary sources and entropy yardsticks.
//!
//! `X` is i.i.d. uniform and `Y = X xor E`, where `E` is i.i.d. Bernoulli
//! with a crossover probability drawn once per block, uniformly within
//! `delta_p` of the mean. Random numbers come from ChaCha8 seeded through
//! `seed_from_u64`, which gives the same streams on every platform.

use crate::bits::{Bits, SourceBlock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid correlation config: {0}")]
pub struct ConfigError(String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationConfig {
    pub mean_p: f64,
    /// Largest absolute deviation of the per-block crossover probability
    /// from `mean_p` (0.005 for a 0.5% variation).
    pub delta_p: f64,
    pub seed: u64,
}

impl CorrelationConfig {
    pub fn new(mean_p: f64, delta_p: f64, seed: u64) -> Result<Self, ConfigError> {
        let cfg = CorrelationConfig {
            mean_p,
            delta_p,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let CorrelationConfig { mean_p, delta_p, .. } = *self;
        if !(mean_p > 0.0 && mean_p < 0.5) {
            return Err(ConfigError(format!("mean_p must lie in (0, 0.5), got {mean_p}")));
        }
        if !(delta_p >= 0.0) {
            return Err(ConfigError(format!("delta_p must be >= 0, got {delta_p}")));
        }
        if mean_p + delta_p >= 0.5 {
            return Err(ConfigError(format!(
                "mean_p + delta_p must stay below 0.5, got {}",
                mean_p + delta_p
            )));
        }
        if delta_p > mean_p {
            return Err(ConfigError(format!(
                "delta_p {delta_p} would allow a negative crossover probability"
            )));
        }
        Ok(())
    }
}

/// A source block, its side information and the crossover probability used
/// to produce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePair {
    #[serde(with = "bits_serde")]
    pub x: Bits,
    #[serde(with = "bits_serde")]
    pub y: Bits,
    pub actual_p: f64,
}

impl FramePair {
    pub fn source(&self) -> SourceBlock {
        SourceBlock(self.x.clone())
    }

    /// Fraction of positions where `x` and `y` differ.
    pub fn flip_fraction(&self) -> f64 {
        crate::bits::hamming_distance(&self.x, &self.y) as f64 / self.x.len() as f64
    }
}

mod bits_serde {
    use super::Bits;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &Bits, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(b.iter().map(|v| *v as u8))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Bits, D::Error> {
        let v = Vec::<u8>::deserialize(d)?;
        Ok(v.into_iter().map(|b| b != 0).collect())
    }
}

/// Generates one pair from `cfg.seed`.
pub fn generate_pair(k: usize, cfg: &CorrelationConfig) -> Result<FramePair, ConfigError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(generate_pair_with(k, cfg.mean_p, cfg.delta_p, &mut rng))
}

/// Generates one pair from an existing generator. Parameters are assumed
/// valid.
pub fn generate_pair_with<R: Rng + ?Sized>(k: usize, mean_p: f64, delta_p: f64, rng: &mut R) -> FramePair {
    let actual_p = if delta_p > 0.0 {
        rng.random_range(mean_p - delta_p..=mean_p + delta_p)
    } else {
        mean_p
    };
    let mut x: Bits = Bits::from_vec((0..k.div_ceil(64)).map(|_| rng.random::<u64>()).collect());
    x.truncate(k);
    let mut y = x.clone();
    for j in 0..k {
        if rng.random_bool(actual_p) {
            let v = !y[j];
            y.set(j, v);
        }
    }
    FramePair { x, y, actual_p }
}

/// Seed for item `index` of stream `stream` under a master seed. SplitMix64
/// finalizer over the combined inputs.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Frame `index` of a simulation with master config `cfg`.
pub fn generate_frame(k: usize, cfg: &CorrelationConfig, index: u64) -> Result<FramePair, ConfigError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0, index));
    Ok(generate_pair_with(k, cfg.mean_p, cfg.delta_p, &mut rng))
}

/// `H(p)` in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.log2() };
    term(p) + term(1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwLimits {
    /// `H(X|Y) = H(p)`, the least rate for `X` with `Y` known.
    pub h_x_given_y: f64,
    /// `H(X, Y) = 1 + H(p)` for a uniform source sent at `R_Y = 1`.
    pub joint: f64,
}

pub fn sw_limits(p: f64) -> SwLimits {
    let h = binary_entropy(p);
    SwLimits {
        h_x_given_y: h,
        joint: 1.0 + h,
    }
}
