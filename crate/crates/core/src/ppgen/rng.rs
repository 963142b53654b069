//! Key-derived (counter-based) random streams.
//!
//! A uniform is a pure function of `(master_seed, purpose, replication,
//! index...)`, so replication `k` can be regenerated in isolation and results
//! never depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Stable key of a vertex inserted for a pivotality query (the `x_0` of the
/// enhancement construction). Sampled vertices use their raw sample order.
pub const INSERTED_ID: u64 = u64::MAX;

/// What a stream is used for. Distinct purposes give independent uniforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    /// Point-process counts and positions.
    Points,
    /// Pair uniforms deciding RCM edges.
    Edges,
    /// Site marks `Y_i`.
    Site,
    /// Enhancement / diminishment marks `Z_i`.
    Enhance,
    /// Up/down designations `W_i`.
    UpDown,
    /// Bond marks `X_e`.
    Bond,
    /// Vertex Bernoulli variables of the site-in-bond coupling.
    CouplingVertex,
    /// Locations of pivotality queries.
    Location,
    /// Free-form sub-streams (tests, auxiliary draws).
    Aux(u64),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Points => 0x01,
            Purpose::Edges => 0x02,
            Purpose::Site => 0x03,
            Purpose::Enhance => 0x04,
            Purpose::UpDown => 0x05,
            Purpose::Bond => 0x06,
            Purpose::CouplingVertex => 0x07,
            Purpose::Location => 0x08,
            Purpose::Aux(k) => 0x100 ^ mix(k),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    master_seed: u64,
    purpose: Purpose,
    replication: u64,
    key: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, word: u64) -> u64 {
    mix(h.wrapping_add(GOLDEN) ^ mix(word.wrapping_add(0x632B_E59B_D9B4_E019)))
}

#[inline]
fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl RngStream {
    pub fn new(master_seed: u64, purpose: Purpose, replication: u64) -> Self {
        let key = absorb(absorb(mix(master_seed ^ 0x5851_F42D_4C95_7F2D), purpose.tag()), replication);
        RngStream {
            master_seed,
            purpose,
            replication,
            key,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn purpose(&self) -> Purpose {
        self.purpose
    }

    pub fn replication(&self) -> u64 {
        self.replication
    }

    /// Same seed and replication, different purpose.
    pub fn with_purpose(&self, purpose: Purpose) -> Self {
        RngStream::new(self.master_seed, purpose, self.replication)
    }

    /// Uniform on `[0, 1)` for a vertex or edge index.
    #[inline]
    pub fn uniform(&self, index: u64) -> f64 {
        to_unit(absorb(self.key, index))
    }

    /// `counter`-th uniform of the sub-sequence attached to `index`.
    #[inline]
    pub fn uniform_at(&self, index: u64, counter: u64) -> f64 {
        to_unit(absorb(absorb(self.key, index), counter))
    }

    /// Uniform keyed by an unordered pair; symmetric in its arguments.
    #[inline]
    pub fn pair_uniform(&self, a: u64, b: u64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        to_unit(absorb(absorb(self.key ^ 0xA5A5_A5A5_A5A5_A5A5, lo), hi))
    }

    /// Sequential generator for draws that are naturally consumed in order
    /// (Poisson counts, positions).
    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut h = self.key;
        for chunk in seed.chunks_mut(8) {
            h = absorb(h, 0xC0FFEE);
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
