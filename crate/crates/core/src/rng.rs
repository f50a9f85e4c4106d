//! Counter-based random streams.
//!
//! A stream is a 64-bit key; draw `i` is a pure function of `(key, i)`, so any
//! draw can be recomputed without replaying the ones before it. Streams for
//! shots and tomography settings are derived from the user seed by mixing in
//! the shot or setting index.

/// Recorded in I/O log headers so logs name the generator that produced them.
pub const ALGORITHM: &str = "splitmix64-counter-v1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            key: mix64(seed ^ 0x6A09_E667_F3BC_C908),
        }
    }

    /// Independent child stream for `label` (a shot or setting index).
    pub fn derive(&self, label: u64) -> Self {
        CounterRng {
            key: mix64(self.key ^ mix64(label.wrapping_add(1).wrapping_mul(GOLDEN))),
        }
    }

    pub fn u64_at(&self, index: u64) -> u64 {
        mix64(self.key.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    pub fn uniform(&self, index: u64) -> f64 {
        (self.u64_at(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Stream used by shot `shot` of a run seeded with `seed`. Interactive
/// sessions use shot 0.
pub fn shot_stream(seed: u64, shot: u64) -> CounterRng {
    CounterRng::new(seed).derive(shot)
}

/// Index of the first entry of the cumulative distribution exceeding `u`.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the final partial sum: take the last non-zero entry
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}
