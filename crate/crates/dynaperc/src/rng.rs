//! Counter-based random number streams.
//!
//! Every consumer of randomness in this crate owns a [`StreamRng`] derived
//! from a global seed plus a structural key (edge identity, replica index,
//! sample index, ...). Output `i` of a stream is a pure function of
//! `(key, i)`, so results do not depend on the order in which *other*
//! streams are consumed. That is what makes parallel sweeps reproducible:
//! scheduling can interleave replicas arbitrarily without perturbing any
//! draw.

/// SplitMix64 finalizer. Good avalanche, cheap, and stable across platforms.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Folds a sequence of words into a 64-bit key.
#[inline]
pub fn fold_key(seed: u64, parts: &[u64]) -> u64 {
    let mut k = mix64(seed ^ GOLDEN);
    for (i, &p) in parts.iter().enumerate() {
        k = mix64(k ^ p.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN)));
    }
    k
}

/// A counter-based generator: output `i` is `mix64(key + (i+1)*GOLDEN)`,
/// i.e. SplitMix64 seeded at `key`. Streams with distinct keys are
/// independent for all practical purposes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamRng {
    key: u64,
    ctr: u64,
}

impl StreamRng {
    pub fn new(key: u64) -> Self {
        StreamRng { key, ctr: 0 }
    }

    /// Derives a stream from a seed and a structural key path.
    pub fn from_parts(seed: u64, parts: &[u64]) -> Self {
        StreamRng::new(fold_key(seed, parts))
    }

    /// Derives a child stream; the parent's counter does not advance.
    pub fn derive(&self, parts: &[u64]) -> Self {
        StreamRng::from_parts(self.key, parts)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.ctr = self.ctr.wrapping_add(1);
        mix64(self.key.wrapping_add(self.ctr.wrapping_mul(GOLDEN)))
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Exponential with the given rate, by inversion.
    #[inline]
    pub fn exp(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        // 1 - U avoids ln(0).
        -(1.0 - self.uniform()).ln() / rate
    }

    /// Unbiased integer in [0, n) (Lemire's rejection method).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        loop {
            let x = self.next_u64();
            let m = (x as u128).wrapping_mul(n as u128);
            let lo = m as u64;
            if lo >= n || lo >= n.wrapping_neg() % n {
                return (m >> 64) as u64;
            }
        }
    }

    /// Binomial(n, p) by n coin flips; n is small everywhere we use this.
    pub fn binomial(&mut self, n: u32, p: f64) -> u32 {
        (0..n).filter(|_| self.bernoulli(p)).count() as u32
    }
}
