//! Deterministic hashing and counter-based random streams.
//!
//! Samplers derive an independent stream per `(seed, walk, epoch, position)`
//! step, so results never depend on thread scheduling and two engines fed
//! the same seed draw identical values.

/// splitmix64 finalizer; also the chunk-head promotion hash.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Small keyed generator for one sampling step.
#[derive(Debug, Clone)]
pub struct StepRng {
    state: u64,
}

impl StepRng {
    pub fn from_key(key: u64) -> Self {
        StepRng { state: mix64(key) }
    }

    /// Keys the stream by walk coordinates. Streams for distinct
    /// `(seed, walk, epoch, position)` tuples are independent.
    pub fn for_step(seed: u64, walk_id: u64, epoch: u64, position: u64) -> Self {
        let mut k = mix64(seed ^ 0xa076_1d64_78bd_642f);
        k = mix64(k ^ walk_id.wrapping_mul(0xe703_7ed1_a0b4_28db));
        k = mix64(k ^ epoch.wrapping_mul(0x8ebc_6af0_9c88_c6e3));
        k = mix64(k ^ position.wrapping_mul(0x5896_27f6_ea86_91e5));
        StepRng { state: k }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform draw below `n` (rejection on the biased low range).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }
}
