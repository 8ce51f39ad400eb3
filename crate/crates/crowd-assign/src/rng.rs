//! Portable, fixed pseudo-random generator for reproducible instances.
//!
//! Instance generation and trial seeding must be byte-identical across
//! platforms and reimplementations, so the generator is pinned here rather
//! than delegated to a library whose stream may change between versions:
//!
//! * seeding and seed mixing use the SplitMix64 finalizer
//!   (Steele, Lea, Flood 2014),
//! * the stream is xoshiro256** (Blackman, Vigna 2018) seeded from four
//!   consecutive SplitMix64 outputs,
//! * bounded integers use Lemire's multiply-with-rejection method,
//! * floats take the top 53 bits of one output,
//! * shuffles are backward Fisher-Yates.
//!
//! Any change to one of these rules invalidates golden instance files.

/// SplitMix64 stream. Used for seeding xoshiro and for deriving sub-seeds.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Derives a sub-seed from a base seed and a list of salts (e.g. the R value
/// and trial index of a sweep trial), so any single trial can be reproduced
/// in isolation. Each salt is absorbed through one SplitMix64 step.
pub fn mix_seed(base: u64, salts: &[u64]) -> u64 {
    let mut acc = base;
    for &salt in salts {
        let mut sm = SplitMix64::new(acc ^ salt.wrapping_mul(0xA24B_AED4_963E_E407));
        acc = sm.next_u64();
    }
    acc
}

/// xoshiro256** stream with SplitMix64 seeding.
#[derive(Debug, Clone)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        Self {
            s: [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform integer in `[0, bound)`. `bound` must be nonzero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "next_below requires a positive bound");
        // Lemire 2019: widening multiply, reject the biased low slice.
        let mut x = self.next_u64();
        let mut m = (x as u128) * (bound as u128);
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128) * (bound as u128);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// In-place Fisher-Yates shuffle, iterating from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
