//! Deterministic pseudo-random numbers for `RAND`/`RANDBETWEEN`.
//!
//! The generator is splitmix64. It is deliberately simple and fully
//! specified (see `docs/determinism.md`) so that the numerical reference
//! implementation in [`crate::oracle`] can replay the exact stream the
//! engine consumes: draws advance only when a `RAND`/`RANDBETWEEN` call is
//! actually evaluated, in evaluation order, one draw per output cell.

/// splitmix64 state. Copy-free, seedable from any `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision — the `RAND()` value.
    pub fn rand01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform integer in `[lo, hi]` (inclusive) — the `RANDBETWEEN` value.
    /// Consumes exactly one draw. Callers must ensure `lo <= hi`.
    pub fn randbetween(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as f64;
        let v = lo + (self.rand01() * span).floor() as i64;
        v.min(hi)
    }
}
