//! Seeded randomness with checkpointable state.
//!
//! All stochastic behavior in the crate flows through an explicitly seeded
//! ChaCha12 stream so that a (config, seed) pair fully determines every
//! artifact. The stream's position can be captured and restored exactly,
//! which is what makes checkpoints byte-faithful.

use alloc::vec::Vec;

pub use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha12Rng;

/// Exact position of a ChaCha12 stream, sufficient to reconstruct it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSnapshot {
    pub seed: [u8; 32],
    pub word_pos: u128,
    pub stream: u64,
}

impl RngSnapshot {
    pub fn capture(rng: &ChaCha12Rng) -> Self {
        RngSnapshot { seed: rng.get_seed(), word_pos: rng.get_word_pos(), stream: rng.get_stream() }
    }

    pub fn restore(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

/// Sub-stream `index` of the generator seeded with `seed`. Streams are
/// statistically independent, which lets per-class synthesis draw from its
/// own stream regardless of how many values other classes consumed.
pub fn stream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard normal sampler via the Box–Muller transform. Draws come in
/// pairs; the spare is kept so consecutive calls consume uniforms at half
/// rate. Unit variance — callers scale by sigma.
#[derive(Debug, Default, Clone)]
pub struct Gaussian {
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new() -> Self {
        Gaussian { spare: None }
    }

    pub fn sample(&mut self, rng: &mut ChaCha12Rng) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // gen::<f64>() is in [0, 1); flip to (0, 1] so the log is finite.
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

/// In-place Fisher–Yates shuffle, high index down, inclusive partner draw.
pub fn shuffle<T>(rng: &mut ChaCha12Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

/// `n` uniform draws from [lo, hi), in order.
pub fn uniform_vec(rng: &mut ChaCha12Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}
