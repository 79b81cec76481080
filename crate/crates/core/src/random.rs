//! Seeded random streams.
//!
//! Every source of randomness in the model draws from its own ChaCha stream,
//! all derived from one 64-bit seed. Streams share the key and differ only in
//! the ChaCha stream id, so consuming from one never shifts another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Substream {
    /// Multiplicative production noise.
    Production,
    /// Initial pesticide dispersion.
    InitPesticide,
    /// Initial yield dispersion.
    InitYield,
    /// Initial farm size sampling.
    InitLand,
    /// Bernoulli trials of technology adoption.
    Adoption,
    /// Efficiency increments after successful adoption.
    EfficiencyGain,
}

impl Substream {
    const ALL: [Substream; 6] = [
        Substream::Production,
        Substream::InitPesticide,
        Substream::InitYield,
        Substream::InitLand,
        Substream::Adoption,
        Substream::EfficiencyGain,
    ];

    fn stream_id(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rngs: [ChaCha12Rng; 6],
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        let rngs = Substream::ALL.map(|s| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(s.stream_id());
            rng
        });
        RandomStream { seed, rngs }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&mut self, which: Substream) -> &mut ChaCha12Rng {
        &mut self.rngs[which as usize]
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self, which: Substream) -> f64 {
        self.rng(which).random::<f64>()
    }

    pub fn standard_normal(&mut self, which: Substream) -> f64 {
        self.rng(which).sample(StandardNormal)
    }

    pub fn bernoulli(&mut self, which: Substream, p: f64) -> bool {
        // Always consumes one draw so the stream position does not depend on p.
        let u = self.uniform(which);
        u < p
    }
}
