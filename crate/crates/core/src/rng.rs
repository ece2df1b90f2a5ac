//! Seeded random streams.
//!
//! Every random object in the crate is drawn from a [`ChaCha8Rng`] built from
//! an [`RngConfig`]. Two configs sharing a seed but differing in `stream`
//! produce independent ChaCha streams, so parallel producers can each own one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SketchRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngConfig {
    pub seed: u64,
    pub stream: u64,
}

impl RngConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng(&self) -> SketchRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Derives a child generator from `parent` without sharing state with it.
pub fn fork<R: Rng + ?Sized>(parent: &mut R) -> SketchRng {
    ChaCha8Rng::seed_from_u64(parent.random())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ_and_repeat() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(RngConfig::new(5).rng(), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(RngConfig::new(5).rng(), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..4)
            .map(|_| 0)
            .scan(RngConfig::new(5).with_stream(1).rng(), |r, _| Some(r.random()))
            .collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
