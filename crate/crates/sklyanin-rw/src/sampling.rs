//! Seeded parameter sampling.
//!
//! The generator is ChaCha8 from `rand_chacha`, seeded with
//! `SeedableRng::seed_from_u64`. Each rational is `p/q` with `p` uniform in
//! `-20..=20` and `q` uniform in `1..=10`; parameters that must be nonzero
//! (`alpha`, `gamma`, `zeta`) are redrawn until they are.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::{ratio, Rat};
use crate::realization::SklyaninParams;

pub const NUM_BOUND: i64 = 20;
pub const DEN_BOUND: i64 = 10;
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha, seed_from_u64)";

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rat(&mut self) -> Rat {
        let p = self.rng.gen_range(-NUM_BOUND..=NUM_BOUND);
        let q = self.rng.gen_range(1..=DEN_BOUND);
        ratio(p, q)
    }

    pub fn nonzero_rat(&mut self) -> Rat {
        loop {
            let r = self.rat();
            if !r.is_zero() {
                return r;
            }
        }
    }

    /// A tuple with `alpha, gamma, zeta != 0`.
    pub fn general(&mut self) -> SklyaninParams {
        let alpha = self.nonzero_rat();
        let beta = self.rat();
        let gamma = self.nonzero_rat();
        let delta = self.rat();
        let epsilon = self.rat();
        let zeta = self.nonzero_rat();
        SklyaninParams::new([alpha, beta, gamma, delta, epsilon, zeta])
    }

    /// A tuple on the locus `beta = delta = epsilon = 0`.
    pub fn locus(&mut self) -> SklyaninParams {
        let alpha = self.nonzero_rat();
        let gamma = self.nonzero_rat();
        let zeta = self.nonzero_rat();
        SklyaninParams::new([alpha, Rat::zero(), gamma, Rat::zero(), Rat::zero(), zeta])
    }

    pub fn many(&mut self, count: usize, locus: bool) -> Vec<SklyaninParams> {
        (0..count)
            .map(|_| if locus { self.locus() } else { self.general() })
            .collect()
    }
}
