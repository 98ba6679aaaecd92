//! Seedable, splittable randomness. Every randomized operation in the crate
//! takes an explicit stream; sub-streams are derived by id, not by draw order,
//! so parallel experiments stay reproducible no matter how work is scheduled.

use crate::matrix::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub struct RngStream {
    chacha: ChaCha8Rng,
    seed: u64,
    stream_id: u64,
}

pub fn seeded_rng(seed: u64) -> RngStream {
    RngStream::with_stream(seed, 0)
}

// splitmix64 finalizer: decorrelates nearby stream ids
fn mix(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl RngStream {
    fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut chacha = ChaCha8Rng::seed_from_u64(seed);
        chacha.set_stream(stream_id);
        RngStream { chacha, seed, stream_id }
    }

    /// Child stream `id`. Depends only on (seed, parent stream id, id), never
    /// on how many values have been drawn, and never collides with the parent:
    /// the underlying generator keys disjoint 2^64-block counter ranges per
    /// stream id.
    pub fn derive(&self, id: u64) -> RngStream {
        Self::with_stream(self.seed, mix(self.stream_id ^ mix(id)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// uniform on [0, 1)
    pub fn uniform(&mut self) -> f64 {
        self.chacha.gen::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// standard normal
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.chacha)
    }

    /// complex with independent standard-normal parts
    pub fn normal_c(&mut self) -> C64 {
        C64::new(self.normal(), self.normal())
    }

    /// uniform integer in [0, n)
    pub fn below(&mut self, n: usize) -> usize {
        self.chacha.gen_range(0..n)
    }
}
