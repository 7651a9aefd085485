//! Reproducible random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 generator whose
//! seed is derived from `(seed, purpose tag, index)` by SplitMix64 mixing, so a
//! sub-task (a sampling chunk, a conjecture trial) gets the same stream no
//! matter which worker runs it. Standard normals use the Marsaglia polar
//! method.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 0x5EED_1090_2020;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derives the generator for sub-task `index` of purpose `tag`.
pub fn stream(seed: u64, tag: &str, index: u64) -> StreamRng {
    let h = splitmix64(seed);
    let h = splitmix64(h ^ fnv1a(tag));
    let h = splitmix64(h ^ index);
    ChaCha8Rng::seed_from_u64(h)
}

/// Standard normal source (Marsaglia polar method); keeps the spare deviate.
#[derive(Debug)]
pub struct Gaussian<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> Gaussian<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    pub fn draw(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.rng.gen::<f64>() - 1.0;
            let v = 2.0 * self.rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}
