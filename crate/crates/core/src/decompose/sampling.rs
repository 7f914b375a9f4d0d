use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::ComplexMatrix;

/// Stream bases; the `i`-th point of a family is drawn from stream
/// `base + i`, so every point depends only on `(seed, base, i)`.
pub(crate) const FIT_STREAM: u64 = 0;
pub(crate) const HOLDOUT_STREAM: u64 = 1 << 40;
pub(crate) const CHECK_STREAM: u64 = 2 << 40;
pub(crate) const VERIFY_STREAM: u64 = 3 << 40;

/// Independent generator for one counter value.
pub(crate) fn counter_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for the `attempt`-th resample; attempt 0 is the seed itself.
pub(crate) fn attempt_seed(seed: u64, attempt: u64) -> u64 {
    seed ^ attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Points with real and imaginary parts uniform in `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sampler {
    seed: u64,
    half_width: f64,
    h: usize,
    g: usize,
}

impl Sampler {
    pub(crate) fn new(seed: u64, half_width: f64, h: usize, g: usize) -> Self {
        Sampler { seed, half_width, h, g }
    }

    fn matrix(&self, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let b = self.half_width;
        let entries = (0..self.h * self.g)
            .map(|_| Complex64::new(rng.random_range(-b..=b), rng.random_range(-b..=b)))
            .collect();
        ComplexMatrix::new(self.h, self.g, entries).expect("shape matches entry count")
    }

    /// `(Z, W)` for counter `stream`.
    pub(crate) fn point(&self, stream: u64) -> (ComplexMatrix, ComplexMatrix) {
        let mut rng = counter_rng(self.seed, stream);
        let z = self.matrix(&mut rng);
        let w = self.matrix(&mut rng);
        (z, w)
    }

    /// `W` alone for counter `stream`.
    pub(crate) fn w_point(&self, stream: u64) -> ComplexMatrix {
        self.matrix(&mut counter_rng(self.seed, stream))
    }
}
