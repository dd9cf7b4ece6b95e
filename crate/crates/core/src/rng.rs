//! Seeded, portable random source.
//!
//! Every stream is a ChaCha8 generator keyed by `seed_from_u64(seed)` with
//! the ChaCha stream id set to the trial index, so trial `t` of a suite run
//! with seed `s` always sees the same numbers regardless of scheduling.
//!
//! Uniforms take the top 53 bits of one `u64`. Standard normals use the
//! cosine branch of Box–Muller and consume exactly two `u64` draws each.
//! Complex normals draw the real part first, then the imaginary part, each
//! scaled by `1/sqrt(2)` so that `E|z|^2 = 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        StreamRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi);
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.normal();
        let im = self.normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn complex_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<Complex64> {
        // row-major draw order
        let mut m = DMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = self.complex_normal();
            }
        }
        m
    }
}
