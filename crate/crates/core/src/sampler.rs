//! Seeded sampling of spectral and model parameters.

use crate::params::ModelParams;
use crate::tensor_core::{c, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn box_draw(&mut self, re: (f64, f64), im: (f64, f64)) -> C64 {
        c(self.rng.gen_range(re.0..re.1), self.rng.gen_range(im.0..im.1))
    }

    /// Spectral parameter in [−1.5, 1.5] + i[−0.8, 0.8], kept 1e-3 away from ±iμ.
    pub fn lambda(&mut self, p: &ModelParams) -> C64 {
        loop {
            let l = self.box_draw((-1.5, 1.5), (-0.8, 0.8));
            let im = c(0.0, 1.0) * p.mu;
            if (l - im).norm() > 1e-3 && (l + im).norm() > 1e-3 && l.norm() > 1e-3 {
                return l;
            }
        }
    }

    /// Spectral parameter in a smaller box, for long operator products.
    pub fn lambda_small(&mut self, p: &ModelParams) -> C64 {
        loop {
            let l = self.box_draw((-0.8, 0.8), (-0.5, 0.5));
            let im = c(0.0, 1.0) * p.mu;
            if (l - im).norm() > 1e-2 && (l + im).norm() > 1e-2 && l.norm() > 1e-2 {
                return l;
            }
        }
    }

    /// Generic (μ, m, ζ) for the given rank and size, rejecting invalid draws.
    pub fn params(&mut self, n: usize, sites: usize) -> ModelParams {
        loop {
            let mu = self.box_draw((0.15, 1.2), (-0.1, 0.1));
            let m = self.box_draw((0.3, 2.0), (-0.5, 0.5));
            let zeta = self.box_draw((0.3, 2.0), (-0.5, 0.5));
            if let Ok(p) = ModelParams::new(n, mu, m, zeta, sites) {
                if p.validate_hamiltonian().is_ok() {
                    return p;
                }
            }
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}
