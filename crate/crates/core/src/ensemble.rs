//! Seeded random band-limited fields.
//!
//! Sample `i` of seed `s` uses ChaCha8 with seed `s` on stream `i`, and draws
//! modes in order `n = 1, 2, ...`, so the low modes of a sample do not
//! depend on the band limit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Complex, GridSpec, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub seed: u64,
    /// Coefficients are scaled by `n^{-decay_exponent}`.
    pub decay_exponent: f64,
    pub amplitude: f64,
    /// When set, each sample is rescaled to this `A^1` norm.
    pub scale_to_a1: Option<f64>,
}

impl EnsembleSpec {
    pub fn new(seed: u64) -> Self {
        EnsembleSpec {
            seed,
            decay_exponent: 3.0,
            amplitude: 1.0,
            scale_to_a1: None,
        }
    }

    /// Sample `index`: `amplitude n^{-decay} (U + iU)` with `U ~ U(-1, 1)`.
    pub fn sample(&self, grid: GridSpec, index: u64) -> Result<SpectralField> {
        if !self.amplitude.is_finite() || !self.decay_exponent.is_finite() {
            return Err(Error::InvalidInput("ensemble parameters must be finite".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let modes: Vec<Complex> = (1..=grid.band_limit())
            .map(|n| {
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                Complex::new(re, im) * (self.amplitude * (n as f64).powf(-self.decay_exponent))
            })
            .collect();
        let f = SpectralField::from_positive_modes(grid, &modes)?;
        match self.scale_to_a1 {
            Some(target) => {
                let a1 = f.wiener(1.0);
                if a1 == 0.0 {
                    Ok(f)
                } else {
                    Ok(f.scale(target / a1))
                }
            }
            None => Ok(f),
        }
    }

    pub fn samples(&self, grid: GridSpec, count: usize) -> Result<Vec<SpectralField>> {
        (0..count as u64).map(|i| self.sample(grid, i)).collect()
    }
}
