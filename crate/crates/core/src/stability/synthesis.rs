use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use super::allan::StabilitySeries;
use crate::{Error, Result};

/// Sinusoidal frequency modulation, e.g. from a temperature-controlled lab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    /// Fractional amplitude.
    pub amplitude: f64,
    /// s
    pub period: f64,
}

/// Shot-series generator: white FM, random-walk FM and an optional periodic term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoiseSynthesis {
    /// σ of the white frequency noise per shot.
    pub white: f64,
    /// σ of the random-walk increment per shot.
    pub random_walk: f64,
    pub modulation: Option<Modulation>,
}

impl NoiseSynthesis {
    pub fn white(sigma: f64) -> Self {
        NoiseSynthesis {
            white: sigma,
            ..Self::default()
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, cycle_time: f64) -> Result<StabilitySeries> {
        if !(self.white >= 0.0 && self.random_walk >= 0.0) {
            return Err(Error::invalid("noise", "σ must be non-negative"));
        }
        let white = Normal::new(0.0, self.white).map_err(|_| Error::invalid("white", "bad σ"))?;
        let walk = Normal::new(0.0, self.random_walk).map_err(|_| Error::invalid("random_walk", "bad σ"))?;
        let mut level = 0.0;
        let mut y = Vec::with_capacity(count);
        for k in 0..count {
            level += walk.sample(rng);
            let mut v = white.sample(rng) + level;
            if let Some(m) = self.modulation {
                v += m.amplitude * (2.0 * PI * k as f64 * cycle_time / m.period).sin();
            }
            y.push(v);
        }
        StabilitySeries::new(y, cycle_time)
    }
}

/// Measured transfer fractions of `shots` projective readouts of `n_atoms`
/// atoms, each in |↑⟩ with probability `p`.
pub fn projection_noise_transfer<R: Rng + ?Sized>(rng: &mut R, n_atoms: u64, p: f64, shots: usize) -> Result<Vec<f64>> {
    if n_atoms == 0 {
        return Err(Error::invalid("n_atoms", "must be positive"));
    }
    let dist = Binomial::new(n_atoms, p).map_err(|_| Error::invalid("p", "must lie in [0, 1]"))?;
    Ok((0..shots).map(|_| dist.sample(rng) as f64 / n_atoms as f64).collect())
}
