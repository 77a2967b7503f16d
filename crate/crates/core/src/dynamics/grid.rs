use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Discretised thermal energy distribution of a 3D harmonic trap.
///
/// Classes sit at the midpoints of `n_classes` equal bins on `[0, epsilon_max]`
/// with weights ∝ ε² e^(−ε) (a gamma distribution of shape 3), normalised on
/// the truncated range.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyClassGrid {
    epsilons: Vec<f64>,
    weights: Vec<f64>,
}

impl EnergyClassGrid {
    pub fn build(n_classes: usize, epsilon_max: f64) -> Result<Self> {
        if n_classes < 2 || !(epsilon_max > 3.0) || !epsilon_max.is_finite() {
            return Err(Error::Resolution {
                n_classes,
                epsilon_max,
            });
        }
        let h = epsilon_max / n_classes as f64;
        let epsilons: Vec<f64> = (0..n_classes).map(|i| (i as f64 + 0.5) * h).collect();
        let raw: Vec<f64> = epsilons.iter().map(|&e| e * e * (-e).exp()).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.into_iter().map(|w| w / total).collect();
        Ok(EnergyClassGrid { epsilons, weights })
    }

    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean_energy(&self) -> f64 {
        self.epsilons.iter().zip(&self.weights).map(|(e, w)| e * w).sum()
    }

    pub fn energy_variance(&self) -> f64 {
        let mean = self.mean_energy();
        self.epsilons
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * (e - mean) * (e - mean))
            .sum()
    }
}
