use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

use super::grid::EnergyClassGrid;
use crate::physics::RateSet;
use crate::{Error, Result};

/// Thermal mean of ε for a 3D harmonic trap.
pub const MEAN_THERMAL_ENERGY: f64 = 3.0;

/// Upper bound on `dt · max(|δ_i|, ω_ex, γ_c)` accepted by the integrator.
pub const MAX_STEP_PRODUCT: f64 = 0.1;

/// Detuning of one energy class, rad/s.
///
/// The inhomogeneous part Δ₀(ε − 3) has zero thermal mean; its spread is set by
/// Δ₀ per unit of ε.
pub fn class_detuning(epsilon: f64, rates: &RateSet, mw_detuning: f64) -> f64 {
    homogeneous_detuning(rates, mw_detuning) + inhomogeneous_detuning(epsilon, rates)
}

pub(crate) fn homogeneous_detuning(rates: &RateSet, mw_detuning: f64) -> f64 {
    2.0 * PI * (rates.mean_shift - mw_detuning)
}

pub(crate) fn inhomogeneous_detuning(epsilon: f64, rates: &RateSet) -> f64 {
    rates.delta0 * (epsilon - MEAN_THERMAL_ENERGY)
}

/// One Bloch vector per energy class.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinEnsembleState {
    pub grid: EnergyClassGrid,
    pub spins: Vec<Vector3<f64>>,
    /// s
    pub time: f64,
}

impl SpinEnsembleState {
    /// Every class in the same state.
    pub fn uniform(grid: EnergyClassGrid, spin: Vector3<f64>) -> Self {
        let spins = vec![spin; grid.len()];
        SpinEnsembleState {
            grid,
            spins,
            time: 0.0,
        }
    }

    /// All atoms in |↓⟩.
    pub fn ground(grid: EnergyClassGrid) -> Self {
        Self::uniform(grid, Vector3::new(0.0, 0.0, -0.5))
    }

    pub fn mean_spin(&self) -> Vector3<f64> {
        weighted_mean(self.grid.weights(), &self.spins)
    }

    /// Twice the transverse length of the mean spin.
    pub fn contrast(&self) -> f64 {
        let s = self.mean_spin();
        2.0 * s.x.hypot(s.y)
    }

    /// Rotates every spin about x by `angle`.
    pub fn rotate_x(&mut self, angle: f64) {
        let (s, c) = angle.sin_cos();
        for v in &mut self.spins {
            *v = rotate_x(v, s, c);
        }
    }

    pub(crate) fn rotate_z(&mut self, angle: f64) {
        let (s, c) = angle.sin_cos();
        for v in &mut self.spins {
            *v = rotate_z(v, s, c);
        }
    }
}

pub(crate) fn rotate_x(v: &Vector3<f64>, s: f64, c: f64) -> Vector3<f64> {
    Vector3::new(v.x, c * v.y - s * v.z, s * v.y + c * v.z)
}

pub(crate) fn rotate_z(v: &Vector3<f64>, s: f64, c: f64) -> Vector3<f64> {
    Vector3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

fn weighted_mean(weights: &[f64], spins: &[Vector3<f64>]) -> Vector3<f64> {
    weights
        .iter()
        .zip(spins)
        .fold(Vector3::zeros(), |acc, (w, s)| acc + s * *w)
}

/// Right-hand side of the class equations with a fixed detuning per class and
/// an optional resonant drive about x.
pub(crate) struct Dynamics<'a> {
    pub weights: &'a [f64],
    pub detunings: Vec<f64>,
    pub omega_ex: f64,
    pub gamma_c: f64,
    pub rabi: f64,
}

impl Dynamics<'_> {
    pub fn max_rate(&self) -> f64 {
        let det = self.detunings.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        det.max(self.omega_ex).max(self.gamma_c).max(self.rabi.abs())
    }

    fn derivative(&self, spins: &[Vector3<f64>], out: &mut [Vector3<f64>]) {
        let mean = weighted_mean(self.weights, spins);
        let exchange = mean * self.omega_ex;
        for ((o, s), d) in out.iter_mut().zip(spins).zip(&self.detunings) {
            let field = Vector3::new(self.rabi, 0.0, *d) + exchange;
            *o = field.cross(s) + (mean - s) * self.gamma_c;
        }
    }

    /// `steps` RK4 steps of size `h`. S̄ is recomputed in every stage.
    pub fn integrate(&self, spins: &mut [Vector3<f64>], h: f64, steps: usize) {
        let n = spins.len();
        let mut k1 = vec![Vector3::zeros(); n];
        let mut k2 = vec![Vector3::zeros(); n];
        let mut k3 = vec![Vector3::zeros(); n];
        let mut k4 = vec![Vector3::zeros(); n];
        let mut tmp = vec![Vector3::zeros(); n];
        for _ in 0..steps {
            self.derivative(spins, &mut k1);
            for i in 0..n {
                tmp[i] = spins[i] + k1[i] * (0.5 * h);
            }
            self.derivative(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = spins[i] + k2[i] * (0.5 * h);
            }
            self.derivative(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = spins[i] + k3[i] * h;
            }
            self.derivative(&tmp, &mut k4);
            for i in 0..n {
                spins[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
        }
    }

    /// Advances `spins` by `duration` with steps no longer than `dt`.
    pub fn advance(&self, spins: &mut [Vector3<f64>], duration: f64, dt: f64) -> Result<()> {
        check_step(dt, self.max_rate())?;
        let steps = step_count(duration, dt);
        if steps > 0 {
            self.integrate(spins, duration / steps as f64, steps);
        }
        Ok(())
    }
}

pub(crate) fn step_count(duration: f64, dt: f64) -> usize {
    if duration <= 0.0 {
        return 0;
    }
    // tolerate durations that are an integer multiple of dt up to rounding
    let n = duration / dt;
    let rounded = n.round();
    if (n - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded.max(1.0) as usize
    } else {
        n.ceil() as usize
    }
}

pub(crate) fn check_step(dt: f64, max_rate: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    let product = dt * max_rate;
    if !(product < MAX_STEP_PRODUCT) {
        return Err(Error::StepSize {
            dt,
            product,
            limit: MAX_STEP_PRODUCT,
        });
    }
    Ok(())
}

/// `dt · max(|δ_i|, ω_ex, γ_c)` for the lab-frame equations on `grid`.
pub fn max_step_product(grid: &EnergyClassGrid, rates: &RateSet, mw_detuning: f64, dt: f64) -> f64 {
    let det = grid
        .epsilons()
        .iter()
        .fold(0.0f64, |m, &e| m.max(class_detuning(e, rates, mw_detuning).abs()));
    dt * det.max(rates.omega_ex).max(rates.gamma_c)
}

/// Advances `state` by `duration` in the lab frame with fixed-step RK4.
///
/// The step actually taken is `duration / ceil(duration / dt)`, never longer
/// than `dt`.
pub fn evolve(
    state: &SpinEnsembleState,
    duration: f64,
    dt: f64,
    rates: &RateSet,
    mw_detuning: f64,
) -> Result<SpinEnsembleState> {
    rates.validate()?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", "must be non-negative"));
    }
    if dt > duration && duration > 0.0 {
        return Err(Error::invalid("dt", "must not exceed the duration"));
    }
    let dynamics = Dynamics {
        weights: state.grid.weights(),
        detunings: state
            .grid
            .epsilons()
            .iter()
            .map(|&e| class_detuning(e, rates, mw_detuning))
            .collect(),
        omega_ex: rates.omega_ex,
        gamma_c: rates.gamma_c,
        rabi: 0.0,
    };
    let mut next = state.clone();
    dynamics.advance(&mut next.spins, duration, dt)?;
    next.time += duration;
    Ok(next)
}

/// The three contributions to dS_i/dt, exposed separately for invariant checks.
pub mod terms {
    use super::*;

    /// δ_i ẑ × S_i
    pub fn precession(detunings: &[f64], spins: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        detunings
            .iter()
            .zip(spins)
            .map(|(d, s)| Vector3::new(0.0, 0.0, *d).cross(s))
            .collect()
    }

    /// ω_ex S̄ × S_i
    pub fn exchange(weights: &[f64], spins: &[Vector3<f64>], omega_ex: f64) -> Vec<Vector3<f64>> {
        let mean = weighted_mean(weights, spins) * omega_ex;
        spins.iter().map(|s| mean.cross(s)).collect()
    }

    /// γ_c (S̄ − S_i)
    pub fn mixing(weights: &[f64], spins: &[Vector3<f64>], gamma_c: f64) -> Vec<Vector3<f64>> {
        let mean = weighted_mean(weights, spins);
        spins.iter().map(|s| (mean - s) * gamma_c).collect()
    }

    /// Σ w_i v_i
    pub fn weighted_sum(weights: &[f64], v: &[Vector3<f64>]) -> Vector3<f64> {
        weighted_mean(weights, v)
    }
}
