use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use super::ensemble::{
    homogeneous_detuning, inhomogeneous_detuning, rotate_x, rotate_z, step_count, Dynamics,
    SpinEnsembleState,
};
use super::grid::EnergyClassGrid;
use crate::physics::RateSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseModel {
    /// Ideal instantaneous π/2 rotations about x.
    Instantaneous,
    /// Square resonant pulses of the given duration (s). Exchange and collisions
    /// act during the pulse; the detuning does not.
    Finite { duration: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyConfig {
    /// Free evolution between the pulses, s.
    pub interrogation_time: f64,
    /// Synthesizer frequency minus the zero-field hyperfine reference, Hz.
    pub mw_detuning: f64,
    pub pulse_model: PulseModel,
    pub rates: RateSet,
    /// Maximum RK4 step, s.
    pub dt: f64,
}

impl RamseyConfig {
    pub fn new(rates: RateSet, mw_detuning: f64, dt: f64) -> Self {
        RamseyConfig {
            interrogation_time: 0.0,
            mw_detuning,
            pulse_model: PulseModel::Instantaneous,
            rates,
            dt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        if !(self.interrogation_time >= 0.0 && self.interrogation_time.is_finite()) {
            return Err(Error::invalid("interrogation_time", "must be non-negative"));
        }
        if !self.mw_detuning.is_finite() {
            return Err(Error::invalid("mw_detuning", "must be finite"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if let PulseModel::Finite { duration } = self.pulse_model {
            if !(duration > 0.0 && duration.is_finite()) {
                return Err(Error::invalid("pulse duration", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Population transfer, contrast and phase versus interrogation time.
#[derive(Debug, Clone, PartialEq)]
pub struct RamseyRecord {
    /// s
    pub times: Vec<f64>,
    /// P = N↑/(N↑ + N↓) after the second pulse.
    pub transfer: Vec<f64>,
    /// 2|S̄_⊥| before the second pulse.
    pub contrast: Vec<f64>,
    /// atan2(S̄_y, S̄_x) before the second pulse, rad.
    pub phase: Vec<f64>,
    pub config: RamseyConfig,
}

impl RamseyRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Free evolution runs in the frame rotating at the homogeneous detuning, which
/// commutes with every term of the equations of motion. The frame rotation is
/// applied exactly when reading out, so only the inhomogeneous detunings limit
/// the step size.
struct Sequence<'a> {
    config: &'a RamseyConfig,
    free: Dynamics<'a>,
    homogeneous: f64,
}

impl<'a> Sequence<'a> {
    fn new(config: &'a RamseyConfig, grid: &'a EnergyClassGrid) -> Result<Self> {
        config.validate()?;
        let free = Dynamics {
            weights: grid.weights(),
            detunings: grid
                .epsilons()
                .iter()
                .map(|&e| inhomogeneous_detuning(e, &config.rates))
                .collect(),
            omega_ex: config.rates.omega_ex,
            gamma_c: config.rates.gamma_c,
            rabi: 0.0,
        };
        super::ensemble::check_step(config.dt, free.max_rate())?;
        Ok(Sequence {
            config,
            free,
            homogeneous: homogeneous_detuning(&config.rates, config.mw_detuning),
        })
    }

    fn pulse(&self, state: &mut SpinEnsembleState) -> Result<()> {
        match self.config.pulse_model {
            PulseModel::Instantaneous => state.rotate_x(PI / 2.0),
            PulseModel::Finite { duration } => {
                let drive = Dynamics {
                    weights: self.free.weights,
                    detunings: alloc::vec![0.0; state.spins.len()],
                    omega_ex: self.free.omega_ex,
                    gamma_c: self.free.gamma_c,
                    rabi: PI / (2.0 * duration),
                };
                // resolve the Rabi rotation finely regardless of the free-evolution step
                let dt = (duration / 50.0).min(self.config.dt);
                drive.advance(&mut state.spins, duration, dt)?;
                state.time += duration;
            }
        }
        Ok(())
    }

    /// Readout at free-evolution time `t` from the rotating-frame state.
    fn read(&self, state: &SpinEnsembleState, t: f64) -> Result<(f64, f64, f64)> {
        let (s, c) = (self.homogeneous * t).sin_cos();
        let mean = rotate_z(&state.mean_spin(), s, c);
        let contrast = (2.0 * mean.x.hypot(mean.y)).min(1.0);
        let phase = mean.y.atan2(mean.x);
        let after = match self.config.pulse_model {
            PulseModel::Instantaneous => rotate_x(&mean, 1.0, 0.0),
            PulseModel::Finite { .. } => {
                let mut lab = state.clone();
                lab.rotate_z(self.homogeneous * t);
                self.pulse(&mut lab)?;
                lab.mean_spin()
            }
        };
        let transfer = (0.5 + after.z).clamp(0.0, 1.0);
        Ok((transfer, contrast, phase))
    }

    fn prepared(&self, grid: &EnergyClassGrid) -> Result<SpinEnsembleState> {
        let mut state = SpinEnsembleState::ground(grid.clone());
        self.pulse(&mut state)?;
        state.time = 0.0;
        Ok(state)
    }
}

/// Population of |↑⟩ after a full Ramsey sequence starting from |↓⟩.
pub fn ramsey_sequence(config: &RamseyConfig, grid: &EnergyClassGrid) -> Result<f64> {
    let seq = Sequence::new(config, grid)?;
    let mut state = seq.prepared(grid)?;
    seq.free
        .advance(&mut state.spins, config.interrogation_time, config.dt)?;
    Ok(seq.read(&state, config.interrogation_time)?.0)
}

/// Ramsey sequence at each interrogation time in `times` (sorted, ≥ 0).
///
/// The ensemble is evolved once through the sorted times; each sample takes a
/// whole number of steps no longer than `config.dt` from the previous one.
pub fn ramsey_scan(
    template: &RamseyConfig,
    times: &[f64],
    grid: &EnergyClassGrid,
) -> Result<RamseyRecord> {
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::invalid("times", "must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("times", "must be sorted"));
    }
    let seq = Sequence::new(template, grid)?;
    let mut state = seq.prepared(grid)?;
    let mut now = 0.0;
    let mut record = RamseyRecord {
        times: times.to_vec(),
        transfer: Vec::with_capacity(times.len()),
        contrast: Vec::with_capacity(times.len()),
        phase: Vec::with_capacity(times.len()),
        config: *template,
    };
    for &t in times {
        let span = t - now;
        let steps = step_count(span, template.dt);
        if steps > 0 {
            seq.free.integrate(&mut state.spins, span / steps as f64, steps);
        }
        now = t;
        let (p, c, phi) = seq.read(&state, t)?;
        record.transfer.push(p);
        record.contrast.push(c);
        record.phase.push(phi);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> EnergyClassGrid {
        EnergyClassGrid::build(60, 14.0).unwrap()
    }

    #[test]
    fn zero_interrogation_is_a_pi_pulse() {
        let r = RateSet::new(3.0, 20.0, 1.0, -7.0).unwrap();
        let mut cfg = RamseyConfig::new(r, 15.0, 1e-4);
        assert_relative_eq!(ramsey_sequence(&cfg, &grid()).unwrap(), 1.0, epsilon = 1e-14);
        let rec = ramsey_scan(&cfg, &[0.0], &grid()).unwrap();
        assert_relative_eq!(rec.transfer[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(rec.contrast[0], 1.0, epsilon = 1e-14);
        cfg.pulse_model = PulseModel::Finite { duration: 100e-6 };
        let p = ramsey_sequence(&cfg, &grid()).unwrap();
        assert!((p - 1.0).abs() < 1e-6, "{p}");
    }

    #[test]
    fn non_interacting_homogeneous_fringe() {
        let r = RateSet::new(0.0, 0.0, 0.0, -7.0).unwrap();
        let mut cfg = RamseyConfig::new(r, 15.0, 1e-3);
        let delta = 2.0 * PI * -22.0;
        for t in [0.01, 0.0227, 0.1, 0.333] {
            cfg.interrogation_time = t;
            let p = ramsey_sequence(&cfg, &grid()).unwrap();
            assert_relative_eq!(p, 0.5 * (1.0 + (delta * t).cos()), epsilon = 1e-12);
        }
    }

    #[test]
    fn finite_pulses_close_to_instantaneous() {
        let r = RateSet::new(2.0, 15.0, 1.0, -7.0).unwrap();
        let mut cfg = RamseyConfig::new(r, 15.0, 2e-4);
        let times: Vec<f64> = (0..20).map(|k| 0.013 * k as f64).collect();
        let ideal = ramsey_scan(&cfg, &times, &grid()).unwrap();
        cfg.pulse_model = PulseModel::Finite { duration: 100e-6 };
        let finite = ramsey_scan(&cfg, &times, &grid()).unwrap();
        for (a, b) in ideal.transfer.iter().zip(&finite.transfer) {
            assert!((a - b).abs() < 5e-3, "{a} {b}");
        }
    }

    #[test]
    fn scan_matches_individual_sequences() {
        let r = RateSet::new(2.0, 15.0, 1.0, -7.0).unwrap();
        let mut cfg = RamseyConfig::new(r, 15.0, 1e-4);
        let times = [0.0, 0.05, 0.12, 0.3];
        let rec = ramsey_scan(&cfg, &times, &grid()).unwrap();
        for (k, &t) in times.iter().enumerate() {
            cfg.interrogation_time = t;
            let p = ramsey_sequence(&cfg, &grid()).unwrap();
            assert!((p - rec.transfer[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_unsorted_times() {
        let r = RateSet::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let cfg = RamseyConfig::new(r, 0.0, 1e-3);
        assert!(ramsey_scan(&cfg, &[0.2, 0.1], &grid()).is_err());
        assert!(ramsey_scan(&cfg, &[-0.1], &grid()).is_err());
    }
}
