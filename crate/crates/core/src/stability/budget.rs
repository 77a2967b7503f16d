use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::conversion::{p_to_frequency, qpn_limit};
use crate::analysis::FringeFit;
use crate::physics::{
    density_sensitivity, intensity_sensitivity, magnetic_sensitivity, temperature_sensitivity, PhysicalParams,
};
use crate::{Error, Result};

/// One technical noise source: a shot-to-shot fluctuation of some physical
/// quantity and the transition-frequency response to it.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSource {
    pub name: String,
    /// Shot-to-shot level in the source's own unit.
    pub shot_level: f64,
    /// Hz per unit of `shot_level`.
    pub sensitivity: Option<f64>,
}

impl NoiseSource {
    pub fn new(name: impl Into<String>, shot_level: f64, sensitivity: f64) -> Self {
        NoiseSource {
            name: name.into(),
            shot_level,
            sensitivity: Some(sensitivity),
        }
    }

    /// σ_y at one shot, |sensitivity·level|/ν₀.
    pub fn fractional(&self, nu0: f64) -> Result<f64> {
        let s = self
            .sensitivity
            .ok_or_else(|| Error::MissingSensitivity(self.name.clone()))?;
        if !s.is_finite() || !self.shot_level.is_finite() {
            return Err(Error::invalid("noise source", "level and sensitivity must be finite"));
        }
        Ok((s * self.shot_level).abs() / nu0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpnInputs {
    pub n_atoms: f64,
    /// s
    pub interrogation: f64,
    /// s
    pub cycle_time: f64,
    pub contrast: f64,
    /// Hz
    pub nu0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetEntry {
    pub name: String,
    pub one_shot: f64,
    pub one_second: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub entries: Vec<BudgetEntry>,
    /// Root-sum-square of all entries.
    pub total_one_shot: f64,
    pub total_one_second: f64,
    /// Projection-noise floor, reported separately and not part of the total.
    pub qpn_one_shot: f64,
    pub qpn_one_second: f64,
    pub cycle_time: f64,
}

/// Per-source and total σ_y. Values at τ = 1 s assume white frequency noise,
/// σ_y(1 s) = σ_y(shot)·√T_c.
pub fn noise_budget(sources: &[NoiseSource], qpn: &QpnInputs) -> Result<BudgetReport> {
    let qpn_one_second = qpn_limit(qpn.n_atoms, qpn.interrogation, qpn.cycle_time, qpn.contrast, qpn.nu0)?;
    let root_tc = qpn.cycle_time.sqrt();
    let entries = sources
        .iter()
        .map(|s| {
            let one_shot = s.fractional(qpn.nu0)?;
            Ok(BudgetEntry {
                name: s.name.clone(),
                one_shot,
                one_second: one_shot * root_tc,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total_one_shot = entries.iter().map(|e| e.one_shot * e.one_shot).sum::<f64>().sqrt();
    debug_assert!(entries.iter().all(|e| e.one_shot <= total_one_shot * (1.0 + 1e-12)));
    Ok(BudgetReport {
        entries,
        total_one_shot,
        total_one_second: total_one_shot * root_tc,
        qpn_one_shot: qpn_one_second / root_tc,
        qpn_one_second,
        cycle_time: qpn.cycle_time,
    })
}

/// Shot-to-shot levels of the seven technical sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetLevels {
    /// Relative intensity.
    pub intensity: f64,
    /// Beam pointing, m.
    pub pointing: f64,
    /// Beam waist converting pointing into intensity, m.
    pub beam_waist: f64,
    /// G
    pub magnetic_field: f64,
    /// Relative density.
    pub density: f64,
    /// K
    pub temperature: f64,
    /// Absolute population transfer.
    pub detection: f64,
    /// Fractional frequency of the reference at one cycle.
    pub maser: f64,
}

/// Operating point and noise levels for one budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetScenario {
    pub params: PhysicalParams,
    pub levels: BudgetLevels,
    /// s
    pub interrogation: f64,
    /// s
    pub cycle_time: f64,
    pub contrast: f64,
    pub n_atoms: f64,
}

impl BudgetScenario {
    pub fn qpn(&self) -> QpnInputs {
        QpnInputs {
            n_atoms: self.n_atoms,
            interrogation: self.interrogation,
            cycle_time: self.cycle_time,
            contrast: self.contrast,
            nu0: self.params.species.hyperfine_frequency,
        }
    }
}

/// The seven sources with sensitivities from the operating point.
///
/// Pointing enters as a relative intensity change (Δx/w)², the curvature of a
/// Gaussian beam profile at its centre; this is an approximation. Detection
/// noise is converted through the mid-fringe slope.
pub fn standard_sources(scenario: &BudgetScenario) -> Result<Vec<NoiseSource>> {
    let p = &scenario.params;
    p.validate()?;
    let l = &scenario.levels;
    if !(l.beam_waist > 0.0) {
        return Err(Error::invalid("beam_waist", "must be positive"));
    }
    let nu0 = p.species.hyperfine_frequency;
    let mid = FringeFit {
        frequency: 0.0,
        phase: 0.0,
        contrast: scenario.contrast,
        offset: 0.5,
        residual_rms: 0.0,
    };
    let probe = 0.1 * scenario.contrast;
    let detection_slope = p_to_frequency(0.5 + probe, &mid, scenario.interrogation, nu0)? * nu0 / probe;
    let intensity = intensity_sensitivity(p);
    let pointing = (l.pointing / l.beam_waist).powi(2);
    Ok([
        ("maser", l.maser, nu0),
        ("detection", l.detection, detection_slope),
        ("intensity", l.intensity, intensity),
        ("pointing", pointing, intensity),
        ("magnetic field", l.magnetic_field, magnetic_sensitivity(p)),
        ("density", l.density, density_sensitivity(p)),
        ("temperature", l.temperature, temperature_sensitivity(p)?),
    ]
    .into_iter()
    .map(|(name, level, s)| NoiseSource {
        name: name.to_string(),
        shot_level: level,
        sensitivity: Some(s),
    })
    .collect())
}

/// White-noise coefficient σ_y(1 s) of the scenario's technical noise.
pub fn project_optimized(scenario: &BudgetScenario) -> Result<f64> {
    Ok(noise_budget(&standard_sources(scenario)?, &scenario.qpn())?.total_one_second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::RB87_HYPERFINE;

    fn qpn() -> QpnInputs {
        QpnInputs {
            n_atoms: 2e5,
            interrogation: 0.35,
            cycle_time: 28.1,
            contrast: 0.6,
            nu0: RB87_HYPERFINE,
        }
    }

    #[test]
    fn magnetic_example() {
        let src = NoiseSource::new("magnetic field", 1e-4, 2.0 * 575.15 * 0.095);
        let y = src.fractional(RB87_HYPERFINE).unwrap();
        assert!((y - 1.6e-12).abs() < 0.01e-12, "{y}");
    }

    #[test]
    fn zero_sources_give_zero_total() {
        let r = noise_budget(&[NoiseSource::new("a", 0.0, 3.0), NoiseSource::new("b", 0.0, 1.0)], &qpn()).unwrap();
        assert_eq!(r.total_one_shot, 0.0);
        assert!(r.qpn_one_second > 0.0);
    }

    #[test]
    fn missing_sensitivity() {
        let s = NoiseSource {
            name: "pointing".into(),
            shot_level: 1.0,
            sensitivity: None,
        };
        assert_eq!(
            noise_budget(&[s], &qpn()).unwrap_err(),
            Error::MissingSensitivity("pointing".into())
        );
    }

    #[test]
    fn one_second_scaling() {
        let r = noise_budget(&[NoiseSource::new("a", 1.0, 1.0)], &qpn()).unwrap();
        assert!((r.entries[0].one_second / r.entries[0].one_shot - 28.1f64.sqrt()).abs() < 1e-12);
    }
}
