//! Species and ensemble parameters, and the closed-form rates and shifts that
//! feed the dynamics and the noise budget.
//!
//! Angular rates (`delta0`, `omega_ex`) are in rad/s; frequency shifts are in
//! Hz. Every conversion between the two is written out at the call site.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::constants::{BOLTZMANN, HBAR, PLANCK, RB87_HYPERFINE, RB87_MASS};
use crate::{Error, Result};

/// Quadratic Zeeman coefficient of the ⁸⁷Rb clock transition, Hz/G².
pub const RB87_ZEEMAN: f64 = 575.15;

/// Peak-to-mean density ratio of a thermal cloud in a harmonic trap, 2^(3/2).
pub const HARMONIC_PEAK_TO_MEAN: f64 = 2.828_427_124_746_190_3;

pub const DEFAULT_DEPHASING_CORRECTION: f64 = 1.6;
pub const DEFAULT_EXCHANGE_CORRECTION: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpecies {
    /// kg
    pub mass: f64,
    /// |↑⟩–|↑⟩ scattering length, m.
    pub a_uu: f64,
    /// |↓⟩–|↓⟩ scattering length, m.
    pub a_dd: f64,
    /// |↑⟩–|↓⟩ scattering length, m.
    pub a_ud: f64,
    /// Hz
    pub hyperfine_frequency: f64,
    /// Quadratic Zeeman coefficient, Hz/G².
    pub zeeman_coefficient: f64,
}

impl AtomSpecies {
    /// ⁸⁷Rb with the given scattering lengths (all in m).
    pub fn rb87(a_uu: f64, a_dd: f64, a_ud: f64) -> Self {
        AtomSpecies {
            mass: RB87_MASS,
            a_uu,
            a_dd,
            a_ud,
            hyperfine_frequency: RB87_HYPERFINE,
            zeeman_coefficient: RB87_ZEEMAN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("mass", "must be positive"));
        }
        if !(self.hyperfine_frequency > 0.0 && self.hyperfine_frequency.is_finite()) {
            return Err(Error::invalid("hyperfine_frequency", "must be positive"));
        }
        if !(self.zeeman_coefficient > 0.0 && self.zeeman_coefficient.is_finite()) {
            return Err(Error::invalid("zeeman_coefficient", "must be positive"));
        }
        for (name, a) in [("a_uu", self.a_uu), ("a_dd", self.a_dd), ("a_ud", self.a_ud)] {
            if !a.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Ensemble, trap and field description for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub species: AtomSpecies,
    /// K
    pub temperature: f64,
    /// Mean density n̄, m⁻³.
    pub mean_density: f64,
    /// rad/s. Informational; the rates below do not depend on it directly.
    pub mean_trap_frequency: f64,
    /// Differential light shift per intensity δα/2π, Hz/(kW cm⁻²).
    pub dls_per_intensity: f64,
    /// Total light shift per intensity α/2π, Hz/(kW cm⁻²).
    pub total_ls_per_intensity: f64,
    /// Ensemble-averaged intensity, kW cm⁻².
    pub mean_intensity: f64,
    /// G
    pub magnetic_field: f64,
    pub dephasing_correction: f64,
    pub exchange_correction: f64,
    /// Converts the mean density into the density entering the exchange rate.
    pub exchange_density_factor: f64,
    /// Dimensionless prefactor of the velocity-changing collision rate.
    pub collision_calibration: f64,
}

impl PhysicalParams {
    /// Parameters with the default correction factors and no light, field or
    /// collisions; callers fill in what they need.
    pub fn new(species: AtomSpecies, temperature: f64, mean_density: f64) -> Self {
        PhysicalParams {
            species,
            temperature,
            mean_density,
            mean_trap_frequency: 0.0,
            dls_per_intensity: 0.0,
            total_ls_per_intensity: 0.0,
            mean_intensity: 0.0,
            magnetic_field: 0.0,
            dephasing_correction: DEFAULT_DEPHASING_CORRECTION,
            exchange_correction: DEFAULT_EXCHANGE_CORRECTION,
            exchange_density_factor: HARMONIC_PEAK_TO_MEAN,
            collision_calibration: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("temperature", "must be positive"));
        }
        if !(self.mean_density >= 0.0 && self.mean_density.is_finite()) {
            return Err(Error::invalid("mean_density", "must be non-negative"));
        }
        if !(self.mean_intensity >= 0.0 && self.mean_intensity.is_finite()) {
            return Err(Error::invalid("mean_intensity", "must be non-negative"));
        }
        if !(self.magnetic_field >= 0.0 && self.magnetic_field.is_finite()) {
            return Err(Error::invalid("magnetic_field", "must be non-negative"));
        }
        for (name, v) in [
            ("dephasing_correction", self.dephasing_correction),
            ("exchange_correction", self.exchange_correction),
            ("exchange_density_factor", self.exchange_density_factor),
            ("collision_calibration", self.collision_calibration),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be finite and non-negative"));
            }
        }
        if !self.dls_per_intensity.is_finite() || !self.total_ls_per_intensity.is_finite() {
            return Err(Error::invalid("light shift", "must be finite"));
        }
        if self.dls_per_intensity != 0.0 && self.total_ls_per_intensity == 0.0 {
            return Err(Error::UndefinedRatio);
        }
        Ok(())
    }

    /// δα/α, zero when there is no differential light shift.
    pub fn light_shift_ratio(&self) -> Result<f64> {
        if self.dls_per_intensity == 0.0 {
            return Ok(0.0);
        }
        if self.total_ls_per_intensity == 0.0 {
            return Err(Error::UndefinedRatio);
        }
        Ok(self.dls_per_intensity / self.total_ls_per_intensity)
    }
}

/// The three model rates plus the homogeneous transition offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    /// Inhomogeneous dephasing rate Δ₀, rad/s. May be negative.
    pub delta0: f64,
    /// Exchange rate ω_ex, rad/s.
    pub omega_ex: f64,
    /// Velocity-changing collision rate γ_c, s⁻¹.
    pub gamma_c: f64,
    /// Homogeneous transition-frequency offset, Hz.
    pub mean_shift: f64,
}

impl RateSet {
    pub fn new(delta0: f64, omega_ex: f64, gamma_c: f64, mean_shift: f64) -> Result<Self> {
        let rates = RateSet {
            delta0,
            omega_ex,
            gamma_c,
            mean_shift,
        };
        rates.validate()?;
        Ok(rates)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta0.is_finite() || !self.mean_shift.is_finite() {
            return Err(Error::invalid("rates", "must be finite"));
        }
        if !(self.omega_ex >= 0.0 && self.omega_ex.is_finite()) {
            return Err(Error::invalid("omega_ex", "must be non-negative"));
        }
        if !(self.gamma_c >= 0.0 && self.gamma_c.is_finite()) {
            return Err(Error::invalid("gamma_c", "must be non-negative"));
        }
        Ok(())
    }

    /// All four quantities predicted from `params`.
    pub fn predict(params: &PhysicalParams) -> Result<Self> {
        Ok(RateSet {
            delta0: dephasing_rate(params)?,
            omega_ex: exchange_rate(params)?,
            gamma_c: collision_rate(params)?,
            mean_shift: mean_shift(params)?,
        })
    }
}

/// Density-shift coefficient γ/2π = 2ħ(a↑↑ − a↓↓)/m, in Hz per m⁻³.
pub fn density_shift_coefficient(species: &AtomSpecies) -> f64 {
    2.0 * HBAR * (species.a_uu - species.a_dd) / species.mass
}

/// Δ₀ = [k_B T/(2ħ) · δα/α − γ n̄/4] × dephasing correction, in rad/s.
pub fn dephasing_rate(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    let ratio = params.light_shift_ratio()?;
    let gamma = 2.0 * PI * density_shift_coefficient(&params.species);
    let light = BOLTZMANN * params.temperature / (2.0 * HBAR) * ratio;
    let density = gamma * params.mean_density / 4.0;
    Ok((light - density) * params.dephasing_correction)
}

/// Density at which the light-shift and density-shift inhomogeneities cancel,
/// n̄ = 2 k_B T δα/(ħ α γ). `None` if it would be negative or undefined.
pub fn cancellation_density(params: &PhysicalParams) -> Result<Option<f64>> {
    params.validate()?;
    let ratio = params.light_shift_ratio()?;
    let gamma = 2.0 * PI * density_shift_coefficient(&params.species);
    if gamma == 0.0 {
        return Ok(None);
    }
    let n = 2.0 * BOLTZMANN * params.temperature * ratio / (HBAR * gamma);
    Ok((n >= 0.0 && n.is_finite()).then_some(n))
}

/// ω_ex = (4πħ/m) · a↑↓ · (density factor · n̄) × exchange correction, in rad/s.
pub fn exchange_rate(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    let sp = &params.species;
    Ok(4.0 * PI * HBAR / sp.mass
        * sp.a_ud.abs()
        * params.exchange_density_factor
        * params.mean_density
        * params.exchange_correction)
}

/// γ_c = C · a↑↓² · n̄ · √(k_B T/m), in s⁻¹.
pub fn collision_rate(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    let sp = &params.species;
    let thermal_velocity = (BOLTZMANN * params.temperature / sp.mass).sqrt();
    Ok(params.collision_calibration * sp.a_ud * sp.a_ud * params.mean_density * thermal_velocity)
}

/// Collision prefactor `C` for which ω_ex/(π γ_c) equals `target_ratio` at the
/// temperature of `params`. The result does not depend on the density.
pub fn calibrate_collision(params: &PhysicalParams, target_ratio: f64) -> Result<f64> {
    if !(target_ratio > 0.0 && target_ratio.is_finite()) {
        return Err(Error::invalid("target_ratio", "must be positive"));
    }
    let mut probe = *params;
    probe.mean_density = 1.0;
    probe.collision_calibration = 1.0;
    let omega = exchange_rate(&probe)?;
    let gamma_unit = collision_rate(&probe)?;
    if gamma_unit == 0.0 {
        return Err(Error::invalid("a_ud", "zero inter-state scattering length"));
    }
    Ok(omega / (PI * target_ratio * gamma_unit))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// ω_ex/|Δ₀|, infinite when Δ₀ = 0.
    pub exchange_over_dephasing: f64,
    /// ω_ex/(π γ_c), infinite when γ_c = 0.
    pub exchange_over_collisions: f64,
    /// |Δ₀| < ω_ex
    pub dephasing_slower: bool,
    /// γ_c < ω_ex/π
    pub collisions_slower: bool,
    /// Set when a ratio had a zero denominator.
    pub division_flag: bool,
}

pub fn ssr_conditions(rates: &RateSet) -> Result<ConditionReport> {
    rates.validate()?;
    let mut division_flag = false;
    let exchange_over_dephasing = if rates.delta0 == 0.0 {
        division_flag = true;
        f64::INFINITY
    } else {
        rates.omega_ex / rates.delta0.abs()
    };
    let exchange_over_collisions = if rates.gamma_c == 0.0 {
        division_flag = true;
        f64::INFINITY
    } else {
        rates.omega_ex / (PI * rates.gamma_c)
    };
    Ok(ConditionReport {
        exchange_over_dephasing,
        exchange_over_collisions,
        dephasing_slower: exchange_over_dephasing > 1.0,
        collisions_slower: exchange_over_collisions > 1.0,
        division_flag,
    })
}

/// Quadratic Zeeman shift in Hz for a field in G.
pub fn zeeman_shift(field: f64, species: &AtomSpecies) -> Result<f64> {
    if !(field >= 0.0 && field.is_finite()) {
        return Err(Error::invalid("magnetic_field", "must be non-negative"));
    }
    Ok(species.zeeman_coefficient * field * field)
}

/// Homogeneous offset: mean DLS + mean density shift + quadratic Zeeman, Hz.
pub fn mean_shift(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    Ok(params.dls_per_intensity * params.mean_intensity
        + density_shift_coefficient(&params.species) * params.mean_density
        + zeeman_shift(params.magnetic_field, &params.species)?)
}

/// Mean-shift response to a fractional intensity change, Hz.
pub fn intensity_sensitivity(params: &PhysicalParams) -> f64 {
    params.dls_per_intensity * params.mean_intensity
}

/// dν/dB = 2 K_Z B, Hz/G.
pub fn magnetic_sensitivity(params: &PhysicalParams) -> f64 {
    2.0 * params.species.zeeman_coefficient * params.magnetic_field
}

/// Mean-shift response to a fractional density change, Hz.
pub fn density_sensitivity(params: &PhysicalParams) -> f64 {
    density_shift_coefficient(&params.species) * params.mean_density
}

/// d(mean DLS)/dT in Hz/K.
///
/// In a harmonic trap the ensemble-averaged intensity is
/// ⟨I⟩ = I₀(1 − 3k_BT/(2U₀)) with U₀ = h|α|I₀, so the slope is
/// −(3/2)(k_B/h)·δα/|α| and independent of trap depth.
pub fn temperature_sensitivity(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    if params.dls_per_intensity == 0.0 {
        return Ok(0.0);
    }
    Ok(-1.5 * BOLTZMANN / PLANCK * params.dls_per_intensity / params.total_ls_per_intensity.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{bohr_to_m, PER_CM3_E12};
    use approx::assert_relative_eq;

    fn species() -> AtomSpecies {
        AtomSpecies::rb87(bohr_to_m(94.55), bohr_to_m(100.76), bohr_to_m(97.0))
    }

    fn params() -> PhysicalParams {
        let mut p = PhysicalParams::new(species(), 400e-9, 0.5 * PER_CM3_E12);
        p.dls_per_intensity = -2.2;
        p.total_ls_per_intensity = -29_500.0;
        p.mean_intensity = 5.4;
        p.magnetic_field = 0.095;
        p.collision_calibration = 50.0;
        p
    }

    #[test]
    fn density_shift_matches_predicted_value() {
        let g = density_shift_coefficient(&species()) * PER_CM3_E12;
        assert_relative_eq!(g, -0.48, max_relative = 0.01);
    }

    #[test]
    fn density_shift_vanishes_for_equal_lengths() {
        let mut sp = species();
        sp.a_dd = sp.a_uu;
        assert_eq!(density_shift_coefficient(&sp), 0.0);
    }

    #[test]
    fn density_shift_is_linear_and_antisymmetric() {
        let sp = species();
        let mut doubled = sp;
        doubled.a_uu = sp.a_dd + 2.0 * (sp.a_uu - sp.a_dd);
        assert_relative_eq!(
            density_shift_coefficient(&doubled),
            2.0 * density_shift_coefficient(&sp),
            max_relative = 1e-12
        );
        let mut swapped = sp;
        core::mem::swap(&mut swapped.a_uu, &mut swapped.a_dd);
        assert_eq!(density_shift_coefficient(&swapped), -density_shift_coefficient(&sp));
    }

    #[test]
    fn dephasing_rate_vanishes_without_temperature_or_density() {
        let mut p = params();
        p.temperature = 1e-30;
        p.mean_density = 0.0;
        assert!(dephasing_rate(&p).unwrap().abs() < 1e-20);
    }

    #[test]
    fn dephasing_rate_cancels_at_cancellation_density() {
        // opposite-sign light-shift ratio makes the two terms cancel
        let mut p = params();
        p.total_ls_per_intensity = 29_500.0;
        let n = cancellation_density(&p).unwrap().expect("cancellation density exists");
        let analytic = 2.0 * BOLTZMANN * p.temperature * (p.dls_per_intensity / p.total_ls_per_intensity)
            / (HBAR * 2.0 * PI * density_shift_coefficient(&p.species));
        assert_relative_eq!(n, analytic, max_relative = 1e-14);
        p.mean_density = n;
        let scale = BOLTZMANN * p.temperature / (2.0 * HBAR) * 2.2 / 29_500.0;
        assert!(dephasing_rate(&p).unwrap().abs() < 1e-12 * scale);
        // same-sign ratio: both terms add, no cancellation
        assert_eq!(cancellation_density(&params()).unwrap(), None);
    }

    #[test]
    fn undefined_ratio_is_rejected() {
        let mut p = params();
        p.total_ls_per_intensity = 0.0;
        assert_eq!(dephasing_rate(&p), Err(Error::UndefinedRatio));
        p.dls_per_intensity = 0.0;
        assert!(dephasing_rate(&p).is_ok());
    }

    #[test]
    fn dephasing_rate_is_affine_in_density_and_temperature() {
        let p = params();
        let at = |n: f64, t: f64| {
            let mut q = p;
            q.mean_density = n;
            q.temperature = t;
            dephasing_rate(&q).unwrap()
        };
        let (a, b, c) = (at(1e17, 4e-7), at(5e17, 4e-7), at(9e17, 4e-7));
        assert_relative_eq!(b - a, c - b, max_relative = 1e-12);
        let (a, b, c) = (at(5e17, 1e-7), at(5e17, 3e-7), at(5e17, 5e-7));
        assert_relative_eq!(b - a, c - b, max_relative = 1e-12);
    }

    #[test]
    fn exchange_rate_is_linear_in_density() {
        let mut p = params();
        p.mean_density = 0.0;
        assert_eq!(exchange_rate(&p).unwrap(), 0.0);
        p.mean_density = 3e17;
        let w1 = exchange_rate(&p).unwrap();
        p.mean_density = 6e17;
        assert_eq!(exchange_rate(&p).unwrap(), 2.0 * w1);
    }

    #[test]
    fn collision_calibration_reproduces_ratio_and_scales_with_temperature() {
        let mut p = params();
        p.collision_calibration = calibrate_collision(&p, 4.8).unwrap();
        let r = ssr_conditions(&RateSet::predict(&p).unwrap()).unwrap();
        assert_relative_eq!(r.exchange_over_collisions, 4.8, max_relative = 1e-6);
        p.temperature *= 4.0;
        let r4 = ssr_conditions(&RateSet::predict(&p).unwrap()).unwrap();
        assert_relative_eq!(r4.exchange_over_collisions, 2.4, max_relative = 1e-12);
        p.mean_density = 0.0;
        assert_eq!(collision_rate(&p).unwrap(), 0.0);
    }

    #[test]
    fn exchange_to_collision_ratio_independent_of_density() {
        let p = params();
        let ratio = |n: f64| {
            let mut q = p;
            q.mean_density = n;
            exchange_rate(&q).unwrap() / collision_rate(&q).unwrap()
        };
        let r0 = ratio(1e16);
        for n in [5e16, 3e17, 1.38e18, 7e18] {
            assert_relative_eq!(ratio(n), r0, max_relative = 1e-12);
        }
    }

    #[test]
    fn conditions_direct_comparisons() {
        let r = ssr_conditions(&RateSet::new(1.0, 10.0, 0.5, 0.0).unwrap()).unwrap();
        assert!(r.dephasing_slower && r.collisions_slower);
        assert_eq!(r.exchange_over_dephasing, 10.0);
        assert_eq!(r.exchange_over_collisions, 10.0 / (PI * 0.5));
        assert!(!r.division_flag);

        let r = ssr_conditions(&RateSet::new(10.0, 1.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(!r.dephasing_slower);
        assert!(r.collisions_slower && r.division_flag);
        assert!(r.exchange_over_collisions.is_infinite());

        let r = ssr_conditions(&RateSet::new(-3.0, 2.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(r.exchange_over_dephasing, 2.0 / 3.0);
    }

    #[test]
    fn zeeman_pair_and_scaling() {
        let sp = species();
        assert_eq!(zeeman_shift(0.0, &sp).unwrap(), 0.0);
        let z = zeeman_shift(0.095, &sp).unwrap();
        assert!((z - 5.2).abs() <= 0.1, "{z}");
        assert_relative_eq!(zeeman_shift(0.19, &sp).unwrap(), 4.0 * z, max_relative = 1e-15);
        assert!(zeeman_shift(-1.0, &sp).is_err());
    }

    #[test]
    fn mean_shift_components() {
        let mut p = PhysicalParams::new(species(), 400e-9, 0.0);
        assert_eq!(mean_shift(&p).unwrap(), 0.0);
        p.mean_density = PER_CM3_E12;
        assert_relative_eq!(mean_shift(&p).unwrap(), -0.48, max_relative = 0.01);
        let p = params();
        let expected = -2.2 * 5.4 + density_shift_coefficient(&p.species) * p.mean_density + 575.15 * 0.095 * 0.095;
        assert_relative_eq!(mean_shift(&p).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params();
        p.temperature = 0.0;
        assert!(matches!(dephasing_rate(&p), Err(Error::InvalidParameter { name: "temperature", .. })));
        let mut p = params();
        p.mean_density = -1.0;
        assert!(exchange_rate(&p).is_err());
        assert!(RateSet::new(1.0, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn temperature_sensitivity_magnitude() {
        let p = params();
        let s = temperature_sensitivity(&p).unwrap();
        // 1.5 k_B/h × δα/|α| ≈ 2.3 Hz/μK for δα/α ≈ 7.5e-5
        assert_relative_eq!(s.abs() * 1e-6, 1.5 * 2.083_661_9e4 * 2.2 / 29_500.0, max_relative = 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn zeeman_quadratic(b in 0.0f64..10.0) {
                let sp = species();
                let one = zeeman_shift(b, &sp).unwrap();
                let two = zeeman_shift(2.0 * b, &sp).unwrap();
                prop_assert!((two - 4.0 * one).abs() <= 1e-12 * two.abs().max(1e-300));
            }

            #[test]
            fn conditions_consistent_with_ratios(d in -50.0f64..50.0, w in 0.0f64..100.0, g in 0.0f64..20.0) {
                let r = ssr_conditions(&RateSet::new(d, w, g, 0.0).unwrap()).unwrap();
                prop_assert_eq!(r.dephasing_slower, r.exchange_over_dephasing > 1.0);
                prop_assert_eq!(r.collisions_slower, r.exchange_over_collisions > 1.0);
                if d != 0.0 {
                    prop_assert_eq!(r.dephasing_slower, d.abs() < w);
                }
                if g != 0.0 {
                    prop_assert_eq!(r.collisions_slower, g < w / PI);
                }
            }
        }
    }
}
