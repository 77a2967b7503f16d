//! CODATA 2018 constants and unit conversions.

use core::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J s.
pub const PLANCK: f64 = 2.0 * PI * HBAR;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Mass of ⁸⁷Rb, kg.
pub const RB87_MASS: f64 = 86.909_180_531 * AMU;
/// ⁸⁷Rb ground-state hyperfine splitting, Hz.
pub const RB87_HYPERFINE: f64 = 6_834_682_610.904;

/// 10¹² cm⁻³ expressed in m⁻³.
pub const PER_CM3_E12: f64 = 1e18;
/// 1 mG in G.
pub const MILLIGAUSS: f64 = 1e-3;
/// 1 nK in K.
pub const NANOKELVIN: f64 = 1e-9;

pub fn bohr_to_m(a: f64) -> f64 {
    a * BOHR_RADIUS
}

pub fn density_from_cm3_e12(n: f64) -> f64 {
    n * PER_CM3_E12
}
