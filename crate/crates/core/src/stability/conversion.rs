use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::analysis::FringeFit;
use crate::{Error, Result};

/// Largest |P − offset| accepted, as a fraction of the contrast.
pub const QUADRATURE_WINDOW: f64 = 0.4;

fn check(p: f64, fit: &FringeFit, interrogation: f64, nu0: f64) -> Result<f64> {
    if !(fit.contrast > 0.0) || !(interrogation > 0.0) || !(nu0 > 0.0) || !p.is_finite() {
        return Err(Error::invalid("p_to_frequency", "contrast, interrogation and ν₀ must be positive"));
    }
    let dev = p - fit.offset;
    let limit = QUADRATURE_WINDOW * fit.contrast;
    if dev.abs() > limit {
        return Err(Error::OutOfQuadrature {
            deviation: dev.abs(),
            limit,
        });
    }
    Ok(dev)
}

/// Fractional frequency offset from a mid-fringe population measurement,
/// y = (P − offset)/(π T_R C ν₀).
pub fn p_to_frequency(p: f64, fit: &FringeFit, interrogation: f64, nu0: f64) -> Result<f64> {
    let dev = check(p, fit, interrogation, nu0)?;
    Ok(dev / (PI * interrogation * fit.contrast * nu0))
}

/// Inverse of P = offset + (C/2)·sin(2π y ν₀ T_R) on the central branch.
pub fn p_to_frequency_exact(p: f64, fit: &FringeFit, interrogation: f64, nu0: f64) -> Result<f64> {
    let dev = check(p, fit, interrogation, nu0)?;
    Ok((2.0 * dev / fit.contrast).asin() / (2.0 * PI * interrogation * nu0))
}

/// Projection-noise limited σ_y at τ = 1 s:
/// (1/(2π ν₀ T_R C))·√(T_c/N).
pub fn qpn_limit(n_atoms: f64, interrogation: f64, cycle_time: f64, contrast: f64, nu0: f64) -> Result<f64> {
    if !(n_atoms > 0.0 && interrogation > 0.0 && cycle_time > 0.0 && nu0 > 0.0) {
        return Err(Error::invalid("qpn_limit", "inputs must be positive"));
    }
    if !(contrast > 0.0 && contrast <= 1.0) {
        return Err(Error::invalid("contrast", "must lie in (0, 1]"));
    }
    Ok((cycle_time / n_atoms).sqrt() / (2.0 * PI * nu0 * interrogation * contrast))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::RB87_HYPERFINE;

    fn fit(c: f64) -> FringeFit {
        FringeFit {
            frequency: 1.0,
            phase: 0.0,
            contrast: c,
            offset: 0.5,
            residual_rms: 0.0,
        }
    }

    #[test]
    fn mid_fringe_values() {
        assert_eq!(p_to_frequency(0.5, &fit(1.0), 0.35, RB87_HYPERFINE).unwrap(), 0.0);
        let y = p_to_frequency(0.51, &fit(1.0), 0.35, RB87_HYPERFINE).unwrap();
        assert!((y - 1.33e-12).abs() < 0.01e-12, "{y}");
        let exact = p_to_frequency_exact(0.51, &fit(1.0), 0.35, RB87_HYPERFINE).unwrap();
        assert!(((y - exact) / exact).abs() < 0.01);
        let y2 = p_to_frequency(0.52, &fit(1.0), 0.35, RB87_HYPERFINE).unwrap();
        assert!((y2 - 2.0 * y).abs() < 1e-25);
    }

    #[test]
    fn out_of_quadrature() {
        assert!(matches!(
            p_to_frequency(0.8, &fit(0.6), 0.35, RB87_HYPERFINE),
            Err(Error::OutOfQuadrature { .. })
        ));
    }

    #[test]
    fn qpn_values() {
        let a = qpn_limit(2e5, 0.35, 28.1, 1.0, RB87_HYPERFINE).unwrap();
        assert!((a - 8e-13).abs() < 0.08e-13 * 10.0, "{a}");
        let b = qpn_limit(8e5, 0.35, 28.1, 1.0, RB87_HYPERFINE).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
        assert!(qpn_limit(1e5, 0.35, 28.1, 1.2, RB87_HYPERFINE).is_err());
    }
}
