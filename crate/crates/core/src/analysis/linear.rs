use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// One measured frequency shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftPoint {
    /// Density (m⁻³, or any consistent density unit) or intensity (kW cm⁻²).
    pub x: f64,
    /// Hz
    pub frequency_shift: f64,
    /// Hz
    pub sigma: f64,
}

impl ShiftPoint {
    pub fn new(x: f64, frequency_shift: f64, sigma: f64) -> Self {
        ShiftPoint {
            x,
            frequency_shift,
            sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_sigma: f64,
    pub intercept_sigma: f64,
    /// χ²/(n − 2); zero for two points.
    pub chi2_reduced: f64,
}

impl LinearFitResult {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Weighted (1/σ²) straight-line fit in closed form. Uncertainties follow from
/// the supplied σ without rescaling by χ².
pub fn fit_shift_line(points: &[ShiftPoint]) -> Result<LinearFitResult> {
    if points.len() < 2 {
        return Err(Error::InsufficientData("need at least two shift points".into()));
    }
    if points
        .iter()
        .any(|p| !(p.sigma > 0.0) || !p.x.is_finite() || !p.frequency_shift.is_finite())
    {
        return Err(Error::invalid("shift point", "σ must be positive and values finite"));
    }
    // centre x for conditioning; the intercept is moved back afterwards
    let wsum: f64 = points.iter().map(|p| 1.0 / (p.sigma * p.sigma)).sum();
    let x0 = points.iter().map(|p| p.x / (p.sigma * p.sigma)).sum::<f64>() / wsum;
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let w = 1.0 / (p.sigma * p.sigma);
        let x = p.x - x0;
        s += w;
        sx += w * x;
        sy += w * p.frequency_shift;
        sxx += w * x * x;
        sxy += w * x * p.frequency_shift;
    }
    let det = s * sxx - sx * sx;
    if !(det > 0.0) || sxx <= f64::EPSILON * s * x0 * x0 {
        return Err(Error::Singular("all abscissae equal"));
    }
    let slope = (s * sxy - sx * sy) / det;
    let intercept_c = (sxx * sy - sx * sxy) / det;
    let var_slope = s / det;
    let var_int_c = sxx / det;
    let cov_c = -sx / det;
    let intercept = intercept_c - slope * x0;
    let var_int = var_int_c + x0 * x0 * var_slope - 2.0 * x0 * cov_c;
    let chi2: f64 = points
        .iter()
        .map(|p| {
            let r = (p.frequency_shift - intercept - slope * p.x) / p.sigma;
            r * r
        })
        .sum();
    let dof = points.len() - 2;
    Ok(LinearFitResult {
        slope,
        intercept,
        slope_sigma: var_slope.sqrt(),
        intercept_sigma: var_int.max(0.0).sqrt(),
        chi2_reduced: if dof == 0 { 0.0 } else { chi2 / dof as f64 },
    })
}

/// Second extrapolation stage: zero-density intercepts of each trap versus the
/// ensemble-averaged intensity. The slope is the differential light shift per
/// intensity, the intercept the residual (Zeeman) shift.
pub fn extrapolate_dls(intercepts: &[ShiftPoint]) -> Result<LinearFitResult> {
    if intercepts.len() < 2 {
        return Err(Error::InsufficientData("need at least two trap configurations".into()));
    }
    fit_shift_line(intercepts)
}

/// Density series measured in one trap configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapSeries {
    /// kW cm⁻²
    pub mean_intensity: f64,
    pub points: Vec<ShiftPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub per_trap: Vec<LinearFitResult>,
    pub intensity_fit: LinearFitResult,
}

/// Fits shift versus density per trap, then the zero-density intercepts versus
/// intensity.
pub fn two_stage_extrapolation(traps: &[TrapSeries]) -> Result<Extrapolation> {
    let per_trap = traps
        .iter()
        .map(|t| fit_shift_line(&t.points))
        .collect::<Result<Vec<_>>>()?;
    let intercepts: Vec<ShiftPoint> = traps
        .iter()
        .zip(&per_trap)
        .map(|(t, f)| ShiftPoint::new(t.mean_intensity, f.intercept, f.intercept_sigma))
        .collect();
    Ok(Extrapolation {
        intensity_fit: extrapolate_dls(&intercepts)?,
        per_trap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    #[test]
    fn two_points_interpolate_exactly() {
        let f = fit_shift_line(&[ShiftPoint::new(0.0, 0.0, 1.0), ShiftPoint::new(1.0, -0.52, 1.0)]).unwrap();
        assert_relative_eq!(f.slope, -0.52, epsilon = 1e-15);
        assert!(f.intercept.abs() < 1e-15);
        assert_eq!(f.chi2_reduced, 0.0);
    }

    #[test]
    fn equal_abscissae_are_singular() {
        let pts = vec![ShiftPoint::new(2.0, 1.0, 0.1), ShiftPoint::new(2.0, 1.5, 0.1)];
        assert!(matches!(fit_shift_line(&pts), Err(Error::Singular(_))));
        assert!(fit_shift_line(&pts[..1]).is_err());
        assert!(fit_shift_line(&[ShiftPoint::new(0.0, 0.0, 0.0), ShiftPoint::new(1.0, 0.0, 1.0)]).is_err());
    }

    #[test]
    fn tight_point_pins_the_intercept() {
        let pts = vec![
            ShiftPoint::new(0.0, 5.2, 1e-9),
            ShiftPoint::new(3.0, -1.3, 0.3),
            ShiftPoint::new(6.0, -8.4, 0.3),
        ];
        let f = extrapolate_dls(&pts).unwrap();
        assert_relative_eq!(f.intercept, 5.2, epsilon = 1e-9);
    }

    #[test]
    fn exact_line_recovered() {
        let pts: Vec<ShiftPoint> = (0..6)
            .map(|i| {
                let x = 0.3 * i as f64;
                ShiftPoint::new(x, 5.2 - 0.52 * x, 0.05 + 0.01 * i as f64)
            })
            .collect();
        let f = fit_shift_line(&pts).unwrap();
        assert_relative_eq!(f.slope, -0.52, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 5.2, epsilon = 1e-12);
        assert!(f.chi2_reduced < 1e-20);
    }
}
