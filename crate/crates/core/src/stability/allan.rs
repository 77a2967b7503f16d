use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Fractional-frequency values, one per measurement cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySeries {
    pub y: Vec<f64>,
    /// s
    pub cycle_time: f64,
}

impl StabilitySeries {
    pub fn new(y: Vec<f64>, cycle_time: f64) -> Result<Self> {
        if !(cycle_time > 0.0 && cycle_time.is_finite()) {
            return Err(Error::invalid("cycle_time", "must be positive"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("y", "must be finite"));
        }
        Ok(StabilitySeries { y, cycle_time })
    }

    pub fn count(&self) -> usize {
        self.y.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdevPoint {
    /// s
    pub tau: f64,
    /// Averaging factor, τ = m·cycle_time.
    pub m: usize,
    pub adev: f64,
    /// Equivalent degrees of freedom for white frequency noise.
    pub edf: f64,
}

/// Overlapping Allan deviation at averaging factor `m`:
/// σ² = Σ_k (ȳ_{k+m} − ȳ_k)² / (2(N − 2m + 1)), ȳ_k the mean of y[k..k+m].
pub fn overlapping_adev_m(series: &StabilitySeries, m: usize) -> Result<AdevPoint> {
    let n = series.count();
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    if n < 3 || 3 * m > n {
        return Err(Error::InsufficientData(format!(
            "τ = {} s needs {} shots, series has {n}",
            m as f64 * series.cycle_time,
            (3 * m).max(3)
        )));
    }
    // block means summed directly so identical blocks compare exactly equal
    let means: Vec<f64> = series.y.windows(m).map(|w| w.iter().sum::<f64>() / m as f64).collect();
    let terms = n - 2 * m + 1;
    let sum: f64 = (0..terms)
        .map(|k| {
            let d = means[k + m] - means[k];
            d * d
        })
        .sum();
    Ok(AdevPoint {
        tau: m as f64 * series.cycle_time,
        m,
        adev: (sum / (2.0 * terms as f64)).sqrt(),
        edf: white_fm_edf(n, m),
    })
}

/// Allan deviation at each τ, which must be a whole multiple of the cycle time.
pub fn overlapping_adev(series: &StabilitySeries, taus: &[f64]) -> Result<Vec<AdevPoint>> {
    taus.iter()
        .map(|&tau| {
            let ratio = tau / series.cycle_time;
            let m = ratio.round();
            if !(m >= 1.0) || (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
                return Err(Error::invalid("tau", "must be a positive multiple of the cycle time"));
            }
            overlapping_adev_m(series, m as usize)
        })
        .collect()
}

/// Averaging factors 1, 2, 4, … allowed for a series of `count` shots.
pub fn octave_multiples(count: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut m = 1;
    while 3 * m <= count {
        out.push(m);
        m *= 2;
    }
    out
}

/// Equivalent degrees of freedom of the overlapping estimator for white FM
/// (Howe, Allan & Barnes approximation).
pub fn white_fm_edf(n: usize, m: usize) -> f64 {
    let n = n as f64;
    let m = m as f64;
    let edf = (3.0 * (n - 1.0) / (2.0 * m) - 2.0 * (n - 2.0) / n) * 4.0 * m * m / (4.0 * m * m + 5.0);
    edf.max(1.0)
}

/// Least-squares slope of log σ versus log τ.
pub fn fit_log_slope(points: &[AdevPoint]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.adev > 0.0)
        .map(|p| (p.tau.ln(), p.adev.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData("need two non-zero Allan points".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Singular("all τ equal"));
    }
    Ok(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Coefficient a of σ_y(τ) = a·τ^(−1/2), fitted in log space with each point
/// weighted by its degrees of freedom.
pub fn white_noise_coefficient(points: &[AdevPoint]) -> Result<f64> {
    let mut wsum = 0.0;
    let mut acc = 0.0;
    for p in points.iter().filter(|p| p.adev > 0.0) {
        wsum += p.edf;
        acc += p.edf * (p.adev * p.tau.sqrt()).ln();
    }
    if !(wsum > 0.0) {
        return Err(Error::InsufficientData("no non-zero Allan points".into()));
    }
    Ok((acc / wsum).exp())
}
