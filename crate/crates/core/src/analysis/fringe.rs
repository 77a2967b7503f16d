use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use super::lm::{levenberg_marquardt, LeastSquares, LmSettings};
use crate::dynamics::RamseyRecord;
use crate::{Error, Result};

/// P(t) = offset + (contrast/2)·cos(2π·frequency·t + phase)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    /// Hz
    pub frequency: f64,
    /// rad, in (−π, π]
    pub phase: f64,
    pub contrast: f64,
    pub offset: f64,
    pub residual_rms: f64,
}

impl FringeFit {
    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.offset + 0.5 * self.contrast * (2.0 * PI * self.frequency * t + self.phase).cos()
    }
}

pub const MIN_FRINGE_POINTS: usize = 6;

struct Sinusoid<'a> {
    t: &'a [f64],
    y: &'a [f64],
    inv_sigma: Vec<f64>,
}

// params: offset, contrast, frequency, phase
impl LeastSquares for Sinusoid<'_> {
    fn n_params(&self) -> usize {
        4
    }

    fn residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .t
            .iter()
            .zip(self.y)
            .zip(&self.inv_sigma)
            .map(|((t, y), w)| {
                let model = p[0] + 0.5 * p[1] * (2.0 * PI * p[2] * t + p[3]).cos();
                (model - y) * w
            })
            .collect())
    }

    fn jacobian(&self, p: &[f64]) -> Option<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.t.len(), 4);
        for (i, (t, w)) in self.t.iter().zip(&self.inv_sigma).enumerate() {
            let arg = 2.0 * PI * p[2] * t + p[3];
            let (s, c) = arg.sin_cos();
            j[(i, 0)] = *w;
            j[(i, 1)] = 0.5 * c * w;
            j[(i, 2)] = -0.5 * p[1] * s * 2.0 * PI * t * w;
            j[(i, 3)] = -0.5 * p[1] * s * w;
        }
        Some(j)
    }
}

/// Weighted linear fit of offset + a·cos(ωt) + b·sin(ωt). Returns
/// (offset, a, b, weighted χ²).
fn linear_sinusoid(t: &[f64], y: &[f64], inv_sigma: &[f64], freq: f64) -> Option<(f64, f64, f64, f64)> {
    let omega = 2.0 * PI * freq;
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for ((t, y), w) in t.iter().zip(y).zip(inv_sigma) {
        let (s, c) = (omega * t).sin_cos();
        let row = Vector3::new(1.0, c, s) * *w;
        ata += row * row.transpose();
        aty += row * (y * w);
    }
    let sol = ata.cholesky()?.solve(&aty);
    let chi2 = t
        .iter()
        .zip(y)
        .zip(inv_sigma)
        .map(|((t, y), w)| {
            let (s, c) = (omega * t).sin_cos();
            let r = (sol[0] + sol[1] * c + sol[2] * s - y) * w;
            r * r
        })
        .sum();
    Some((sol[0], sol[1], sol[2], chi2))
}

fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Fits a sinusoidal fringe to `(t, y)` with optional per-point σ.
///
/// A frequency grid from one cycle over the span up to the Nyquist limit of the
/// mean sample spacing is scanned with a linear fit at each node; the best node
/// seeds a Levenberg–Marquardt refinement of all four parameters.
pub fn fit_fringe_series(t: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<FringeFit> {
    if t.len() != y.len() || sigma.is_some_and(|s| s.len() != t.len()) {
        return Err(Error::invalid("series", "length mismatch"));
    }
    if t.len() < MIN_FRINGE_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points, need at least {MIN_FRINGE_POINTS}",
            t.len()
        )));
    }
    let inv_sigma: Vec<f64> = match sigma {
        Some(s) => {
            if s.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::invalid("sigma", "must be positive"));
            }
            s.iter().map(|v| 1.0 / v).collect()
        }
        None => alloc::vec![1.0; t.len()],
    };
    let t_min = t.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = t_max - t_min;
    if !(span > 0.0) {
        return Err(Error::InsufficientData("zero time span".into()));
    }
    // centre times so that the phase/frequency parameters decouple
    let centre = 0.5 * (t_min + t_max);
    let tc: Vec<f64> = t.iter().map(|v| v - centre).collect();

    let f_min = 1.0 / span;
    let f_max = 0.5 * (t.len() - 1) as f64 / span;
    if f_max <= f_min {
        return Err(Error::InsufficientData("too few points per span".into()));
    }
    // nodes spaced a tenth of the Fourier resolution apart
    let df = 0.1 / span;
    let nodes = (((f_max - f_min) / df).ceil() as usize).max(1);
    let mut best: Option<(f64, (f64, f64, f64, f64))> = None;
    for k in 0..=nodes {
        let f = f_min + (f_max - f_min) * k as f64 / nodes as f64;
        if let Some(fit) = linear_sinusoid(&tc, y, &inv_sigma, f) {
            if best.is_none_or(|(_, b)| fit.3 < b.3) {
                best = Some((f, fit));
            }
        }
    }
    let (f0, (off, a, b, _)) = best.ok_or(Error::Singular("fringe design matrix"))?;
    let start = [off, 2.0 * a.hypot(b), f0, (-b).atan2(a)];

    let problem = Sinusoid {
        t: &tc,
        y,
        inv_sigma,
    };
    let out = levenberg_marquardt(&problem, &start, &LmSettings::default())?;
    let (offset, mut contrast, frequency, mut phase) =
        (out.params[0], out.params[1], out.params[2], out.params[3]);
    if contrast < 0.0 {
        contrast = -contrast;
        phase += PI;
    }
    if !(frequency > 0.0) || span * frequency < 1.0 {
        return Err(Error::InsufficientData(format!(
            "window spans {:.3} fringe periods, need at least one",
            span * frequency
        )));
    }
    // move the phase back to the original time origin
    phase = wrap_phase(phase - 2.0 * PI * frequency * centre);
    let residual_rms = {
        let raw: f64 = t
            .iter()
            .zip(y)
            .map(|(t, y)| {
                let m = offset + 0.5 * contrast * (2.0 * PI * frequency * t + phase).cos();
                (m - y) * (m - y)
            })
            .sum();
        (raw / t.len() as f64).sqrt()
    };
    contrast = contrast.min(1.0);
    Ok(FringeFit {
        frequency,
        phase,
        contrast,
        offset,
        residual_rms,
    })
}

/// Fits the population transfer of `record` inside `window = (t_start, t_end)`.
pub fn fit_fringe(record: &RamseyRecord, window: (f64, f64)) -> Result<FringeFit> {
    let (t, y): (Vec<f64>, Vec<f64>) = record
        .times
        .iter()
        .zip(&record.transfer)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, p)| (*t, *p))
        .unzip();
    fit_fringe_series(&t, &y, None)
}

/// Contrast versus time from measured P(t) by sliding a window of
/// `window_periods` fringe periods along the series and fitting the fringe
/// amplitude at fixed `frequency` in each window.
///
/// Returns (window centre time, contrast) for every window holding at least
/// four points.
pub fn sliding_contrast(
    t: &[f64],
    y: &[f64],
    frequency: f64,
    window_periods: f64,
) -> Result<Vec<(f64, f64)>> {
    if t.len() != y.len() {
        return Err(Error::invalid("series", "length mismatch"));
    }
    if !(frequency > 0.0) || !(window_periods > 0.0) {
        return Err(Error::invalid("window", "frequency and width must be positive"));
    }
    let half = 0.5 * window_periods / frequency;
    let mut out = Vec::new();
    for &centre in t {
        let (wt, wy): (Vec<f64>, Vec<f64>) = t
            .iter()
            .zip(y)
            .filter(|(s, _)| (**s - centre).abs() <= half)
            .map(|(s, p)| (*s - centre, *p))
            .unzip();
        if wt.len() < 4 {
            continue;
        }
        let ones = alloc::vec![1.0; wt.len()];
        if let Some((_, a, b, _)) = linear_sinusoid(&wt, &wy, &ones, frequency) {
            out.push((centre, (2.0 * a.hypot(b)).min(1.0)));
        }
    }
    if out.is_empty() {
        return Err(Error::InsufficientData("no window holds four points".into()));
    }
    Ok(out)
}
