use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use super::lm::{levenberg_marquardt, LeastSquares, LmSettings};
use crate::dynamics::{ramsey_scan, EnergyClassGrid, RamseyConfig, RamseyRecord};
use crate::physics::RateSet;
use crate::{Error, Result};

pub const MIN_SSR_POINTS: usize = 20;

/// Which column of the record the model is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitTarget {
    /// Contrast envelope; insensitive to slow drifts of the absolute frequency.
    Contrast,
    /// Full population transfer P(t); needs the homogeneous detuning to be known.
    Transfer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsrFitSettings {
    pub grid: EnergyClassGrid,
    /// RK4 step of the model evaluations, s.
    pub dt: f64,
    pub target: FitTarget,
    /// Per-point σ of the fitted column. When `None` it is estimated from the
    /// residuals at the optimum.
    pub sigma: Option<f64>,
    pub lm: LmSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsrFit {
    /// Fitted Δ₀, ω_ex, γ_c; `mean_shift` copied from the initial guess.
    pub rates: RateSet,
    /// Covariance of (Δ₀, ω_ex, γ_c).
    pub covariance: [[f64; 3]; 3],
    /// Set when the covariance is close to singular or Δ₀ and γ_c are strongly
    /// correlated, typically because the data show no revival.
    pub weakly_identified: bool,
    pub iterations: usize,
    /// Σ r² (weighted when σ is given) after every accepted iteration.
    pub objective_history: Vec<f64>,
    pub residual_rms: f64,
}

impl SsrFit {
    pub fn sigmas(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.covariance[i][i].max(0.0).sqrt())
    }
}

struct EnvelopeProblem<'a> {
    record: &'a RamseyRecord,
    template: RamseyConfig,
    settings: &'a SsrFitSettings,
    inv_sigma: f64,
}

impl EnvelopeProblem<'_> {
    fn config(&self, p: &[f64]) -> Result<RamseyConfig> {
        let mut cfg = self.template;
        cfg.rates = RateSet::new(p[0], p[1], p[2], self.template.rates.mean_shift)?;
        Ok(cfg)
    }

    fn data(&self) -> &[f64] {
        match self.settings.target {
            FitTarget::Contrast => &self.record.contrast,
            FitTarget::Transfer => &self.record.transfer,
        }
    }
}

impl LeastSquares for EnvelopeProblem<'_> {
    fn n_params(&self) -> usize {
        3
    }

    fn residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
        let cfg = self.config(p)?;
        let model = ramsey_scan(&cfg, &self.record.times, &self.settings.grid)?;
        let column = match self.settings.target {
            FitTarget::Contrast => model.contrast,
            FitTarget::Transfer => model.transfer,
        };
        Ok(column
            .iter()
            .zip(self.data())
            .map(|(m, d)| (m - d) * self.inv_sigma)
            .collect())
    }

    fn feasible(&self, p: &[f64]) -> bool {
        p[1] >= 0.0 && p[2] >= 0.0 && p.iter().all(|v| v.is_finite())
    }

    fn diff_step(&self, p: &[f64], j: usize) -> f64 {
        // the model's own step discretisation limits useful resolution
        let scale = p[0].abs().max(p[1]).max(1e-3);
        1e-5 * p[j].abs().max(1e-3 * scale)
    }
}

/// Fits Δ₀, ω_ex and γ_c of the mean-spin model to `record`.
///
/// The model uses the record's own Ramsey configuration (detuning, pulses) with
/// the settings' grid and step. The covariance is (JᵀJ)⁻¹ from the Jacobian at
/// the optimum, scaled by the residual variance when σ is not supplied.
pub fn fit_ssr_model(record: &RamseyRecord, initial: &RateSet, settings: &SsrFitSettings) -> Result<SsrFit> {
    if record.len() < MIN_SSR_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points, need at least {MIN_SSR_POINTS}",
            record.len()
        )));
    }
    if record.contrast.len() != record.len() || record.transfer.len() != record.len() {
        return Err(Error::invalid("record", "column length mismatch"));
    }
    initial.validate()?;
    if let Some(s) = settings.sigma {
        if !(s > 0.0) {
            return Err(Error::invalid("sigma", "must be positive"));
        }
    }
    let mut template = record.config;
    template.dt = settings.dt;
    let problem = EnvelopeProblem {
        record,
        template,
        settings,
        inv_sigma: settings.sigma.map_or(1.0, |s| 1.0 / s),
    };
    let start = [initial.delta0, initial.omega_ex, initial.gamma_c];
    let out = levenberg_marquardt(&problem, &start, &settings.lm)?;

    let n = record.len();
    let unweighted_rms = {
        let w = settings.sigma.unwrap_or(1.0);
        (out.objective / n as f64).sqrt() * w
    };
    let variance = match settings.sigma {
        Some(_) => 1.0,
        None => out.objective / (n - 3) as f64,
    };
    let (covariance, weakly_identified) = match out.covariance(variance) {
        Some(c) => {
            let corr = c[(0, 2)] / (c[(0, 0)] * c[(2, 2)]).sqrt();
            (to_array(&c), !(corr.abs() < 0.99) || ill_conditioned(&out.jacobian))
        }
        None => ([[f64::INFINITY; 3]; 3], true),
    };
    Ok(SsrFit {
        rates: RateSet::new(out.params[0], out.params[1], out.params[2], initial.mean_shift)?,
        covariance,
        weakly_identified,
        iterations: out.iterations,
        objective_history: out.history,
        residual_rms: unweighted_rms,
    })
}

fn to_array(m: &DMatrix<f64>) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 3]; 3];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    a
}

fn ill_conditioned(jac: &DMatrix<f64>) -> bool {
    let sv = (jac.transpose() * jac).symmetric_eigenvalues();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    !(min > 1e-12 * max)
}

/// Starting rates from the shape of a contrast curve.
///
/// Δ₀ follows from the early quadratic drop, C ≈ 1 − (3/2)(Δ₀t)²; ω_ex from the
/// first revival maximum, t_rev ≈ 4π/ω_ex (spins of length ½ precess about the
/// mean at ω_ex/2); γ_c is set to ω_ex/(4.8π). Without a revival ω_ex is taken
/// as 4|Δ₀|.
pub fn estimate_initial_rates(times: &[f64], contrast: &[f64], mean_shift: f64) -> Result<RateSet> {
    if times.len() != contrast.len() || times.len() < 3 {
        return Err(Error::InsufficientData("need at least three contrast samples".into()));
    }
    // first sample that has lost at least 5% contrast
    let (t1, c1) = times
        .iter()
        .zip(contrast)
        .find(|(t, c)| **t > 0.0 && **c < 0.95)
        .or_else(|| times.iter().zip(contrast).rfind(|(t, _)| **t > 0.0))
        .ok_or_else(|| Error::InsufficientData("no positive times".into()))?;
    let drop = (1.0 - c1).max(1e-6);
    let delta0 = (drop / 1.5).sqrt() / t1;

    let mut revival = None;
    let mut seen_min = false;
    for k in 1..contrast.len() - 1 {
        if contrast[k] < contrast[k - 1] && contrast[k] <= contrast[k + 1] {
            seen_min = true;
        } else if seen_min && contrast[k] > contrast[k - 1] && contrast[k] >= contrast[k + 1] {
            revival = Some(times[k]);
            break;
        }
    }
    let omega_ex = match revival {
        Some(t) => 4.0 * PI / t,
        None => 4.0 * delta0,
    };
    RateSet::new(delta0, omega_ex, omega_ex / (4.8 * PI), mean_shift)
}
