//! The five subcommands. Each writes its CSV outputs and a plain-text summary
//! into the output directory and returns the summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use ssr_core::analysis::{
    contrast_features, estimate_initial_rates, fit_fringe_series, fit_shift_line, fit_ssr_model,
    two_stage_extrapolation, FringeFit, ShiftPoint, TrapSeries,
};
use ssr_core::constants::{PER_CM3_E12, RB87_HYPERFINE};
use ssr_core::dynamics::{ramsey_scan, RamseyConfig, RamseyRecord};
use ssr_core::physics::ssr_conditions;
use ssr_core::stability::{
    fit_log_slope, noise_budget, octave_multiples, overlapping_adev_m, p_to_frequency, standard_sources,
    white_noise_coefficient, AdevPoint, StabilitySeries,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::config::{Point, Scenario};
use crate::error::{CliError, CliResult};
use crate::io::{self, Shots, ALLAN_HEADER};

/// Prominence used to call a local contrast maximum a revival.
pub const REVIVAL_PROMINENCE: f64 = 0.005;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path) -> Self {
        Output { dir, files: Vec::new() }
    }

    fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        io::write_atomic(&path, contents.as_bytes())?;
        self.files.push(path);
        Ok(())
    }

    fn finish(mut self, command: &str, summary: String) -> CliResult<Outcome> {
        self.write(&format!("{command}.txt"), &summary)?;
        Ok(Outcome {
            summary,
            files: self.files,
        })
    }
}

/// Per-trial seed derived from the base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    base ^ index
}

fn param_csv(rows: &[(&str, f64, f64)]) -> String {
    let mut out = String::from("parameter,value,sigma\n");
    for (name, v, s) in rows {
        let _ = writeln!(out, "{name},{v:.8e},{s:.8e}");
    }
    out
}

pub fn predict(scenario: &Scenario, out: &Path) -> CliResult<Outcome> {
    if scenario.points.is_empty() {
        return Err(CliError::input(format!(
            "scenario `{}` has no [physics] or [rates] section",
            scenario.name
        )));
    }
    let mut csv = String::from(
        "label,temperature_nK,density_per_cm3_e12,delta0_per_s,omega_ex_per_s,gamma_c_per_s,mean_shift_Hz,\
         exchange_over_dephasing,exchange_over_collisions,condition_i,condition_ii\n",
    );
    let mut summary = format!("scenario {}\n", scenario.name);
    for p in &scenario.points {
        let r = &p.rates;
        let c = ssr_conditions(r)?;
        let (t_nk, n) = p
            .params
            .map_or((f64::NAN, f64::NAN), |q| (q.temperature * 1e9, q.mean_density / PER_CM3_E12));
        let _ = writeln!(
            csv,
            "{},{t_nk:.8e},{n:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{},{}",
            p.label,
            r.delta0,
            r.omega_ex,
            r.gamma_c,
            r.mean_shift,
            c.exchange_over_dephasing,
            c.exchange_over_collisions,
            c.dephasing_slower,
            c.collisions_slower
        );
        let _ = writeln!(
            summary,
            "{:>8}  Δ₀ = {:8.4} s⁻¹  ω_ex = {:8.4} s⁻¹  γ_c = {:7.4} s⁻¹  mean shift = {:8.4} Hz  \
             ω_ex/Δ₀ = {:6.2} ({})  ω_ex/(πγ_c) = {:5.2} ({}){}",
            p.label,
            r.delta0,
            r.omega_ex,
            r.gamma_c,
            r.mean_shift,
            c.exchange_over_dephasing,
            if c.dephasing_slower { "met" } else { "not met" },
            c.exchange_over_collisions,
            if c.collisions_slower { "met" } else { "not met" },
            if c.division_flag { "  [zero denominator]" } else { "" }
        );
    }
    let mut o = Output::new(out);
    o.write("predict.csv", &csv)?;
    o.finish("predict", summary)
}

/// Ramsey record of one scenario point, with optional Gaussian readout noise.
pub fn simulate_point(scenario: &Scenario, point: &Point, seed: u64) -> CliResult<RamseyRecord> {
    let seq = scenario
        .sequence
        .as_ref()
        .ok_or_else(|| CliError::input(format!("scenario `{}` has no [sequence] section", scenario.name)))?;
    let mut cfg = RamseyConfig::new(point.rates, seq.mw_detuning, scenario.dt);
    cfg.pulse_model = seq.pulse_model;
    let mut rec = ramsey_scan(&cfg, &seq.times, &scenario.grid)?;
    if let Some(sigma) = seq.noise_sigma.filter(|s| *s > 0.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).map_err(|e| CliError::input(e.to_string()))?;
        for k in 0..rec.len() {
            rec.transfer[k] += noise.sample(&mut rng);
            rec.contrast[k] += noise.sample(&mut rng);
        }
    }
    Ok(rec)
}

fn synthetic_shifts(scenario: &Scenario, seed: u64) -> CliResult<Option<Vec<TrapSeries>>> {
    let Some(ex) = &scenario.extrapolation else {
        return Ok(None);
    };
    let noise = Normal::new(0.0, ex.sigma_Hz).map_err(|e| CliError::input(e.to_string()))?;
    Ok(Some(
        ex.traps
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64));
                let base = ex.residual_Hz + ex.dls_Hz_per_kW_cm2 * t.mean_intensity_kW_cm2;
                TrapSeries {
                    mean_intensity: t.mean_intensity_kW_cm2,
                    points: t
                        .densities_per_cm3_e12
                        .iter()
                        .map(|&n| {
                            let shift = base + ex.density_slope_Hz_per_e12 * n + noise.sample(&mut rng);
                            ShiftPoint::new(n, shift, ex.sigma_Hz)
                        })
                        .collect(),
                }
            })
            .collect(),
    ))
}

pub fn simulate(scenario: &Scenario, out: &Path, seed: u64) -> CliResult<Outcome> {
    let mut o = Output::new(out);
    let mut summary = format!("scenario {}\n", scenario.name);
    let mut did_something = false;

    if let Some(traps) = synthetic_shifts(scenario, seed)? {
        did_something = true;
        o.write("shifts.csv", &io::traps_csv(&traps))?;
        for (k, t) in traps.iter().enumerate() {
            o.write(&format!("shift_trap_{k}.csv"), &io::shift_points_csv(&t.points))?;
            let _ = writeln!(
                summary,
                "trap {k}: {} points at {:.3} kW/cm²",
                t.points.len(),
                t.mean_intensity
            );
        }
    }

    if scenario.sequence.is_some() && !scenario.points.is_empty() {
        did_something = true;
        let records = scenario
            .points
            .par_iter()
            .enumerate()
            .map(|(k, p)| simulate_point(scenario, p, derive_seed(seed, k as u64)))
            .collect::<CliResult<Vec<_>>>()?;
        for (p, rec) in scenario.points.iter().zip(&records) {
            o.write(&format!("ramsey_{}.csv", p.label), &io::record_csv(rec))?;
            let f = contrast_features(&rec.times, &rec.contrast, REVIVAL_PROMINENCE)?;
            let _ = write!(
                summary,
                "{:>8}  Δ₀ = {:.4}  ω_ex = {:.4}  γ_c = {:.4}  1/e time = {}  first revival = {}",
                p.label,
                p.rates.delta0,
                p.rates.omega_ex,
                p.rates.gamma_c,
                f.one_over_e.map_or("none".into(), |t| format!("{t:.4} s")),
                f.first_revival
                    .map_or("none".into(), |(t, c)| format!("{t:.4} s (C = {c:.3})")),
            );
            if let Some([a, b]) = scenario.analysis.fringe_window_s {
                let (t, y) = window(&rec.times, &rec.transfer, a, b);
                match fit_fringe_series(&t, &y, None) {
                    Ok(fit) => {
                        let _ = write!(summary, "  fringe period = {:.3} ms", 1e3 * fit.period());
                    }
                    Err(e) => {
                        let _ = write!(summary, "  fringe fit failed: {e}");
                    }
                }
            }
            summary.push('\n');
        }
    }

    if !did_something {
        return Err(CliError::input(format!(
            "scenario `{}` has nothing to simulate (needs [sequence] with [physics]/[rates], or [extrapolation])",
            scenario.name
        )));
    }
    o.finish("simulate", summary)
}

fn window(t: &[f64], y: &[f64], a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    t.iter().zip(y).filter(|(t, _)| **t >= a && **t <= b).map(|(t, y)| (*t, *y)).unzip()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FitModel {
    /// Mean-spin model rates from a Ramsey record.
    Ssr,
    /// Sinusoidal fringe.
    Fringe,
    /// Straight line through `x,shift_hz,sigma_hz`.
    ShiftLine,
    /// Per-trap density lines, then intercepts versus intensity.
    TwoStage,
}

pub fn fit(scenario: Option<&Scenario>, data: &Path, model: FitModel, out: &Path) -> CliResult<Outcome> {
    let mut o = Output::new(out);
    let mut summary = format!("fit {} ({model:?})\n", data.display());
    match model {
        FitModel::ShiftLine => {
            let f = fit_shift_line(&io::read_shift_points(data)?)?;
            o.write(
                "fit.csv",
                &param_csv(&[
                    ("slope", f.slope, f.slope_sigma),
                    ("intercept", f.intercept, f.intercept_sigma),
                    ("chi2_reduced", f.chi2_reduced, 0.0),
                ]),
            )?;
            let _ = writeln!(
                summary,
                "slope = {:.4} ± {:.4}\nintercept = {:.4} ± {:.4}\nχ²/dof = {:.3}",
                f.slope, f.slope_sigma, f.intercept, f.intercept_sigma, f.chi2_reduced
            );
        }
        FitModel::TwoStage => {
            let ex = two_stage_extrapolation(&io::read_traps(data)?)?;
            let mut rows = Vec::new();
            let names: Vec<(String, String)> = (0..ex.per_trap.len())
                .map(|k| (format!("trap{k}_density_slope"), format!("trap{k}_intercept")))
                .collect();
            for (f, (s, i)) in ex.per_trap.iter().zip(&names) {
                rows.push((s.as_str(), f.slope, f.slope_sigma));
                rows.push((i.as_str(), f.intercept, f.intercept_sigma));
                let _ = writeln!(
                    summary,
                    "{s} = {:.4} ± {:.4}   {i} = {:.4} ± {:.4}",
                    f.slope, f.slope_sigma, f.intercept, f.intercept_sigma
                );
            }
            let f = ex.intensity_fit;
            rows.push(("dls_per_intensity", f.slope, f.slope_sigma));
            rows.push(("residual_shift", f.intercept, f.intercept_sigma));
            o.write("fit.csv", &param_csv(&rows))?;
            let _ = writeln!(
                summary,
                "differential light shift = {:.4} ± {:.4} Hz/(kW cm⁻²)\nresidual shift = {:.4} ± {:.4} Hz",
                f.slope, f.slope_sigma, f.intercept, f.intercept_sigma
            );
        }
        FitModel::Fringe => {
            let d = io::read_ramsey(data)?;
            let (t, y) = match scenario.and_then(|s| s.analysis.fringe_window_s) {
                Some([a, b]) => window(&d.times, &d.transfer, a, b),
                None => (d.times.clone(), d.transfer.clone()),
            };
            let f = fit_fringe_series(&t, &y, None)?;
            o.write(
                "fit.csv",
                &param_csv(&[
                    ("frequency_Hz", f.frequency, 0.0),
                    ("phase_rad", f.phase, 0.0),
                    ("contrast", f.contrast, 0.0),
                    ("offset", f.offset, 0.0),
                    ("residual_rms", f.residual_rms, 0.0),
                ]),
            )?;
            let _ = writeln!(
                summary,
                "frequency = {:.5} Hz (period {:.3} ms)\ncontrast = {:.4}\noffset = {:.4}\nresidual rms = {:.2e}",
                f.frequency,
                1e3 * f.period(),
                f.contrast,
                f.offset,
                f.residual_rms
            );
        }
        FitModel::Ssr => {
            let s = scenario.ok_or_else(|| {
                CliError::input("fit --model ssr needs --scenario or --config for grid and sequence settings")
            })?;
            let d = io::read_ramsey(data)?;
            let contrast = d.contrast.clone().ok_or_else(|| {
                CliError::input(format!("{}: the model fit needs a contrast column", data.display()))
            })?;
            let mean_shift = s.points.first().map_or(0.0, |p| p.rates.mean_shift);
            let initial = match s.analysis.initial {
                Some(r) => r.to_rates()?,
                None => estimate_initial_rates(&d.times, &contrast, mean_shift)?,
            };
            let seq = s.sequence.as_ref();
            let mut cfg = RamseyConfig::new(initial, seq.map_or(0.0, |q| q.mw_detuning), s.dt);
            if let Some(q) = seq {
                cfg.pulse_model = q.pulse_model;
            }
            let n = d.times.len();
            let record = RamseyRecord {
                times: d.times,
                transfer: d.transfer,
                contrast,
                phase: d.phase.unwrap_or_else(|| vec![0.0; n]),
                config: cfg,
            };
            let fit = fit_ssr_model(&record, &initial, &s.fit_settings())?;
            let sig = fit.sigmas();
            let r = fit.rates;
            o.write(
                "fit.csv",
                &param_csv(&[
                    ("delta0_per_s", r.delta0, sig[0]),
                    ("omega_ex_per_s", r.omega_ex, sig[1]),
                    ("gamma_c_per_s", r.gamma_c, sig[2]),
                ]),
            )?;
            let mut history = String::from("iteration,objective\n");
            for (k, v) in fit.objective_history.iter().enumerate() {
                let _ = writeln!(history, "{k},{v:.8e}");
            }
            o.write("fit_history.csv", &history)?;
            let mut model_cfg = cfg;
            model_cfg.rates = r;
            let model = ramsey_scan(&model_cfg, &record.times, &s.grid)?;
            o.write("fit_model.csv", &io::record_csv(&model))?;
            let _ = writeln!(
                summary,
                "initial: Δ₀ = {:.4}  ω_ex = {:.4}  γ_c = {:.4}\n\
                 Δ₀ = {:.5} ± {:.5} s⁻¹\nω_ex = {:.5} ± {:.5} s⁻¹\nγ_c = {:.5} ± {:.5} s⁻¹\n\
                 iterations = {}  residual rms = {:.3e}{}",
                initial.delta0,
                initial.omega_ex,
                initial.gamma_c,
                r.delta0,
                sig[0],
                r.omega_ex,
                sig[1],
                r.gamma_c,
                sig[2],
                fit.iterations,
                fit.residual_rms,
                if fit.weakly_identified {
                    "\nwarning: parameters weakly identified (strong Δ₀–γ_c correlation or near-singular covariance)"
                } else {
                    ""
                }
            );
        }
    }
    o.finish("fit", summary)
}

/// One-sigma (68 %) χ² interval for an Allan point.
pub fn confidence_interval(p: &AdevPoint) -> (f64, f64) {
    match ChiSquared::new(p.edf) {
        Ok(chi) => {
            let lo = p.adev * (p.edf / chi.inverse_cdf(0.8413)).sqrt();
            let hi = p.adev * (p.edf / chi.inverse_cdf(0.1587)).sqrt();
            (lo, hi)
        }
        Err(_) => (f64::NAN, f64::NAN),
    }
}

pub fn allan_points(series: &StabilitySeries) -> CliResult<Vec<AdevPoint>> {
    let ms = octave_multiples(series.count());
    if ms.is_empty() {
        return Err(CliError::Core(ssr_core::Error::InsufficientData(format!(
            "{} shots, need at least 3",
            series.count()
        ))));
    }
    Ok(ms
        .par_iter()
        .map(|&m| overlapping_adev_m(series, m))
        .collect::<Result<Vec<_>, _>>()?)
}

pub fn allan(
    scenario: Option<&Scenario>,
    data: Option<&Path>,
    cycle_time: Option<f64>,
    out: &Path,
    seed: u64,
) -> CliResult<Outcome> {
    let mut o = Output::new(out);
    let stab = scenario.and_then(|s| s.stability.as_ref());
    let cycle = cycle_time
        .or(stab.map(|s| s.cycle_time_s))
        .ok_or_else(|| CliError::input("allan needs --cycle-time-s or a scenario with a [stability] section"))?;
    let mut summary = String::new();
    let series = match data {
        Some(path) => {
            let y = match io::read_shots(path)? {
                Shots::Frequency(y) => y,
                Shots::Transfer(p) => {
                    let st = stab.ok_or_else(|| {
                        CliError::input("converting P to frequency needs a scenario with a [stability] section")
                    })?;
                    let nu0 = scenario
                        .and_then(|s| s.budget.map(|b| b.params.species.hyperfine_frequency))
                        .unwrap_or(RB87_HYPERFINE);
                    let fringe = FringeFit {
                        frequency: 0.0,
                        phase: 0.0,
                        contrast: st.contrast,
                        offset: st.offset_P,
                        residual_rms: 0.0,
                    };
                    p.iter()
                        .map(|&p| p_to_frequency(p, &fringe, st.interrogation_ms * 1e-3, nu0))
                        .collect::<Result<Vec<_>, _>>()?
                }
            };
            let _ = writeln!(summary, "data {}: {} shots", path.display(), y.len());
            StabilitySeries::new(y, cycle)?
        }
        None => {
            let (synth, shots) = scenario.and_then(|s| s.synthesis).ok_or_else(|| {
                CliError::input("allan needs --data or a scenario with a [stability] section to synthesize shots")
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let series = synth.generate(&mut rng, shots, cycle)?;
            o.write("shots.csv", &io::shots_csv("y", &series.y))?;
            let _ = writeln!(summary, "synthesized {shots} shots (seed {seed})");
            series
        }
    };
    let points = allan_points(&series)?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let (lo, hi) = confidence_interval(p);
            vec![p.tau, p.adev, lo, hi]
        })
        .collect();
    o.write("allan.csv", &io::numeric_csv(&ALLAN_HEADER, rows))?;
    for p in &points {
        let _ = writeln!(summary, "τ = {:9.1} s  σ_y = {:.3e}", p.tau, p.adev);
    }
    if let (Ok(a), Ok(slope)) = (white_noise_coefficient(&points), fit_log_slope(&points)) {
        let _ = writeln!(
            summary,
            "white-noise fit: {a:.3e} τ^(-1/2)  (log-log slope {slope:.3})"
        );
    } else {
        let _ = writeln!(summary, "white-noise fit: series has zero deviation");
    }
    o.finish("allan", summary)
}

pub fn budget(scenario: &Scenario, out: &Path) -> CliResult<Outcome> {
    let b = scenario.budget.ok_or_else(|| {
        CliError::input(format!(
            "scenario `{}` needs a [physics] section with one density and a [stability] section",
            scenario.name
        ))
    })?;
    let sources = standard_sources(&b)?;
    let report = noise_budget(&sources, &b.qpn())?;
    let mut csv = String::from("source,level,sensitivity_Hz_per_unit,one_shot,one_second\n");
    let mut table = format!(
        "noise budget: {}\ncycle time {:.2} s, interrogation {:.3} s, contrast {:.3}\n\n{:<16}{:>14}{:>14}\n",
        scenario.name, b.cycle_time, b.interrogation, b.contrast, "source", "one shot", "at 1 s"
    );
    for (src, e) in sources.iter().zip(&report.entries) {
        let _ = writeln!(
            csv,
            "{},{:.8e},{:.8e},{:.8e},{:.8e}",
            e.name,
            src.shot_level,
            src.sensitivity.unwrap_or(f64::NAN),
            e.one_shot,
            e.one_second
        );
        let _ = writeln!(table, "{:<16}{:>14.3e}{:>14.3e}", e.name, e.one_shot, e.one_second);
    }
    let _ = writeln!(
        csv,
        "total,,,{:.8e},{:.8e}\nqpn,{:.8e},,{:.8e},{:.8e}",
        report.total_one_shot, report.total_one_second, b.n_atoms, report.qpn_one_shot, report.qpn_one_second
    );
    let _ = writeln!(
        table,
        "{:-<44}\n{:<16}{:>14.3e}{:>14.3e}\n{:<16}{:>14.3e}{:>14.3e}  (N = {:.3e}, not in total)",
        "", "total (RSS)", report.total_one_shot, report.total_one_second, "projection", report.qpn_one_shot,
        report.qpn_one_second, b.n_atoms
    );
    let mut o = Output::new(out);
    o.write("budget.csv", &csv)?;
    o.finish("budget", table)
}
