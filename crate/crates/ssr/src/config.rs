//! Scenario files. Keys carry their unit as a suffix; unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use ssr_core::analysis::{FitTarget, LmSettings};
use ssr_core::constants::{bohr_to_m, density_from_cm3_e12, AMU, MILLIGAUSS, NANOKELVIN, RB87_HYPERFINE, RB87_MASS};
use ssr_core::dynamics::{EnergyClassGrid, PulseModel};
use ssr_core::physics::{calibrate_collision, AtomSpecies, PhysicalParams, RateSet, RB87_ZEEMAN};
use ssr_core::stability::{BudgetLevels, BudgetScenario, Modulation, NoiseSynthesis};

use crate::error::{CliError, CliResult};

/// Exchange-channel scattering length used when a file gives none, a_B.
/// Back-solved from the exchange-to-dephasing ratios of the density series.
pub const DEFAULT_A_UD_BOHR: f64 = 96.83;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub species: SpeciesSection,
    pub physics: Option<PhysicsSection>,
    pub rates: Option<RatesSection>,
    #[serde(default)]
    pub grid: GridSection,
    pub sequence: Option<SequenceSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    pub stability: Option<StabilitySection>,
    pub extrapolation: Option<ExtrapolationSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SpeciesSection {
    pub mass_amu: Option<f64>,
    pub a_uu_aB: Option<f64>,
    pub a_uu_m: Option<f64>,
    pub a_dd_aB: Option<f64>,
    pub a_dd_m: Option<f64>,
    pub a_ud_aB: Option<f64>,
    pub a_ud_m: Option<f64>,
    pub hyperfine_Hz: Option<f64>,
    pub zeeman_Hz_per_G2: Option<f64>,
}


#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct PhysicsSection {
    pub temperature_nK: f64,
    pub density_per_cm3_e12: OneOrMany,
    pub mean_trap_frequency_Hz: Option<f64>,
    #[serde(default)]
    pub dls_Hz_per_kW_cm2: f64,
    #[serde(default)]
    pub total_ls_Hz_per_kW_cm2: f64,
    #[serde(default)]
    pub mean_intensity_kW_cm2: f64,
    #[serde(default)]
    pub magnetic_field_mG: f64,
    pub dephasing_correction: Option<f64>,
    pub exchange_correction: Option<f64>,
    pub exchange_density_factor: Option<f64>,
    pub collision_calibration: Option<f64>,
    pub collision_reference: Option<CollisionReference>,
}

/// Fixes the collision prefactor so that ω_ex/(πγ_c) = `ratio` at `temperature_nK`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct CollisionReference {
    pub temperature_nK: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct RatesSection {
    pub delta0_per_s: f64,
    pub omega_ex_per_s: f64,
    pub gamma_c_per_s: f64,
    #[serde(default)]
    pub mean_shift_Hz: f64,
}

impl RatesSection {
    pub fn to_rates(self) -> CliResult<RateSet> {
        Ok(RateSet::new(
            self.delta0_per_s,
            self.omega_ex_per_s,
            self.gamma_c_per_s,
            self.mean_shift_Hz,
        )?)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_classes")]
    pub n_classes: usize,
    #[serde(default = "default_epsilon_max")]
    pub epsilon_max: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
}

fn default_classes() -> usize {
    200
}
fn default_epsilon_max() -> f64 {
    16.0
}
fn default_dt() -> f64 {
    1e-3
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n_classes: default_classes(),
            epsilon_max: default_epsilon_max(),
            dt_s: default_dt(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SequenceSection {
    pub times_s: Option<Vec<f64>>,
    pub t_start_s: Option<f64>,
    pub t_stop_s: Option<f64>,
    pub n_times: Option<usize>,
    #[serde(default)]
    pub mw_detuning_Hz: f64,
    pub pulse_duration_us: Option<f64>,
    /// Gaussian noise added to the simulated P and contrast columns.
    pub noise_sigma_P: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TargetKey {
    #[default]
    Contrast,
    Transfer,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct AnalysisSection {
    pub fringe_window_s: Option<[f64; 2]>,
    #[serde(default)]
    pub fit_target: TargetKey,
    /// Per-point σ of the fitted column; estimated from residuals when absent.
    pub sigma: Option<f64>,
    pub max_iterations: Option<usize>,
    /// Starting point of the model fit; estimated from the data when absent.
    pub initial: Option<RatesSection>,
    /// Window over which the sliding contrast is fitted, in fringe periods.
    pub contrast_window_periods: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct StabilitySection {
    pub interrogation_ms: f64,
    pub cycle_time_s: f64,
    pub contrast: f64,
    /// Not published; inferred from the projection-noise limit.
    pub n_atoms: f64,
    #[serde(default = "half")]
    pub offset_P: f64,
    #[serde(default)]
    pub intensity_rel: f64,
    #[serde(default)]
    pub pointing_um: f64,
    #[serde(default = "default_waist")]
    pub beam_waist_um: f64,
    #[serde(default)]
    pub magnetic_mG: f64,
    #[serde(default)]
    pub density_rel: f64,
    #[serde(default)]
    pub temperature_nK: f64,
    #[serde(default)]
    pub detection_P: f64,
    #[serde(default)]
    pub maser_frac: f64,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default)]
    pub white_sigma: f64,
    #[serde(default)]
    pub random_walk_sigma: f64,
    pub modulation_amplitude: Option<f64>,
    pub modulation_period_s: Option<f64>,
}

fn half() -> f64 {
    0.5
}
fn default_waist() -> f64 {
    60.0
}
fn default_shots() -> usize {
    215
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct ExtrapolationSection {
    pub dls_Hz_per_kW_cm2: f64,
    pub residual_Hz: f64,
    pub density_slope_Hz_per_e12: f64,
    pub sigma_Hz: f64,
    pub traps: Vec<TrapSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct TrapSection {
    pub trap_frequency_Hz: f64,
    pub mean_intensity_kW_cm2: f64,
    pub densities_per_cm3_e12: Vec<f64>,
}

/// One operating point of a scenario.
#[derive(Debug, Clone)]
pub struct Point {
    pub label: String,
    /// `None` when the scenario gives the rates directly.
    pub params: Option<PhysicalParams>,
    pub rates: RateSet,
}

#[derive(Debug, Clone)]
pub struct Sequence {
    pub times: Vec<f64>,
    pub mw_detuning: f64,
    pub pulse_model: PulseModel,
    pub noise_sigma: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub output_dir: Option<PathBuf>,
    pub points: Vec<Point>,
    pub grid: EnergyClassGrid,
    pub dt: f64,
    pub sequence: Option<Sequence>,
    pub analysis: AnalysisSection,
    pub budget: Option<BudgetScenario>,
    pub synthesis: Option<(NoiseSynthesis, usize)>,
    pub stability: Option<StabilitySection>,
    pub extrapolation: Option<ExtrapolationSection>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| CliError::input(format!("config: {e}")))?;
        file.resolve()
    }

    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Input(m) => CliError::input(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn fit_settings(&self) -> ssr_core::analysis::SsrFitSettings {
        let mut lm = LmSettings::default();
        if let Some(n) = self.analysis.max_iterations {
            lm.max_iterations = n;
        }
        ssr_core::analysis::SsrFitSettings {
            grid: self.grid.clone(),
            dt: self.dt,
            target: match self.analysis.fit_target {
                TargetKey::Contrast => FitTarget::Contrast,
                TargetKey::Transfer => FitTarget::Transfer,
            },
            sigma: self.analysis.sigma,
            lm,
        }
    }
}

fn length(name: &str, bohr: Option<f64>, metres: Option<f64>, default_bohr: f64) -> CliResult<f64> {
    match (bohr, metres) {
        (Some(_), Some(_)) => Err(CliError::input(format!(
            "species: give only one of {name}_aB and {name}_m"
        ))),
        (Some(b), None) => Ok(bohr_to_m(b)),
        (None, Some(m)) => Ok(m),
        (None, None) => Ok(bohr_to_m(default_bohr)),
    }
}

impl SpeciesSection {
    fn resolve(&self) -> CliResult<AtomSpecies> {
        let mut s = AtomSpecies::rb87(
            length("a_uu", self.a_uu_aB, self.a_uu_m, 94.55)?,
            length("a_dd", self.a_dd_aB, self.a_dd_m, 100.76)?,
            length("a_ud", self.a_ud_aB, self.a_ud_m, DEFAULT_A_UD_BOHR)?,
        );
        s.mass = self.mass_amu.map_or(RB87_MASS, |m| m * AMU);
        s.hyperfine_frequency = self.hyperfine_Hz.unwrap_or(RB87_HYPERFINE);
        s.zeeman_coefficient = self.zeeman_Hz_per_G2.unwrap_or(RB87_ZEEMAN);
        s.validate()?;
        Ok(s)
    }
}

impl PhysicsSection {
    fn resolve(&self, species: AtomSpecies) -> CliResult<Vec<PhysicalParams>> {
        let densities = self.density_per_cm3_e12.values();
        if densities.is_empty() {
            return Err(CliError::input("physics: density_per_cm3_e12 is empty"));
        }
        let mut base = PhysicalParams::new(species, self.temperature_nK * NANOKELVIN, 0.0);
        base.mean_trap_frequency = self.mean_trap_frequency_Hz.unwrap_or(0.0) * 2.0 * PI;
        base.dls_per_intensity = self.dls_Hz_per_kW_cm2;
        base.total_ls_per_intensity = self.total_ls_Hz_per_kW_cm2;
        base.mean_intensity = self.mean_intensity_kW_cm2;
        base.magnetic_field = self.magnetic_field_mG * MILLIGAUSS;
        if let Some(v) = self.dephasing_correction {
            base.dephasing_correction = v;
        }
        if let Some(v) = self.exchange_correction {
            base.exchange_correction = v;
        }
        if let Some(v) = self.exchange_density_factor {
            base.exchange_density_factor = v;
        }
        base.collision_calibration = match (self.collision_calibration, self.collision_reference) {
            (Some(_), Some(_)) => {
                return Err(CliError::input(
                    "physics: give only one of collision_calibration and collision_reference",
                ))
            }
            (Some(c), None) => c,
            (None, Some(r)) => {
                let mut reference = base;
                reference.temperature = r.temperature_nK * NANOKELVIN;
                reference.mean_density = density_from_cm3_e12(densities[0]);
                calibrate_collision(&reference, r.ratio)?
            }
            (None, None) => 0.0,
        };
        densities
            .iter()
            .map(|&n| {
                let mut p = base;
                p.mean_density = density_from_cm3_e12(n);
                p.validate()?;
                Ok(p)
            })
            .collect()
    }
}

impl SequenceSection {
    fn resolve(&self) -> CliResult<Sequence> {
        let times = match (&self.times_s, self.t_start_s, self.t_stop_s, self.n_times) {
            (Some(t), None, None, None) => t.clone(),
            (None, start, Some(stop), Some(n)) => {
                let start = start.unwrap_or(0.0);
                if n < 2 || !(stop > start) {
                    return Err(CliError::input("sequence: need n_times ≥ 2 and t_stop_s > t_start_s"));
                }
                (0..n)
                    .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                    .collect()
            }
            _ => {
                return Err(CliError::input(
                    "sequence: give either times_s or t_stop_s and n_times (t_start_s optional)",
                ))
            }
        };
        if times.is_empty() {
            return Err(CliError::input("sequence: no interrogation times"));
        }
        let pulse_model = match self.pulse_duration_us {
            Some(d) => PulseModel::Finite { duration: d * 1e-6 },
            None => PulseModel::Instantaneous,
        };
        if let Some(s) = self.noise_sigma_P {
            if !(s >= 0.0) {
                return Err(CliError::input("sequence: noise_sigma_P must be non-negative"));
            }
        }
        Ok(Sequence {
            times,
            mw_detuning: self.mw_detuning_Hz,
            pulse_model,
            noise_sigma: self.noise_sigma_P,
        })
    }
}

fn density_label(n: f64) -> String {
    format!("n{n:.2}")
}

impl ScenarioFile {
    pub fn resolve(self) -> CliResult<Scenario> {
        let species = self.species.resolve()?;
        let points = match (&self.physics, self.rates) {
            (Some(_), Some(_)) => {
                return Err(CliError::input("give either a [physics] or a [rates] section, not both"))
            }
            (Some(ph), None) => {
                let densities = ph.density_per_cm3_e12.values();
                ph.resolve(species)?
                    .into_iter()
                    .zip(densities)
                    .map(|(p, n)| {
                        Ok(Point {
                            label: density_label(n),
                            rates: RateSet::predict(&p)?,
                            params: Some(p),
                        })
                    })
                    .collect::<CliResult<Vec<_>>>()?
            }
            (None, Some(r)) => vec![Point {
                label: "rates".into(),
                params: None,
                rates: r.to_rates()?,
            }],
            (None, None) => Vec::new(),
        };
        let grid = EnergyClassGrid::build(self.grid.n_classes, self.grid.epsilon_max)?;
        if !(self.grid.dt_s > 0.0 && self.grid.dt_s.is_finite()) {
            return Err(CliError::input("grid: dt_s must be positive"));
        }
        let sequence = self.sequence.as_ref().map(SequenceSection::resolve).transpose()?;

        let mut budget = None;
        let mut synthesis = None;
        if let Some(st) = &self.stability {
            if let Some(p) = points.first().and_then(|p| p.params) {
                if points.len() > 1 {
                    return Err(CliError::input("stability: needs a single density point"));
                }
                budget = Some(BudgetScenario {
                    params: p,
                    levels: BudgetLevels {
                        intensity: st.intensity_rel,
                        pointing: st.pointing_um * 1e-6,
                        beam_waist: st.beam_waist_um * 1e-6,
                        magnetic_field: st.magnetic_mG * MILLIGAUSS,
                        density: st.density_rel,
                        temperature: st.temperature_nK * NANOKELVIN,
                        detection: st.detection_P,
                        maser: st.maser_frac,
                    },
                    interrogation: st.interrogation_ms * 1e-3,
                    cycle_time: st.cycle_time_s,
                    contrast: st.contrast,
                    n_atoms: st.n_atoms,
                });
            }
            let modulation = match (st.modulation_amplitude, st.modulation_period_s) {
                (Some(amplitude), Some(period)) => Some(Modulation { amplitude, period }),
                (None, None) => None,
                _ => {
                    return Err(CliError::input(
                        "stability: modulation needs both modulation_amplitude and modulation_period_s",
                    ))
                }
            };
            synthesis = Some((
                NoiseSynthesis {
                    white: st.white_sigma,
                    random_walk: st.random_walk_sigma,
                    modulation,
                },
                st.shots,
            ));
        }
        if let Some(ex) = &self.extrapolation {
            if ex.traps.len() < 2 || !(ex.sigma_Hz > 0.0) {
                return Err(CliError::input(
                    "extrapolation: need at least two traps and a positive sigma_Hz",
                ));
            }
        }
        Ok(Scenario {
            name: self.name,
            description: self.description,
            output_dir: self.output_dir,
            points,
            grid,
            dt: self.grid.dt_s,
            sequence,
            analysis: self.analysis,
            budget,
            synthesis,
            stability: self.stability,
            extrapolation: self.extrapolation,
        })
    }
}
