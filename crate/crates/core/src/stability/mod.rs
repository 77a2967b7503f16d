//! Frequency-stability statistics and noise budgeting.

mod allan;
mod budget;
mod conversion;
mod synthesis;

pub use allan::{
    fit_log_slope, octave_multiples, overlapping_adev, overlapping_adev_m, white_fm_edf, white_noise_coefficient,
    AdevPoint, StabilitySeries,
};
pub use budget::{
    noise_budget, project_optimized, standard_sources, BudgetEntry, BudgetLevels, BudgetReport, BudgetScenario,
    NoiseSource, QpnInputs,
};
pub use conversion::{p_to_frequency, p_to_frequency_exact, qpn_limit, QUADRATURE_WINDOW};
pub use synthesis::{projection_noise_transfer, Modulation, NoiseSynthesis};
