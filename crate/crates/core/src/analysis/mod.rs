//! Fits to Ramsey data: sinusoidal fringes, the mean-spin model, and linear
//! shift extrapolations.

mod features;
mod fringe;
mod linear;
pub mod lm;
mod ssr_fit;

pub use features::{contrast_features, ContrastFeatures};
pub use fringe::{fit_fringe, fit_fringe_series, sliding_contrast, FringeFit, MIN_FRINGE_POINTS};
pub use linear::{
    extrapolate_dls, fit_shift_line, two_stage_extrapolation, Extrapolation, LinearFitResult, ShiftPoint,
    TrapSeries,
};
pub use lm::{LmOutcome, LmSettings};
pub use ssr_fit::{estimate_initial_rates, fit_ssr_model, FitTarget, SsrFit, SsrFitSettings, MIN_SSR_POINTS};
