//! Energy-class mean-spin dynamics and Ramsey sequences.
//!
//! Atoms are binned into classes of equal motional energy ε = E/(k_B T). Each
//! class carries one Bloch vector S_i (length ≤ 1/2, +z = |↑⟩) obeying
//!
//! ```text
//! dS_i/dt = [δ_i ẑ + ω_ex S̄] × S_i + γ_c (S̄ − S_i),    S̄ = Σ w_i S_i
//! ```
//!
//! with class detuning δ_i = 2π(mean_shift − mw_detuning) + Δ₀(ε_i − 3).
//! The exchange term rotates each spin about the ensemble mean; the collision
//! term relaxes classes toward the mean. Neither changes S̄.

mod ensemble;
mod grid;
mod ramsey;

pub use ensemble::{
    class_detuning, evolve, max_step_product, terms, SpinEnsembleState, MAX_STEP_PRODUCT,
    MEAN_THERMAL_ENERGY,
};
pub use grid::EnergyClassGrid;
pub use ramsey::{ramsey_scan, ramsey_sequence, PulseModel, RamseyConfig, RamseyRecord};
