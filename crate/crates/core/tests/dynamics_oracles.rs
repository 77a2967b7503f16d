use proptest::prelude::*;
use ssr_core::dynamics::{evolve, ramsey_scan, terms, EnergyClassGrid, RamseyConfig, SpinEnsembleState};
use ssr_core::physics::RateSet;
use ssr_core::Vector3;

/// Composite Simpson rule on [a, b] with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Thermal density of ε for a 3D harmonic trap.
fn thermal(e: f64) -> f64 {
    0.5 * e * e * (-e).exp()
}

/// |⟨exp(iΔ₀ε t)⟩| over the untruncated thermal distribution.
fn dephasing_oracle(delta0: f64, t: f64) -> f64 {
    let re = simpson(|e| thermal(e) * (delta0 * e * t).cos(), 0.0, 60.0, 60_000);
    let im = simpson(|e| thermal(e) * (delta0 * e * t).sin(), 0.0, 60.0, 60_000);
    re.hypot(im)
}

fn fig1_dense() -> RateSet {
    RateSet::new(4.79, 110.2, 7.31, -7.35).unwrap()
}

#[test]
fn grid_moments_match_gamma_quadrature() {
    let grid = EnergyClassGrid::build(400, 30.0).unwrap();
    let mean = simpson(|e| e * thermal(e), 0.0, 30.0, 30_000) / simpson(thermal, 0.0, 30.0, 30_000);
    assert!((grid.mean_energy() - mean).abs() < 1e-3, "{} vs {mean}", grid.mean_energy());
    assert!((grid.energy_variance() - 3.0).abs() < 1e-2);
    let total: f64 = grid.weights().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn closed_form_dephasing_matches_quadrature() {
    for t in [0.0f64, 0.1, 0.4, 1.0, 2.5] {
        let closed = (1.0 + (3.0 * t).powi(2)).powf(-1.5f64);
        assert!((dephasing_oracle(3.0, t) - closed).abs() < 1e-9 * closed.max(1e-3));
    }
}

#[test]
fn pure_dephasing_envelope_matches_thermal_integral() {
    let delta0 = 3.34;
    let rates = RateSet::new(delta0, 0.0, 0.0, -7.0).unwrap();
    let cfg = RamseyConfig::new(rates, 15.0, 1e-3);
    let grid = EnergyClassGrid::build(200, 16.0).unwrap();
    let times: Vec<f64> = (0..50).map(|k| k as f64 / 49.0).collect();
    let rec = ramsey_scan(&cfg, &times, &grid).unwrap();
    for (t, c) in times.iter().zip(&rec.contrast) {
        let oracle = dephasing_oracle(delta0, *t);
        assert!((c - oracle).abs() <= 0.01 * oracle, "t={t}: {c} vs {oracle}");
    }
}

#[test]
fn contrast_is_one_after_first_pulse_and_bounded() {
    let grid = EnergyClassGrid::build(200, 16.0).unwrap();
    let cfg = RamseyConfig::new(fig1_dense(), 15.0, 5e-4);
    let times: Vec<f64> = (0..=200).map(|k| k as f64 * 5e-3).collect();
    let rec = ramsey_scan(&cfg, &times, &grid).unwrap();
    assert!((rec.contrast[0] - 1.0).abs() < 1e-12);
    assert!(rec.contrast.iter().all(|c| (0.0..=1.0 + 1e-12).contains(c)));
    assert!(rec.transfer.iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)));
}

#[test]
fn class_norms_conserved_without_collisions() {
    let grid = EnergyClassGrid::build(4, 8.0).unwrap();
    let rates = RateSet::new(3.0, 20.0, 0.0, 2.0).unwrap();
    let mut start = SpinEnsembleState::uniform(grid, Vector3::new(0.5, 0.0, 0.0));
    start.rotate_x(0.3);
    let dt = 5e-4;
    let steps = 1_000_000;
    let end = evolve(&start, dt * steps as f64, dt, &rates, 2.0).unwrap();
    for s in &end.spins {
        assert!((s.norm() - 0.5).abs() < 1e-8, "|S| = {}", s.norm());
    }
    // the spins did move appreciably
    assert!((end.spins[0] - start.spins[0]).norm() > 1e-2);
}

#[test]
fn mean_z_conserved_without_inhomogeneity() {
    let grid = EnergyClassGrid::build(16, 10.0).unwrap();
    let rates = RateSet::new(0.0, 30.0, 2.0, 4.0).unwrap();
    let mut state = SpinEnsembleState::uniform(grid, Vector3::new(0.5, 0.0, 0.0));
    // give the classes distinct orientations
    for (i, s) in state.spins.iter_mut().enumerate() {
        let a = 0.2 * i as f64;
        *s = Vector3::new(a.cos(), a.sin() * 0.6, a.sin() * 0.8) * 0.5;
    }
    let z0 = state.mean_spin().z;
    let end = evolve(&state, 2.0, 1e-3, &rates, 1.0).unwrap();
    assert!((end.mean_spin().z - z0).abs() < 1e-8);
    assert!((end.mean_spin().norm() - state.mean_spin().norm()).abs() < 1e-8);
}

#[test]
fn only_the_detuning_difference_matters() {
    let grid = EnergyClassGrid::build(200, 16.0).unwrap();
    let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
    let base = ramsey_scan(&RamseyConfig::new(fig1_dense(), 15.0, 5e-4), &times, &grid).unwrap();
    let mut shifted = fig1_dense();
    shifted.mean_shift += 123.0;
    let moved = ramsey_scan(&RamseyConfig::new(shifted, 138.0, 5e-4), &times, &grid).unwrap();
    for (a, b) in base.transfer.iter().zip(&moved.transfer) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn step_halving_converges() {
    let grid = EnergyClassGrid::build(200, 16.0).unwrap();
    let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
    let coarse = ramsey_scan(&RamseyConfig::new(fig1_dense(), 15.0, 5e-4), &times, &grid).unwrap();
    let fine = ramsey_scan(&RamseyConfig::new(fig1_dense(), 15.0, 2.5e-4), &times, &grid).unwrap();
    let worst = coarse
        .transfer
        .iter()
        .zip(&fine.transfer)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "max |ΔP| = {worst:e}");
}

#[test]
fn grid_doubling_converges() {
    let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
    let cfg = RamseyConfig::new(fig1_dense(), 15.0, 5e-4);
    let a = ramsey_scan(&cfg, &times, &EnergyClassGrid::build(200, 16.0).unwrap()).unwrap();
    let b = ramsey_scan(&cfg, &times, &EnergyClassGrid::build(400, 16.0).unwrap()).unwrap();
    let worst = a
        .contrast
        .iter()
        .zip(&b.contrast)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "max |ΔC| = {worst:e}");
}

fn spins_strategy(n: usize) -> impl Strategy<Value = Vec<Vector3<f64>>> {
    proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5), n)
        .prop_map(|v| v.into_iter().map(|(x, y, z)| Vector3::new(x, y, z)).collect())
}

proptest! {
    #[test]
    fn exchange_and_mixing_leave_mean_spin_unchanged(
        spins in spins_strategy(12),
        raw_w in proptest::collection::vec(0.01f64..1.0, 12),
        omega_ex in 0.0f64..200.0,
        gamma_c in 0.0f64..20.0,
    ) {
        let total: f64 = raw_w.iter().sum();
        let w: Vec<f64> = raw_w.iter().map(|x| x / total).collect();
        let ex = terms::weighted_sum(&w, &terms::exchange(&w, &spins, omega_ex));
        let mix = terms::weighted_sum(&w, &terms::mixing(&w, &spins, gamma_c));
        prop_assert!(ex.norm() < 1e-12 * omega_ex.max(1.0));
        prop_assert!(mix.norm() < 1e-12 * gamma_c.max(1.0));
    }

    #[test]
    fn precession_keeps_each_spin_length(
        spins in spins_strategy(6),
        det in proptest::collection::vec(-50.0f64..50.0, 6),
    ) {
        for (d, s) in terms::precession(&det, &spins).iter().zip(&spins) {
            prop_assert!(d.dot(s).abs() < 1e-12);
        }
    }
}
