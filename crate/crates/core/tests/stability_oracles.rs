use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssr_core::analysis::FringeFit;
use ssr_core::constants::RB87_HYPERFINE;
use ssr_core::stability::{
    fit_log_slope, noise_budget, octave_multiples, overlapping_adev_m, p_to_frequency, p_to_frequency_exact,
    projection_noise_transfer, qpn_limit, white_noise_coefficient, NoiseSource, NoiseSynthesis, QpnInputs,
    StabilitySeries,
};

/// Overlapping Allan variance written straight from its definition: averages
/// over every pair of adjacent length-m windows.
fn brute_adev(y: &[f64], m: usize) -> f64 {
    let n = y.len();
    let mut sum = 0.0;
    let mut count = 0;
    for j in 0..=(n - 2 * m) {
        let mut first = 0.0;
        let mut second = 0.0;
        for i in j..j + m {
            first += y[i];
            second += y[i + m];
        }
        let d = (second - first) / m as f64;
        sum += d * d;
        count += 1;
    }
    (sum / (2.0 * count as f64)).sqrt()
}

fn mid_fringe(contrast: f64) -> FringeFit {
    FringeFit {
        frequency: 1.0,
        phase: 0.0,
        contrast,
        offset: 0.5,
        residual_rms: 0.0,
    }
}

fn qpn() -> QpnInputs {
    QpnInputs {
        n_atoms: 2e5,
        interrogation: 0.35,
        cycle_time: 28.1,
        contrast: 0.6,
        nu0: RB87_HYPERFINE,
    }
}

proptest! {
    #[test]
    fn allan_matches_definition(y in proptest::collection::vec(-1.0f64..1.0, 3..=30)) {
        let series = StabilitySeries::new(y.clone(), 1.0).unwrap();
        for m in 1..=y.len() / 3 {
            let fast = overlapping_adev_m(&series, m).unwrap().adev;
            let slow = brute_adev(&y, m);
            prop_assert!((fast - slow).abs() <= 1e-12 * slow.max(1e-300), "m={} {} vs {}", m, fast, slow);
        }
    }

    #[test]
    fn budget_total_is_permutation_invariant(
        levels in proptest::collection::vec((1e-6f64..1e-2, 1e-2f64..1e3), 1..8),
        seed in any::<u64>(),
    ) {
        let sources: Vec<NoiseSource> = levels
            .iter()
            .enumerate()
            .map(|(i, &(l, s))| NoiseSource::new(format!("s{i}"), l, s))
            .collect();
        let mut shuffled = sources.clone();
        // Fisher–Yates driven by the seed
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = noise_budget(&sources, &qpn()).unwrap().total_one_shot;
        let b = noise_budget(&shuffled, &qpn()).unwrap().total_one_shot;
        prop_assert!((a - b).abs() <= 1e-14 * a);
    }

    #[test]
    fn budget_total_is_monotone_in_each_level(
        levels in proptest::collection::vec((1e-6f64..1e-2, 1e-2f64..1e3), 1..8),
        pick in any::<prop::sample::Index>(),
        factor in 1.0f64..10.0,
    ) {
        let sources: Vec<NoiseSource> = levels
            .iter()
            .enumerate()
            .map(|(i, &(l, s))| NoiseSource::new(format!("s{i}"), l, s))
            .collect();
        let mut raised = sources.clone();
        let k = pick.index(raised.len());
        raised[k].shot_level *= factor;
        let a = noise_budget(&sources, &qpn()).unwrap();
        let b = noise_budget(&raised, &qpn()).unwrap();
        prop_assert!(b.total_one_shot >= a.total_one_shot);
        // scaling every level scales the total linearly
        let doubled: Vec<NoiseSource> = sources
            .iter()
            .map(|s| NoiseSource::new(s.name.clone(), 2.0 * s.shot_level, s.sensitivity.unwrap()))
            .collect();
        let c = noise_budget(&doubled, &qpn()).unwrap();
        prop_assert!((c.total_one_shot - 2.0 * a.total_one_shot).abs() <= 1e-12 * a.total_one_shot);
    }

    #[test]
    fn linear_conversion_round_trips_through_exact_fringe(frac in -0.2f64..0.2, contrast in 0.2f64..1.0) {
        let fit = mid_fringe(contrast);
        let t_r = 0.35;
        let p = 0.5 + frac * contrast;
        let y = p_to_frequency(p, &fit, t_r, RB87_HYPERFINE).unwrap();
        let back = 0.5 + 0.5 * contrast * (2.0 * std::f64::consts::PI * y * RB87_HYPERFINE * t_r).sin();
        // measured against the fringe amplitude C
        prop_assert!((back - p).abs() <= 0.01 * contrast);
        let exact = p_to_frequency_exact(p, &fit, t_r, RB87_HYPERFINE).unwrap();
        let back = 0.5 + 0.5 * contrast * (2.0 * std::f64::consts::PI * exact * RB87_HYPERFINE * t_r).sin();
        prop_assert!((back - p).abs() < 1e-12);
    }
}

fn log_slope_over_decade(series: &StabilitySeries) -> f64 {
    let points: Vec<_> = [1, 2, 4, 8, 16, 32, 64]
        .iter()
        .filter(|m| 3 * **m <= series.count())
        .map(|&m| overlapping_adev_m(series, m).unwrap())
        .filter(|p| p.m <= 16)
        .collect();
    fit_log_slope(&points).unwrap()
}

#[test]
fn white_fm_slope_is_minus_one_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let series = NoiseSynthesis::white(1e-12).generate(&mut rng, 1000, 1.0).unwrap();
    let slope = log_slope_over_decade(&series);
    assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
}

#[test]
fn random_walk_fm_slope_is_plus_one_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let synth = NoiseSynthesis {
        random_walk: 1e-12,
        ..NoiseSynthesis::default()
    };
    let series = synth.generate(&mut rng, 1000, 1.0).unwrap();
    let slope = log_slope_over_decade(&series);
    assert!((slope - 0.5).abs() < 0.1, "slope {slope}");
}

#[test]
fn projection_noise_through_the_pipeline_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (n_atoms, t_r, t_c, contrast) = (10_000u64, 0.35, 28.1, 1.0);
    let fit = mid_fringe(contrast);
    let p = projection_noise_transfer(&mut rng, n_atoms, 0.5, 10_000).unwrap();
    let y: Vec<f64> = p
        .iter()
        .map(|p| p_to_frequency(*p, &fit, t_r, RB87_HYPERFINE).unwrap())
        .collect();
    let series = StabilitySeries::new(y, t_c).unwrap();
    let points: Vec<_> = octave_multiples(series.count())
        .into_iter()
        .map(|m| overlapping_adev_m(&series, m).unwrap())
        .collect();
    let measured = white_noise_coefficient(&points).unwrap();
    let expected = qpn_limit(n_atoms as f64, t_r, t_c, contrast, RB87_HYPERFINE).unwrap();
    assert!((measured / expected - 1.0).abs() < 0.1, "{measured:e} vs {expected:e}");
}
