#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Landmarks of a contrast curve C(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastFeatures {
    /// First time C drops below 1/e, linearly interpolated.
    pub one_over_e: Option<f64>,
    /// First local minimum (t, C).
    pub first_minimum: Option<(f64, f64)>,
    /// First local maximum after the first minimum that rises at least
    /// `prominence` above it.
    pub first_revival: Option<(f64, f64)>,
}

pub fn contrast_features(times: &[f64], contrast: &[f64], prominence: f64) -> Result<ContrastFeatures> {
    if times.len() != contrast.len() || times.len() < 3 {
        return Err(Error::InsufficientData("need at least three contrast samples".into()));
    }
    let threshold = (-1.0f64).exp();
    let one_over_e = (0..times.len()).find(|&k| contrast[k] < threshold).map(|k| {
        if k == 0 {
            return times[0];
        }
        let (c0, c1) = (contrast[k - 1], contrast[k]);
        times[k - 1] + (times[k] - times[k - 1]) * (c0 - threshold) / (c0 - c1)
    });
    let n = times.len();
    let min_idx = (1..n - 1).find(|&k| contrast[k] < contrast[k - 1] && contrast[k] <= contrast[k + 1]);
    let first_minimum = min_idx.map(|k| (times[k], contrast[k]));
    let first_revival = min_idx.and_then(|i| {
        let mut floor = contrast[i];
        for k in i + 1..n - 1 {
            floor = floor.min(contrast[k]);
            if contrast[k] > contrast[k - 1] && contrast[k] >= contrast[k + 1] && contrast[k] - floor >= prominence {
                return Some((times[k], contrast[k]));
            }
        }
        None
    });
    Ok(ContrastFeatures {
        one_over_e,
        first_minimum,
        first_revival,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn damped_revival() {
        let t: Vec<f64> = (0..400).map(|k| 0.005 * k as f64).collect();
        let c: Vec<f64> = t
            .iter()
            .map(|t| (-0.5 * t).exp() * (0.6 + 0.4 * (2.0 * core::f64::consts::PI * t).cos()))
            .collect();
        let f = contrast_features(&t, &c, 0.02).unwrap();
        let (tm, _) = f.first_minimum.unwrap();
        let (tr, cr) = f.first_revival.unwrap();
        assert!(tm > 0.45 && tm < 0.55, "{tm}");
        assert!(tr > 0.9 && tr < 1.0 && cr < 1.0, "{tr}");
        assert!(f.one_over_e.unwrap() > 0.3 && f.one_over_e.unwrap() < tm);
    }

    #[test]
    fn monotone_decay_has_no_revival() {
        let t: Vec<f64> = (0..100).map(|k| 0.1 * k as f64).collect();
        let c: Vec<f64> = t.iter().map(|t| (-t / 2.0).exp()).collect();
        let f = contrast_features(&t, &c, 0.01).unwrap();
        assert!(f.first_revival.is_none());
        assert!((f.one_over_e.unwrap() - 2.0).abs() < 0.01, "{f:?}");
    }
}
