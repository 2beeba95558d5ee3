//! Exponential-rate extraction from interface trajectories.

use serde::Serialize;

/// Least-squares slope of `ln|dev|` against `t` over the usable window.
///
/// Points below the relative floor (round-off in `R - R*`) and the leading
/// transient (first fifth of the series) are dropped; `None` if fewer than
/// eight points survive.
pub fn fit_exponential_rate(t: &[f64], dev: &[f64], floor: f64) -> Option<f64> {
    fit_exponential_rate_window(t, dev, floor, 0.2, 1.0)
}

/// As `fit_exponential_rate`, fitting only samples inside the fractional
/// time window `[lo, hi]` of the series (useful for skipping the transient
/// where faster modes have not yet decayed).
pub fn fit_exponential_rate_window(
    t: &[f64],
    dev: &[f64],
    floor: f64,
    lo: f64,
    hi: f64,
) -> Option<f64> {
    assert_eq!(t.len(), dev.len());
    let t_end = *t.last()?;
    let t_start = t[0];
    let span = t_end - t_start;
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(dev)
        .filter(|(&x, _)| x >= t_start + lo * span && x <= t_start + hi * span)
        .filter(|(_, d)| d.abs() > floor)
        .map(|(&x, &d)| (x, d.abs().ln()))
        .collect();
    if pts.len() < 8 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Verdict of one stability experiment against the linearized prediction.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityVerdict {
    pub name: String,
    pub predicted_stable: bool,
    pub observed_stable: bool,
    pub fitted_rate: Option<f64>,
    pub spectral_rate: Option<f64>,
    /// `|fitted - spectral| / |spectral|` when both exist.
    pub rate_rel_error: Option<f64>,
}

impl StabilityVerdict {
    pub fn agrees(&self) -> bool {
        self.predicted_stable == self.observed_stable
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_synthetic_decay_rate() {
        let t: Vec<f64> = (0..200).map(|k| 0.01 * k as f64).collect();
        let dev: Vec<f64> = t.iter().map(|&x| 3e-4 * (-2.5 * x).exp()).collect();
        let rate = fit_exponential_rate(&t, &dev, 1e-14).unwrap();
        assert!((rate + 2.5).abs() < 1e-9, "rate {rate}");
    }

    #[test]
    fn too_few_points_gives_none() {
        let t = [0.0, 1.0, 2.0];
        let dev = [1.0, 0.5, 0.25];
        assert!(fit_exponential_rate(&t, &dev, 1e-14).is_none());
    }
}
