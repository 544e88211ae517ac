//! Scalar Kalman filtering of an energy series.
//!
//! Random-walk-with-decay model: predict `x̂ = T·x`, `P̂ = T²·P + Q`; gain
//! `K = P̂ / (P̂ + MV)`; update `x' = (1 − K)·x̂ + K·z`, `P' = (1 − K)·P̂`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanConfig {
    /// Transition coefficient `T`.
    pub transition: f64,
    /// Measurement variance `MV`.
    pub measurement_variance: f64,
    /// Process variance `Q`; `None` means `1e-4·MV`.
    pub process_variance: Option<f64>,
    /// Initial estimate; `None` means the first measurement.
    pub x0: Option<f64>,
    /// Initial error variance; `None` means `MV + Q`.
    pub p0: Option<f64>,
}

impl KalmanConfig {
    pub fn new(transition: f64, measurement_variance: f64) -> Self {
        Self { transition, measurement_variance, process_variance: None, x0: None, p0: None }
    }

    /// The 2×3 grid `MV ∈ {0.01, 0.1}`, `T ∈ {0.9, 0.99, 1}`.
    pub fn grid() -> Vec<KalmanConfig> {
        let mut out = Vec::with_capacity(6);
        for mv in [0.01, 0.1] {
            for t in [0.9, 0.99, 1.0] {
                out.push(KalmanConfig::new(t, mv));
            }
        }
        out
    }

    pub fn q(&self) -> f64 {
        self.process_variance.unwrap_or(1e-4 * self.measurement_variance)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.transition.is_finite() {
            return Err(Error::config("Kalman transition coefficient must be finite"));
        }
        if !(self.measurement_variance >= 0.0 && self.measurement_variance.is_finite()) {
            return Err(Error::config("Kalman measurement variance must be finite and non-negative"));
        }
        if !(self.q() >= 0.0 && self.q().is_finite()) {
            return Err(Error::config("Kalman process variance must be finite and non-negative"));
        }
        if let Some(p0) = self.p0 {
            if !(p0 > 0.0 && p0.is_finite()) {
                return Err(Error::config("Kalman initial variance must be positive"));
            }
        }
        Ok(())
    }

    /// Starting state for a series whose first measurement is `z0`.
    pub fn initial_state(&self, z0: f64) -> KalmanState {
        KalmanState { x: self.x0.unwrap_or(z0), p: self.p0.unwrap_or(self.measurement_variance + self.q()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub x: f64,
    pub p: f64,
}

/// One predict/update cycle; also returns the gain used.
pub fn kalman_step(state: KalmanState, z: f64, cfg: &KalmanConfig) -> Result<(KalmanState, f64)> {
    if !(z.is_finite() && state.x.is_finite() && state.p.is_finite()) {
        return Err(Error::Run("non-finite Kalman input".into()));
    }
    let t = cfg.transition;
    let x_pred = t * state.x;
    let p_pred = t * t * state.p + cfg.q();
    let denom = p_pred + cfg.measurement_variance;
    // MV = 0 is an exact measurement: the gain is 1 even once P̂ has collapsed
    let k = if cfg.measurement_variance == 0.0 && p_pred >= 0.0 {
        1.0
    } else if denom <= 0.0 {
        return Err(Error::config("degenerate Kalman configuration: predicted variance plus MV is not positive"));
    } else {
        p_pred / denom
    };
    Ok((KalmanState { x: (1.0 - k) * x_pred + k * z, p: (1.0 - k) * p_pred }, k))
}

/// Filtered estimate after each measurement.
pub fn filter_series(series: &[f64], cfg: &KalmanConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let first = *series.first().ok_or_else(|| Error::config("cannot filter an empty series"))?;
    let mut state = cfg.initial_state(first);
    let mut out = Vec::with_capacity(series.len());
    for &z in series {
        state = kalman_step(state, z, cfg)?.0;
        out.push(state.x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mv_tracks_measurements() {
        let cfg = KalmanConfig { p0: Some(1.0), x0: Some(0.0), ..KalmanConfig::new(0.9, 0.0) };
        let z = [1.0, -2.0, 3.5, 0.25];
        assert_eq!(filter_series(&z, &cfg).unwrap(), z.to_vec());
    }

    #[test]
    fn huge_mv_holds_estimate() {
        let cfg = KalmanConfig { process_variance: Some(0.0), ..KalmanConfig::new(1.0, 1e12) };
        let (s, k) = kalman_step(KalmanState { x: 2.0, p: 1.0 }, 100.0, &cfg).unwrap();
        assert!(k < 1e-11);
        assert!((s.x - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_and_empty_inputs() {
        let cfg = KalmanConfig { process_variance: Some(0.0), ..KalmanConfig::new(1.0, 1.0) };
        assert!(kalman_step(KalmanState { x: 0.0, p: -1.0 }, 1.0, &cfg).is_err());
        assert!(filter_series(&[], &KalmanConfig::new(1.0, 0.1)).is_err());
        assert!(KalmanConfig::new(1.0, -0.1).validate().is_err());
        assert!(KalmanConfig { p0: Some(0.0), ..KalmanConfig::new(1.0, 0.1) }.validate().is_err());
    }

    #[test]
    fn constant_series_converges_monotonically() {
        let cfg = KalmanConfig { process_variance: Some(0.0), x0: Some(0.0), p0: Some(1.0), ..KalmanConfig::new(1.0, 0.5) };
        let out = filter_series(&[3.0; 50], &cfg).unwrap();
        let errs: Vec<f64> = out.iter().map(|x| (x - 3.0).abs()).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]));
        assert!(errs[49] < 0.1);
    }

    #[test]
    fn default_initialisation() {
        let cfg = KalmanConfig::new(0.99, 0.1);
        let s = cfg.initial_state(-1.5);
        assert_eq!(s.x, -1.5);
        assert!((s.p - (0.1 + 1e-5)).abs() < 1e-15);
        assert_eq!(KalmanConfig::grid().len(), 6);
    }
}
