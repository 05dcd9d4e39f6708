//! Physical parameters of the periodically rocked dissipative dimer and the
//! two-valued drive.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Constants defining one dimer instance.
///
/// `n_bosons` controls the Hilbert-space dimension `n_bosons + 1`; all other
/// fields are real couplings in units of the tunneling amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Tunneling amplitude J.
    pub j: f64,
    /// Interaction strength U.
    pub u: f64,
    /// Static energy offset between the sites.
    pub mu0: f64,
    /// Amplitude of the periodic offset modulation.
    pub mu1: f64,
    /// Dissipative coupling rate.
    pub gamma: f64,
    /// Total number of bosons N.
    pub n_bosons: u32,
    /// Drive period T.
    pub t_period: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            j: 1.0,
            u: 0.5,
            mu0: 1.0,
            mu1: 1.5,
            gamma: 0.1,
            n_bosons: 200,
            t_period: std::f64::consts::TAU,
        }
    }
}

impl ModelParams {
    /// Hilbert-space dimension of the fixed-particle-number sector.
    pub fn dim(&self) -> usize {
        self.n_bosons as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, key: &'static str, reason: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(CoreError::InvalidParam {
                    key,
                    reason: reason.to_string(),
                })
            }
        }
        check(self.n_bosons >= 1, "N", "must be a positive integer")?;
        check(
            self.t_period.is_finite() && self.t_period > 0.0,
            "T",
            "must be positive",
        )?;
        check(
            self.gamma.is_finite() && self.gamma >= 0.0,
            "gamma",
            "must be non-negative",
        )?;
        for (key, v) in [
            ("J", self.j),
            ("U", self.u),
            ("mu0", self.mu0),
            ("mu1", self.mu1),
        ] {
            check(v.is_finite(), key, "must be finite")?;
        }
        Ok(())
    }

    /// On-site energy offset at time `t`.
    pub fn epsilon(&self, t: f64) -> f64 {
        self.mu0 + self.mu1 * f64::from(quench(t, self.t_period))
    }
}

/// Unbiased two-valued quench function with period `period`.
///
/// Returns +1 for `t mod period` in (0, T/2] and -1 on (T/2, T]; the point
/// `t mod period == 0` closes the second half-period and maps to -1.
pub fn quench(t: f64, period: f64) -> i8 {
    debug_assert!(period > 0.0);
    let tau = t.rem_euclid(period);
    if tau > 0.0 && tau <= 0.5 * period {
        1
    } else {
        -1
    }
}
