//! Error types shared by the simulation modules.

use thiserror::Error;

/// Errors surfaced by the core numerical routines.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A model or run parameter failed validation.
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: &'static str, reason: String },

    /// An expectation value was requested for a state with vanishing norm.
    #[error("state norm underflow at t = {t}: expectation undefined for a zero-norm state")]
    ZeroNormState { t: f64 },

    /// A quantum jump was triggered on a state annihilated by the jump
    /// operator; the post-jump state is undefined.
    #[error("jump from a dark state at t = {t}: ||V psi|| = {v_norm:.3e}")]
    DarkStateJump { t: f64, v_norm: f64 },

    /// The perturbation direction stayed (numerically) dark to the chosen
    /// observable after the allowed number of redraws.
    #[error("could not realize an observable mismatch of {delta0:.3e} after {redraws} redraws")]
    DegeneratePerturbation { delta0: f64, redraws: usize },

    /// Bisection failed to place the observable mismatch within tolerance.
    #[error("mismatch calibration failed: target {target:.3e}, best {achieved:.3e}")]
    MismatchCalibration { target: f64, achieved: f64 },

    /// The Bloch-sphere flow approached a coordinate pole.
    #[error("polar angle {theta} outside guard band at t = {t}")]
    PoleGuard { theta: f64, t: f64 },

    /// An ensemble reduction was requested on an empty collection.
    #[error("empty ensemble: {what}")]
    EmptyEnsemble { what: &'static str },

    /// Propagation failed inside one member of an ensemble.
    #[error("pair {pair}: {source}")]
    PairFailure {
        pair: usize,
        #[source]
        source: Box<CoreError>,
    },

    /// Two sweep grids that had to match do not.
    #[error("grid mismatch: {reason}")]
    GridMismatch { reason: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
