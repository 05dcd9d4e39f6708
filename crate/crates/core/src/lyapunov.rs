//! Largest-Lyapunov-exponent estimation from a fiducial/auxiliary pair of
//! quantum trajectories.
//!
//! The distance between the pair is the mismatch of a scalar observable
//! (left-site fraction or energy). The auxiliary state starts at mismatch
//! `delta0`; whenever the mismatch exceeds `delta_max` (threshold mode) or a
//! fixed interval elapses (fixed-tau mode), the growth factor
//! `d_k = Delta(t_k)/delta0` is logged and the auxiliary state is pulled back
//! toward the fiducial one along the mismatch direction until the observable
//! gap is `delta0` again. The exponent is `lambda = (1/t) sum ln d_k`.
//!
//! Both members of a pair read jump thresholds from one shared stream,
//! indexed by their own jump counts: identical threshold sequences keep the
//! stochastic jump pattern common to the pair, so the mismatch growth
//! reflects the dynamics rather than independent noise realizations.

use crate::error::{CoreError, Result};
use crate::fock::{OperatorSet, StateVector};
use crate::rng::{derive, ThresholdStream};
use crate::trajectory::{Engine, NullSink, ThresholdSource, Trajectory, TrajectoryConfig};
use ndarray::Array1;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Scalar observable used for the pair distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    /// Left-site particle fraction, in [0, 1].
    Number,
    /// Energy of the instantaneous half-period Hamiltonian.
    Energy,
}

impl Observable {
    fn eval(&self, ops: &OperatorSet, psi: &StateVector, q: i8) -> f64 {
        match self {
            Observable::Number => ops.number_fraction(psi),
            Observable::Energy => ops.energy(psi, q),
        }
    }
}

/// When the auxiliary trajectory is pulled back to mismatch `delta0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RenormMode {
    /// Renormalize when the mismatch exceeds `delta_max`.
    Threshold,
    /// Renormalize unconditionally every `tau`.
    FixedTau,
}

/// Controls for one Lyapunov estimation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    /// Observable mismatch right after (re)initialization.
    pub delta0: f64,
    /// Renormalization threshold (threshold mode).
    pub delta_max: f64,
    pub observable: Observable,
    pub mode: RenormMode,
    /// Renormalization interval (fixed-tau mode); multiple of `dt_sub`.
    pub tau: f64,
    /// Accumulation horizon per pair.
    pub t_total: f64,
    /// Number of independent pairs averaged.
    pub m_r: usize,
}

impl LyapunovConfig {
    /// Threshold-mode defaults for drive period `t_period`.
    pub fn for_period(t_period: f64) -> Self {
        Self {
            delta0: 1e-4,
            delta_max: 0.1,
            observable: Observable::Number,
            mode: RenormMode::Threshold,
            tau: t_period,
            t_total: 1000.0 * t_period,
            m_r: 100,
        }
    }

    /// Fixed-interval variant; chaotic growth over one interval must stay in
    /// the linear regime, which needs a much smaller initial mismatch.
    pub fn fixed_tau_for_period(t_period: f64) -> Self {
        Self {
            delta0: 1e-6,
            mode: RenormMode::FixedTau,
            ..Self::for_period(t_period)
        }
    }

    pub fn validate(&self, dt_sub: f64) -> Result<()> {
        if !(self.delta0 > 0.0 && self.delta0 < self.delta_max) {
            return Err(CoreError::InvalidParam {
                key: "delta0",
                reason: format!("need 0 < delta0 ({}) < delta_max ({})", self.delta0, self.delta_max),
            });
        }
        if self.m_r == 0 {
            return Err(CoreError::InvalidParam {
                key: "M_r",
                reason: "need at least one pair".into(),
            });
        }
        if self.mode == RenormMode::FixedTau {
            let m = (self.tau / dt_sub).round();
            if m < 1.0 || (m * dt_sub - self.tau).abs() > 1e-9 * self.tau {
                return Err(CoreError::InvalidParam {
                    key: "tau",
                    reason: format!("{} is not a multiple of dt_sub", self.tau),
                });
            }
        }
        Ok(())
    }
}

/// One logged renormalization event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvent {
    /// Pair time of the event (measured from pair initialization).
    pub t: f64,
    /// Growth factor `Delta(t)/delta0`.
    pub d: f64,
}

/// Growth-factor log and finite-time exponent series of one pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LyapunovRun {
    pub growth_log: Vec<GrowthEvent>,
    /// `(t_k, lambda(t_k))` at each renormalization event.
    pub lambda_series: Vec<(f64, f64)>,
    /// Endpoint of the series; 0 when no event occurred.
    pub lambda_final: f64,
}

impl LyapunovRun {
    fn push(&mut self, t: f64, d: f64) {
        self.growth_log.push(GrowthEvent { t, d });
        let cum: f64 = self.growth_log.iter().map(|e| e.d.ln()).sum();
        let lambda = cum / t;
        self.lambda_series.push((t, lambda));
        self.lambda_final = lambda;
    }
}

/// Cumulative finite-time exponent reconstructed from the growth log.
pub fn finite_time_series(run: &LyapunovRun) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(run.growth_log.len());
    let mut cum = 0.0;
    for event in &run.growth_log {
        cum += event.d.ln();
        out.push((event.t, cum / event.t));
    }
    out
}

const MAX_REDRAWS: usize = 100;
const BISECT_TOL: f64 = 0.01;
const EPS_HI_MAX: f64 = 1e3;

/// Build the auxiliary state: draw a complex Gaussian direction, scale it so
/// the normalized perturbed state differs from `psi_f` by `delta0` in the
/// observable, within 1% relative tolerance.
pub fn init_perturbed(
    psi_f: &StateVector,
    delta0: f64,
    observable: Observable,
    ops: &OperatorSet,
    q: i8,
    rng: &mut impl Rng,
) -> Result<StateVector> {
    debug_assert!((psi_f.norm_sqr() - 1.0).abs() < 1e-9);
    let obs_f = observable.eval(ops, psi_f, q);
    let dim = psi_f.dim();

    for _redraw in 0..MAX_REDRAWS {
        let direction: Array1<Complex64> = Array1::from_iter(
            (0..dim).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))),
        );
        let candidate = |eps: f64| -> Result<(StateVector, f64)> {
            let psi = StateVector::new(&psi_f.amplitudes + &direction.mapv(|x| x * eps))
                .normalized()?;
            let gap = (observable.eval(ops, &psi, q) - obs_f).abs();
            Ok((psi, gap))
        };

        // Grow eps until the mismatch reaches delta0.
        let mut hi = 1e-6;
        let mut lo = 0.0;
        let mut reached = false;
        while hi <= EPS_HI_MAX {
            let (_, gap) = candidate(hi)?;
            if gap >= delta0 {
                reached = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if !reached {
            // Direction is (nearly) dark to the observable; try another.
            continue;
        }

        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (psi, gap) = candidate(mid)?;
            if (gap - delta0).abs() <= BISECT_TOL * delta0 {
                return Ok(psi);
            }
            if gap < delta0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (_, best) = candidate(0.5 * (lo + hi))?;
        return Err(CoreError::MismatchCalibration {
            target: delta0,
            achieved: best,
        });
    }
    Err(CoreError::DegeneratePerturbation {
        delta0,
        redraws: MAX_REDRAWS,
    })
}

/// Pull the auxiliary state back toward the fiducial one along the mismatch
/// direction until the observable gap is `delta0` again.
///
/// Returns the growth factor `d = Delta/delta0` and the new auxiliary state,
/// or `None` when the observables are exactly degenerate (nothing to record).
/// The fiducial state is untouched and the result has unit norm.
pub fn renormalize_pair(
    psi_f: &StateVector,
    psi_a: &StateVector,
    delta0: f64,
    observable: Observable,
    ops: &OperatorSet,
    q: i8,
) -> Result<Option<(StateVector, f64)>> {
    let obs_f = observable.eval(ops, psi_f, q);
    let delta = (observable.eval(ops, psi_a, q) - obs_f).abs();
    if delta == 0.0 {
        return Ok(None);
    }
    let d = delta / delta0;

    // Work with unit representatives: observables are norm-invariant, and
    // normalizing first keeps the mismatch direction free of the spurious
    // radial component between mid-decay norms.
    let unit_f = psi_f.clone().normalized()?;
    let unit_a = psi_a.clone().normalized()?;

    // Contraction family psi_a'(s) = normalize(psi_f - s (psi_f - psi_a)):
    // s = 0 reproduces the fiducial state, s = 1 the auxiliary ray.
    let mismatch_dir = &unit_f.amplitudes - &unit_a.amplitudes;
    let candidate = |s: f64| -> Result<(StateVector, f64)> {
        let psi = StateVector::new(&unit_f.amplitudes - &mismatch_dir.mapv(|x| x * s))
            .normalized()?;
        let gap = (observable.eval(ops, &psi, q) - obs_f).abs();
        Ok((psi, gap))
    };

    let (mut lo, mut hi) = (0.0, 1.0);
    if delta < delta0 {
        // Mismatch below target (fixed-interval mode in a contracting
        // regime): extrapolate beyond the auxiliary ray.
        let mut reached = false;
        lo = 1.0;
        hi = 2.0;
        while hi <= 1e18 {
            let (_, gap) = candidate(hi)?;
            if gap >= delta0 {
                reached = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if !reached {
            return Err(CoreError::MismatchCalibration {
                target: delta0,
                achieved: delta,
            });
        }
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (psi, gap) = candidate(mid)?;
        if (gap - delta0).abs() <= BISECT_TOL * delta0 {
            return Ok(Some((psi, d)));
        }
        if gap < delta0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, best) = candidate(0.5 * (lo + hi))?;
    Err(CoreError::MismatchCalibration {
        target: delta0,
        achieved: best,
    })
}

/// Aggregate over the independent pairs of one estimation run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LargestLeResult {
    pub pairs: Vec<LyapunovRun>,
    pub lambda_mean: f64,
    /// Standard error of the per-pair exponents.
    pub lambda_stderr: f64,
    pub n_events_mean: f64,
}

/// Estimate the largest exponent, averaged over `lcfg.m_r` independent
/// fiducial/auxiliary pairs.
///
/// Each pair relaxes its own fiducial trajectory for `tcfg.t_relax`, draws
/// the auxiliary state at mismatch `delta0`, and co-evolves both for
/// `lcfg.t_total` under a shared threshold stream.
pub fn largest_le(
    ops: &OperatorSet,
    tcfg: &TrajectoryConfig,
    lcfg: &LyapunovConfig,
) -> Result<LargestLeResult> {
    tcfg.validate(ops.params.t_period)?;
    lcfg.validate(tcfg.dt_sub)?;
    let engine = Engine::new(ops, tcfg.dt_sub)?;

    let pairs: Vec<LyapunovRun> = (0..lcfg.m_r)
        .into_par_iter()
        .map(|pair| {
            run_pair(&engine, tcfg, lcfg, derive(tcfg.seed, pair as u64)).map_err(|e| {
                CoreError::PairFailure {
                    pair,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<_>>()?;

    let m = pairs.len() as f64;
    let lambda_mean = pairs.iter().map(|p| p.lambda_final).sum::<f64>() / m;
    let var = pairs
        .iter()
        .map(|p| (p.lambda_final - lambda_mean).powi(2))
        .sum::<f64>()
        / m.max(1.0);
    let lambda_stderr = (var / m).sqrt();
    let n_events_mean = pairs.iter().map(|p| p.growth_log.len() as f64).sum::<f64>() / m;

    Ok(LargestLeResult {
        pairs,
        lambda_mean,
        lambda_stderr,
        n_events_mean,
    })
}

/// One fiducial/auxiliary pair with seeds derived from `pair_seed`.
pub fn run_pair(
    engine: &Engine,
    tcfg: &TrajectoryConfig,
    lcfg: &LyapunovConfig,
    pair_seed: u64,
) -> Result<LyapunovRun> {
    let ops = engine.ops;
    let dt = engine.props.dt;

    // Relax the fiducial trajectory to the asymptotic regime on its own
    // threshold stream.
    let relax_stream = ThresholdStream::new(derive(pair_seed, 0));
    let mut relaxing = engine.start(ThresholdSource::Stream(relax_stream));
    let relax_steps = engine.substeps_for(tcfg.t_relax);
    engine.run(&mut relaxing, relax_steps, None, &mut NullSink)?;

    // Re-key both trajectories to a shared stream; the pair clock restarts.
    let shared = ThresholdStream::new(derive(pair_seed, 1));
    let psi_f = relaxing.psi.normalized()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive(pair_seed, 2));
    // The relaxation ended on a period boundary: drive phase q = -1.
    let psi_a = init_perturbed(&psi_f, lcfg.delta0, lcfg.observable, ops, -1, &mut rng)?;

    let mut fiducial = Trajectory::new(psi_f, ThresholdSource::Stream(shared));
    let mut auxiliary = Trajectory::new(psi_a, ThresholdSource::Stream(shared));

    let total_steps = engine.substeps_for(lcfg.t_total);
    let tau_steps = (lcfg.tau / dt).round() as u64;
    let mut run = LyapunovRun::default();

    for step in 1..=total_steps {
        engine.step(&mut fiducial)?;
        engine.step(&mut auxiliary)?;
        let q = engine.props.quench_at_boundary(step);
        let obs_f = lcfg.observable.eval(ops, &fiducial.psi, q);
        let obs_a = lcfg.observable.eval(ops, &auxiliary.psi, q);
        let delta = (obs_f - obs_a).abs();

        let due = match lcfg.mode {
            RenormMode::Threshold => delta > lcfg.delta_max,
            RenormMode::FixedTau => step % tau_steps == 0,
        };
        if !due {
            continue;
        }
        if let Some((new_aux, d)) = renormalize_pair(
            &fiducial.psi,
            &auxiliary.psi,
            lcfg.delta0,
            lcfg.observable,
            ops,
            q,
        )? {
            auxiliary.set_state(new_aux);
            run.push(step as f64 * dt, d);
        }
    }
    Ok(run)
}
