//! Quantum-jump trajectory evolution under the effective non-Hermitian
//! generators, with norm-threshold jumps, observable sampling, and ensemble
//! reductions.
//!
//! Control flow is integer-based: a trajectory advances in substeps of
//! `dt_sub`, the drive phase is the substep index modulo the period, and the
//! generator switch at half-period boundaries never involves a floating-point
//! comparison against `t mod T`.

use crate::error::{CoreError, Result};
use crate::fock::{OperatorSet, StateVector};
use crate::linalg::{expm, MatVecScratch, SplitMatrix};
use crate::rng::ThresholdStream;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Integration and sampling controls for one trajectory run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    /// Integration substep; must divide T/2 exactly.
    pub dt_sub: f64,
    /// Relaxation time before measurement starts.
    pub t_relax: f64,
    /// Measurement window following relaxation.
    pub t_measure: f64,
    /// Interval between observable samples; must be a multiple of `dt_sub`.
    pub sample_period: f64,
    /// Base seed for the run's random streams.
    pub seed: u64,
}

impl TrajectoryConfig {
    /// Reference defaults for drive period `t_period`: substep T/1000,
    /// relaxation 2e3 T, measurement 1e3 T, stroboscopic sampling.
    pub fn for_period(t_period: f64) -> Self {
        Self {
            dt_sub: t_period / 1000.0,
            t_relax: 2000.0 * t_period,
            t_measure: 1000.0 * t_period,
            sample_period: t_period,
            seed: 0,
        }
    }

    pub fn validate(&self, t_period: f64) -> Result<()> {
        let half = 0.5 * t_period;
        if !(self.dt_sub > 0.0) {
            return Err(CoreError::InvalidParam {
                key: "dt_sub",
                reason: "must be positive".into(),
            });
        }
        let k = (half / self.dt_sub).round();
        if k < 1.0 || (k * self.dt_sub - half).abs() > 1e-9 * half {
            return Err(CoreError::InvalidParam {
                key: "dt_sub",
                reason: format!("{} does not divide the half-period {}", self.dt_sub, half),
            });
        }
        let m = (self.sample_period / self.dt_sub).round();
        if m < 1.0 || (m * self.dt_sub - self.sample_period).abs() > 1e-9 * self.sample_period {
            return Err(CoreError::InvalidParam {
                key: "sample_period",
                reason: format!("{} is not a multiple of dt_sub", self.sample_period),
            });
        }
        if self.t_relax < 0.0 || self.t_measure < 0.0 {
            return Err(CoreError::InvalidParam {
                key: "t_relax/t_measure",
                reason: "must be non-negative".into(),
            });
        }
        Ok(())
    }
}

/// Where a trajectory draws its jump thresholds from.
#[derive(Debug, Clone)]
pub enum ThresholdSource {
    /// Counter-indexed deterministic stream (production path).
    Stream(ThresholdStream),
    /// Same value for every jump (tests).
    Fixed(f64),
    /// Explicit sequence, clamped to its last element (tests).
    Sequence(std::sync::Arc<Vec<f64>>),
}

impl ThresholdSource {
    fn threshold(&self, index: u64) -> f64 {
        match self {
            ThresholdSource::Stream(s) => s.threshold(index),
            ThresholdSource::Fixed(r) => *r,
            ThresholdSource::Sequence(seq) => {
                let i = (index as usize).min(seq.len().saturating_sub(1));
                seq[i]
            }
        }
    }
}

/// Cached half-period propagators for one `(OperatorSet, dt_sub)` pair.
#[derive(Debug, Clone)]
pub struct Propagators {
    plus: SplitMatrix,
    minus: SplitMatrix,
    /// Substep length.
    pub dt: f64,
    /// Substeps per half-period.
    pub substeps_per_half: u64,
}

impl Propagators {
    /// One dense matrix exponential per half-period generator.
    pub fn build(ops: &OperatorSet, dt_sub: f64) -> Result<Self> {
        let t_period = ops.params.t_period;
        let half = 0.5 * t_period;
        let k = (half / dt_sub).round();
        if k < 1.0 || (k * dt_sub - half).abs() > 1e-9 * half {
            return Err(CoreError::InvalidParam {
                key: "dt_sub",
                reason: format!("{dt_sub} does not divide the half-period {half}"),
            });
        }
        let step = Complex64::new(0.0, -dt_sub);
        let plus = expm(&ops.heff_plus.mapv(|x| x * step));
        let minus = expm(&ops.heff_minus.mapv(|x| x * step));
        Ok(Self {
            plus: SplitMatrix::from_complex(&plus),
            minus: SplitMatrix::from_complex(&minus),
            dt: dt_sub,
            substeps_per_half: k as u64,
        })
    }

    /// Quench sign of the substep interval with index `s`.
    #[inline]
    pub fn quench_of_interval(&self, s: u64) -> i8 {
        if s % (2 * self.substeps_per_half) < self.substeps_per_half {
            1
        } else {
            -1
        }
    }

    /// Quench sign owning the substep *boundary* with index `s` (the sign of
    /// the interval that ends there; boundary 0 closes the previous period).
    #[inline]
    pub fn quench_at_boundary(&self, s: u64) -> i8 {
        let k = self.substeps_per_half;
        let p = s % (2 * k);
        if p >= 1 && p <= k {
            1
        } else {
            -1
        }
    }

    #[inline]
    fn matrix(&self, q: i8) -> &SplitMatrix {
        if q >= 0 {
            &self.plus
        } else {
            &self.minus
        }
    }
}

/// A jump applied at a substep boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub jump_index: u64,
}

/// Mutable per-trajectory state: wave function, substep clock, and the
/// position in the threshold stream.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub psi: StateVector,
    /// Substeps advanced since creation.
    pub substep: u64,
    /// Jumps applied so far; also the index of the pending threshold.
    pub jump_count: u64,
    pending_threshold: f64,
    thresholds: ThresholdSource,
    next: Array1<Complex64>,
    scratch: MatVecScratch,
}

impl Trajectory {
    pub fn new(psi: StateVector, thresholds: ThresholdSource) -> Self {
        let dim = psi.dim();
        let pending_threshold = thresholds.threshold(0);
        Self {
            psi,
            substep: 0,
            jump_count: 0,
            pending_threshold,
            thresholds,
            next: Array1::zeros(dim),
            scratch: MatVecScratch::new(dim),
        }
    }

    pub fn time(&self, dt: f64) -> f64 {
        self.substep as f64 * dt
    }

    /// Replace the state, keeping the clock and threshold position.
    pub fn set_state(&mut self, psi: StateVector) {
        self.psi = psi;
    }
}

/// Trajectory engine for one operator set and substep size.
pub struct Engine<'a> {
    pub ops: &'a OperatorSet,
    pub props: Propagators,
}

impl<'a> Engine<'a> {
    pub fn new(ops: &'a OperatorSet, dt_sub: f64) -> Result<Self> {
        Ok(Self {
            ops,
            props: Propagators::build(ops, dt_sub)?,
        })
    }

    /// Reference initial state: all bosons on the first site.
    pub fn initial_state(&self) -> StateVector {
        StateVector::fock(self.ops.params.n_bosons as usize, self.ops.dim())
    }

    pub fn start(&self, thresholds: ThresholdSource) -> Trajectory {
        Trajectory::new(self.initial_state(), thresholds)
    }

    /// Advance one substep; apply a jump if the norm crossed the pending
    /// threshold at the new boundary.
    pub fn step(&self, traj: &mut Trajectory) -> Result<Option<JumpEvent>> {
        let q = self.props.quench_of_interval(traj.substep);
        self.props
            .matrix(q)
            .apply(&traj.psi.amplitudes, &mut traj.next, &mut traj.scratch);
        std::mem::swap(&mut traj.psi.amplitudes, &mut traj.next);
        traj.substep += 1;

        let norm_sq = traj.psi.norm_sqr();
        if norm_sq < traj.pending_threshold {
            let t = traj.time(self.props.dt);
            traj.psi = self.ops.apply_jump(&traj.psi, t)?;
            let jump_index = traj.jump_count;
            traj.jump_count += 1;
            traj.pending_threshold = traj.thresholds.threshold(traj.jump_count);
            return Ok(Some(JumpEvent { t, jump_index }));
        }
        Ok(None)
    }

    /// Advance `substeps` steps, reporting jumps and boundary samples to the
    /// sink. Samples land on boundaries whose index is a multiple of
    /// `sample_every`.
    pub fn run(
        &self,
        traj: &mut Trajectory,
        substeps: u64,
        sample_every: Option<u64>,
        sink: &mut dyn Sink,
    ) -> Result<()> {
        for _ in 0..substeps {
            let jump = self.step(traj)?;
            if let Some(event) = jump {
                sink.on_jump(event);
            }
            if let Some(every) = sample_every {
                if traj.substep % every == 0 {
                    self.emit_sample(traj, sink);
                }
            }
        }
        Ok(())
    }

    fn emit_sample(&self, traj: &Trajectory, sink: &mut dyn Sink) {
        let t = traj.time(self.props.dt);
        let q = self.props.quench_at_boundary(traj.substep);
        let n = self.ops.number_fraction(&traj.psi);
        let e = self.ops.energy(&traj.psi, q);
        sink.on_sample(Sample {
            t,
            n,
            e,
            jumps_so_far: traj.jump_count,
            participation_ratio: traj.psi.participation_ratio(),
        });
    }

    /// Substeps in a time span, rounded to whole drive periods.
    pub fn substeps_for(&self, span: f64) -> u64 {
        let per_period = 2 * self.props.substeps_per_half;
        let periods = (span / (per_period as f64 * self.props.dt)).round() as u64;
        periods * per_period
    }
}

/// One observable sample at a substep boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub n: f64,
    pub e: f64,
    pub jumps_so_far: u64,
    pub participation_ratio: f64,
}

/// Receiver for trajectory output.
pub trait Sink {
    fn on_sample(&mut self, sample: Sample);
    fn on_jump(&mut self, _event: JumpEvent) {}
}

/// Discards everything.
pub struct NullSink;

impl Sink for NullSink {
    fn on_sample(&mut self, _sample: Sample) {}
}

/// Sampled observables and jump instants of one trajectory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub n_values: Vec<f64>,
    pub e_values: Vec<f64>,
    pub jump_times: Vec<f64>,
    pub participation_ratios: Vec<f64>,
    pub final_state: Option<StateVector>,
}

impl Sink for TrajectoryRecord {
    fn on_sample(&mut self, s: Sample) {
        self.times.push(s.t);
        self.n_values.push(s.n);
        self.e_values.push(s.e);
        self.participation_ratios.push(s.participation_ratio);
    }

    fn on_jump(&mut self, event: JumpEvent) {
        self.jump_times.push(event.t);
    }
}

/// Ensemble-averaged density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub rho: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn trace(&self) -> Complex64 {
        self.rho.diag().iter().sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::linalg::hermiticity_defect(&self.rho)
    }
}

/// `(1/M) sum |psi_j><psi_j|` over normalized states.
pub fn sample_density_matrix(finals: &[StateVector]) -> Result<DensityMatrix> {
    let first = finals.first().ok_or(CoreError::EmptyEnsemble {
        what: "density-matrix sampling needs at least one state",
    })?;
    let dim = first.dim();
    let weight = 1.0 / finals.len() as f64;
    let mut rho = Array2::zeros((dim, dim));
    for psi in finals {
        debug_assert!((psi.norm_sqr() - 1.0).abs() < 1e-9);
        for i in 0..dim {
            let ai = psi.amplitudes[i];
            for j in 0..dim {
                rho[[i, j]] += ai * psi.amplitudes[j].conj() * weight;
            }
        }
    }
    Ok(DensityMatrix { rho })
}

/// Histogram of values over [0, 1] with the maximal element scaled to 1.
pub fn stroboscopic_histogram(values: &[f64], bins: usize) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(CoreError::EmptyEnsemble {
            what: "histogram needs at least one sample",
        });
    }
    assert!(bins >= 1);
    let mut hist = vec![0.0_f64; bins];
    for &v in values {
        let idx = ((v * bins as f64) as usize).min(bins - 1);
        hist[idx] += 1.0;
    }
    let max = hist.iter().cloned().fold(0.0, f64::max);
    for h in &mut hist {
        *h /= max;
    }
    Ok(hist)
}

/// Stroboscopic values pooled from a set of records.
pub fn pooled_histogram(records: &[TrajectoryRecord], bins: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = records
        .iter()
        .flat_map(|r| r.n_values.iter().copied())
        .collect();
    stroboscopic_histogram(&values, bins)
}

/// Ensemble run: `m_r` independent trajectories with seeds derived from
/// `cfg.seed` by trajectory index. Results are folded in index order, so the
/// outcome does not depend on the worker count.
pub fn run_ensemble(
    ops: &OperatorSet,
    cfg: &TrajectoryConfig,
    m_r: usize,
) -> Result<Vec<TrajectoryRecord>> {
    cfg.validate(ops.params.t_period)?;
    let engine = Engine::new(ops, cfg.dt_sub)?;
    let relax_steps = engine.substeps_for(cfg.t_relax);
    let measure_steps = engine.substeps_for(cfg.t_measure);
    let sample_every = (cfg.sample_period / cfg.dt_sub).round() as u64;

    (0..m_r)
        .into_par_iter()
        .map(|index| {
            let stream = ThresholdStream::new(crate::rng::derive(cfg.seed, index as u64));
            let mut traj = engine.start(ThresholdSource::Stream(stream));
            let mut devnull = NullSink;
            engine.run(&mut traj, relax_steps, None, &mut devnull)?;
            let mut record = TrajectoryRecord::default();
            engine.run(&mut traj, measure_steps, Some(sample_every), &mut record)?;
            let mut final_state = traj.psi.clone();
            final_state.normalize()?;
            record.final_state = Some(final_state);
            Ok(record)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use approx::assert_abs_diff_eq;

    fn small_params(gamma: f64) -> ModelParams {
        ModelParams {
            u: 0.5,
            gamma,
            n_bosons: 8,
            ..Default::default()
        }
    }

    fn ops(gamma: f64) -> OperatorSet {
        OperatorSet::build(&small_params(gamma)).unwrap()
    }

    #[test]
    fn unitary_limit_preserves_norm() {
        let ops = ops(0.0);
        let engine = Engine::new(&ops, ops.params.t_period / 64.0).unwrap();
        let mut traj = engine.start(ThresholdSource::Fixed(0.9999));
        for _ in 0..256 {
            engine.step(&mut traj).unwrap();
            assert_abs_diff_eq!(traj.psi.norm(), 1.0, epsilon = 1e-10);
        }
        assert_eq!(traj.jump_count, 0);
    }

    #[test]
    fn dissipation_strictly_decreases_norm() {
        let ops = ops(0.1);
        let engine = Engine::new(&ops, ops.params.t_period / 64.0).unwrap();
        // Initial state |N> is not the dark state.
        let mut traj = engine.start(ThresholdSource::Fixed(1e-30));
        let mut prev = traj.psi.norm_sqr();
        for _ in 0..64 {
            engine.step(&mut traj).unwrap();
            let now = traj.psi.norm_sqr();
            assert!(now < prev, "norm must decrease: {now} !< {prev}");
            prev = now;
        }
    }

    #[test]
    fn propagator_composition_semigroup() {
        let ops = ops(0.1);
        let t = ops.params.t_period;
        let coarse = Engine::new(&ops, t / 64.0).unwrap();
        let fine = Engine::new(&ops, t / 128.0).unwrap();
        let mut a = coarse.start(ThresholdSource::Fixed(1e-30));
        let mut b = fine.start(ThresholdSource::Fixed(1e-30));
        coarse.step(&mut a).unwrap();
        fine.step(&mut b).unwrap();
        fine.step(&mut b).unwrap();
        for (x, y) in a.psi.amplitudes.iter().zip(b.psi.amplitudes.iter()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn rigged_threshold_fires_exactly_one_jump() {
        let ops = ops(0.1);
        let engine = Engine::new(&ops, ops.params.t_period / 64.0).unwrap();
        // Threshold 0.5 forever: the first crossing of norm^2 = 0.5 jumps,
        // and the post-jump unit norm re-arms the same threshold.
        let mut traj = engine.start(ThresholdSource::Fixed(0.5));
        let mut first_jump = None;
        for _ in 0..2048 {
            let norm_before = traj.psi.norm_sqr();
            if let Some(event) = engine.step(&mut traj).unwrap() {
                first_jump = Some((norm_before, event.t));
                break;
            }
        }
        let (norm_before, _) = first_jump.expect("a jump must occur");
        assert!(norm_before >= 0.5, "jump fired at the first crossing");
        assert_abs_diff_eq!(traj.psi.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_dissipation_means_zero_jumps() {
        let ops = ops(0.0);
        let cfg = TrajectoryConfig {
            dt_sub: ops.params.t_period / 64.0,
            t_relax: 4.0 * ops.params.t_period,
            t_measure: 8.0 * ops.params.t_period,
            sample_period: ops.params.t_period,
            seed: 7,
        };
        let records = run_ensemble(&ops, &cfg, 3).unwrap();
        for r in &records {
            assert!(r.jump_times.is_empty());
        }
    }

    #[test]
    fn jump_times_strictly_increasing_and_bounded_observables() {
        let ops = ops(0.1);
        let cfg = TrajectoryConfig {
            dt_sub: ops.params.t_period / 128.0,
            t_relax: 10.0 * ops.params.t_period,
            t_measure: 40.0 * ops.params.t_period,
            sample_period: ops.params.t_period / 4.0,
            seed: 3,
        };
        let records = run_ensemble(&ops, &cfg, 4).unwrap();
        for r in &records {
            for w in r.jump_times.windows(2) {
                assert!(w[0] < w[1]);
            }
            for &n in &r.n_values {
                assert!((0.0..=1.0).contains(&n), "n = {n}");
            }
            assert!(!r.n_values.is_empty());
        }
    }

    #[test]
    fn ensemble_is_deterministic() {
        let ops = ops(0.1);
        let cfg = TrajectoryConfig {
            dt_sub: ops.params.t_period / 64.0,
            t_relax: 2.0 * ops.params.t_period,
            t_measure: 6.0 * ops.params.t_period,
            sample_period: ops.params.t_period,
            seed: 99,
        };
        let a = run_ensemble(&ops, &cfg, 4).unwrap();
        let b = run_ensemble(&ops, &cfg, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn density_matrix_single_state_is_projector() {
        let psi = StateVector::fock(2, 5);
        let dm = sample_density_matrix(&[psi]).unwrap();
        assert_abs_diff_eq!(dm.trace().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dm.rho[[2, 2]].re, 1.0, epsilon = 1e-14);
        assert_eq!(dm.hermiticity_defect(), 0.0);
    }

    #[test]
    fn density_matrix_two_orthogonal_states() {
        let a = StateVector::fock(0, 3);
        let b = StateVector::fock(2, 3);
        let dm = sample_density_matrix(&[a, b]).unwrap();
        assert_abs_diff_eq!(dm.rho[[0, 0]].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(dm.rho[[2, 2]].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(dm.rho[[1, 1]].re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn density_matrix_rejects_empty_input() {
        assert!(sample_density_matrix(&[]).is_err());
    }

    #[test]
    fn histogram_identical_samples() {
        let h = stroboscopic_histogram(&[0.42; 100], 50).unwrap();
        let occupied: Vec<usize> = h
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(occupied, vec![21]);
        assert_eq!(h[21], 1.0);
    }

    #[test]
    fn histogram_uniform_samples() {
        let values: Vec<f64> = (0..10_000).map(|k| (k as f64 + 0.5) / 10_000.0).collect();
        let h = stroboscopic_histogram(&values, 10).unwrap();
        for &w in &h {
            assert!(w > 0.95);
        }
    }

    #[test]
    fn histogram_rejects_empty() {
        assert!(stroboscopic_histogram(&[], 10).is_err());
    }

    #[test]
    fn quench_boundary_convention() {
        let ops = ops(0.1);
        let engine = Engine::new(&ops, ops.params.t_period / 8.0).unwrap();
        let k = engine.props.substeps_per_half;
        assert_eq!(engine.props.quench_at_boundary(0), -1);
        assert_eq!(engine.props.quench_at_boundary(1), 1);
        assert_eq!(engine.props.quench_at_boundary(k), 1);
        assert_eq!(engine.props.quench_at_boundary(k + 1), -1);
        assert_eq!(engine.props.quench_at_boundary(2 * k), -1);
    }
}
