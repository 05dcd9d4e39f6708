//! Classical mean-field reference dynamics on the Bloch sphere.
//!
//! The flow is integrated in the angular form; the Cartesian spin form (with
//! S^2 = 1/4 conserved) serves as a cross-check and as a fallback near the
//! coordinate poles, where the angular equations are singular. Fixed-step
//! RK4 keeps half-period drive switches aligned to step boundaries.

use crate::error::{CoreError, Result};
use crate::model::ModelParams;
use serde::{Deserialize, Serialize};

/// Angular phase-space point (azimuth, polar angle).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub phi: f64,
    pub theta: f64,
}

/// Cartesian pseudo-spin with |S| = 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochState {
    pub fn to_spin(self) -> SpinState {
        let (sin_t, cos_t) = self.theta.sin_cos();
        let (sin_p, cos_p) = self.phi.sin_cos();
        SpinState {
            sx: 0.5 * cos_p * sin_t,
            sy: 0.5 * sin_p * sin_t,
            sz: 0.5 * cos_t,
        }
    }

    /// Left-site particle fraction `(1 + cos theta)/2`.
    pub fn n_fraction(self) -> f64 {
        0.5 * (1.0 + self.theta.cos())
    }
}

impl SpinState {
    pub fn to_bloch(self) -> BlochState {
        BlochState {
            phi: self.sy.atan2(self.sx),
            theta: (2.0 * self.sz).clamp(-1.0, 1.0).acos(),
        }
    }

    pub fn n_fraction(self) -> f64 {
        0.5 + self.sz
    }

    pub fn norm_sq(self) -> f64 {
        self.sx * self.sx + self.sy * self.sy + self.sz * self.sz
    }

    /// Rescale onto the S^2 = 1/4 sphere.
    fn projected(self) -> SpinState {
        let r = self.norm_sq().sqrt();
        let f = 0.5 / r;
        SpinState {
            sx: self.sx * f,
            sy: self.sy * f,
            sz: self.sz * f,
        }
    }
}

/// Guard band around the coordinate poles of the angular form.
pub const THETA_GUARD: f64 = 1e-6;

/// Angular-form vector field at on-site offset `eps`.
fn bloch_rhs_eps(state: BlochState, eps: f64, p: &ModelParams) -> (f64, f64) {
    let (sin_t, cos_t) = state.theta.sin_cos();
    let (sin_p, cos_p) = state.phi.sin_cos();
    let phi_dot = 2.0 * p.j * cos_t / sin_t * cos_p - 2.0 * eps + 4.0 * p.u * cos_t
        - 4.0 * p.gamma * sin_p / sin_t;
    let theta_dot = 2.0 * p.j * sin_p + 4.0 * p.gamma * cos_p * cos_t;
    (phi_dot, theta_dot)
}

/// Angular-form vector field `(phi_dot, theta_dot)` at time `t`.
///
/// Errors when `theta` is within the pole guard band, where `1/sin(theta)`
/// blows up.
pub fn rhs_bloch(state: BlochState, t: f64, p: &ModelParams) -> Result<(f64, f64)> {
    if state.theta < THETA_GUARD || state.theta > std::f64::consts::PI - THETA_GUARD {
        return Err(CoreError::PoleGuard {
            theta: state.theta,
            t,
        });
    }
    Ok(bloch_rhs_eps(state, p.epsilon(t), p))
}

/// Cartesian-form vector field at on-site offset `eps`.
fn spin_rhs_eps(s: SpinState, eps: f64, p: &ModelParams) -> (f64, f64, f64) {
    let g = p.gamma;
    let u = p.u;
    let j = p.j;
    (
        2.0 * eps * s.sy - 8.0 * u * s.sz * s.sy + 8.0 * g * (s.sy * s.sy + s.sz * s.sz),
        -2.0 * eps * s.sx + 8.0 * u * s.sx * s.sz + 2.0 * j * s.sz - 8.0 * g * s.sx * s.sy,
        -2.0 * j * s.sy - 8.0 * g * s.sx * s.sz,
    )
}

/// Cartesian-form vector field `(sx_dot, sy_dot, sz_dot)` at time `t`.
pub fn rhs_spin(s: SpinState, t: f64, p: &ModelParams) -> (f64, f64, f64) {
    spin_rhs_eps(s, p.epsilon(t), p)
}

/// Jacobian of the angular form with respect to `(phi, theta)`.
fn bloch_jacobian(state: BlochState, p: &ModelParams) -> [[f64; 2]; 2] {
    let (sin_t, cos_t) = state.theta.sin_cos();
    let (sin_p, cos_p) = state.phi.sin_cos();
    let inv_sin = 1.0 / sin_t;
    let inv_sin2 = inv_sin * inv_sin;
    let d_phidot_d_phi = -2.0 * p.j * cos_t * inv_sin * sin_p - 4.0 * p.gamma * cos_p * inv_sin;
    let d_phidot_d_theta = -2.0 * p.j * cos_p * inv_sin2 - 4.0 * p.u * sin_t
        + 4.0 * p.gamma * sin_p * cos_t * inv_sin2;
    let d_thetadot_d_phi = 2.0 * p.j * cos_p - 4.0 * p.gamma * sin_p * cos_t;
    let d_thetadot_d_theta = -4.0 * p.gamma * cos_p * sin_t;
    [
        [d_phidot_d_phi, d_phidot_d_theta],
        [d_thetadot_d_phi, d_thetadot_d_theta],
    ]
}

/// Integrator state: angular form while safely away from the poles, spin
/// form (with sphere projection) inside the guard band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MfState {
    Bloch(BlochState),
    Spin(SpinState),
}

impl MfState {
    pub fn n_fraction(self) -> f64 {
        match self {
            MfState::Bloch(b) => b.n_fraction(),
            MfState::Spin(s) => s.n_fraction(),
        }
    }

    pub fn as_bloch(self) -> BlochState {
        match self {
            MfState::Bloch(b) => b,
            MfState::Spin(s) => s.to_bloch(),
        }
    }
}

/// Integration controls for the mean-field flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldConfig {
    /// RK4 step; must divide T/2 exactly.
    pub dt: f64,
    /// Scan initial condition, fixed off the symmetry plane.
    pub initial: BlochState,
}

impl MeanFieldConfig {
    /// Default step T/4000: RK4 holds the S^2 = 1/4 drift below 1e-8 over
    /// 1e3 periods in both the regular and chaotic regimes at this size
    /// (T/2000 overshoots that budget by a factor of a few).
    pub fn for_period(t_period: f64) -> Self {
        Self {
            dt: t_period / 4000.0,
            initial: BlochState {
                phi: 0.0,
                theta: std::f64::consts::FRAC_PI_2 + 0.1,
            },
        }
    }
}

/// Fixed-step RK4 driver with drive switches aligned to step boundaries.
pub struct Integrator {
    p: ModelParams,
    pub dt: f64,
    pub steps_per_half: u64,
    /// Set when the pole guard has tripped at least once during this run.
    pub guard_hit: bool,
}

impl Integrator {
    pub fn new(p: &ModelParams, dt: f64) -> Result<Self> {
        p.validate()?;
        let half = 0.5 * p.t_period;
        let k = (half / dt).round();
        if k < 1.0 || (k * dt - half).abs() > 1e-9 * half {
            return Err(CoreError::InvalidParam {
                key: "dt",
                reason: format!("{dt} does not divide the half-period {half}"),
            });
        }
        Ok(Self {
            p: *p,
            dt,
            steps_per_half: k as u64,
            guard_hit: false,
        })
    }

    pub fn steps_per_period(&self) -> u64 {
        2 * self.steps_per_half
    }

    /// Quench sign of the step interval with index `s`.
    #[inline]
    fn quench_of_interval(&self, s: u64) -> i8 {
        if s % (2 * self.steps_per_half) < self.steps_per_half {
            1
        } else {
            -1
        }
    }

    fn eps_of_interval(&self, s: u64) -> f64 {
        self.p.mu0 + self.p.mu1 * f64::from(self.quench_of_interval(s))
    }

    fn bloch_in_band(b: BlochState) -> bool {
        b.theta > THETA_GUARD && b.theta < std::f64::consts::PI - THETA_GUARD
    }

    /// Wide band for switching back from the spin fallback.
    fn bloch_safe(b: BlochState) -> bool {
        b.theta > 100.0 * THETA_GUARD && b.theta < std::f64::consts::PI - 100.0 * THETA_GUARD
    }

    /// One RK4 step of the step interval `step_index`.
    pub fn step(&mut self, state: &mut MfState, step_index: u64) {
        let eps = self.eps_of_interval(step_index);
        match *state {
            MfState::Bloch(b) => {
                if let Some(next) = self.try_bloch_step(b, eps) {
                    *state = if Self::bloch_in_band(next) {
                        MfState::Bloch(next)
                    } else {
                        self.guard_hit = true;
                        MfState::Spin(self.spin_step(next.to_spin(), eps))
                    };
                } else {
                    self.guard_hit = true;
                    *state = MfState::Spin(self.spin_step(b.to_spin(), eps));
                }
            }
            MfState::Spin(s) => {
                let next = self.spin_step(s, eps);
                let back = next.to_bloch();
                *state = if Self::bloch_safe(back) {
                    MfState::Bloch(back)
                } else {
                    MfState::Spin(next)
                };
            }
        }
    }

    /// RK4 step in angular coordinates; `None` when any stage enters the
    /// guard band.
    fn try_bloch_step(&self, b: BlochState, eps: f64) -> Option<BlochState> {
        let f = |s: BlochState| -> Option<(f64, f64)> {
            if !Self::bloch_in_band(s) {
                return None;
            }
            Some(bloch_rhs_eps(s, eps, &self.p))
        };
        let dt = self.dt;
        let at = |s: BlochState, k: (f64, f64), h: f64| BlochState {
            phi: s.phi + h * k.0,
            theta: s.theta + h * k.1,
        };
        let k1 = f(b)?;
        let k2 = f(at(b, k1, 0.5 * dt))?;
        let k3 = f(at(b, k2, 0.5 * dt))?;
        let k4 = f(at(b, k3, dt))?;
        let mut next = BlochState {
            phi: b.phi + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            theta: b.theta + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        };
        // Keep phi bounded so trigonometry stays accurate over long runs.
        if next.phi.abs() > std::f64::consts::PI {
            next.phi = next.phi.rem_euclid(std::f64::consts::TAU);
            if next.phi > std::f64::consts::PI {
                next.phi -= std::f64::consts::TAU;
            }
        }
        Some(next)
    }

    /// RK4 step in Cartesian coordinates with post-step sphere projection.
    fn spin_step(&self, s: SpinState, eps: f64) -> SpinState {
        let f = |s: SpinState| spin_rhs_eps(s, eps, &self.p);
        let dt = self.dt;
        let at = |s: SpinState, k: (f64, f64, f64), h: f64| SpinState {
            sx: s.sx + h * k.0,
            sy: s.sy + h * k.1,
            sz: s.sz + h * k.2,
        };
        let k1 = f(s);
        let k2 = f(at(s, k1, 0.5 * dt));
        let k3 = f(at(s, k2, 0.5 * dt));
        let k4 = f(at(s, k3, dt));
        SpinState {
            sx: s.sx + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            sy: s.sy + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
            sz: s.sz + dt / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
        }
        .projected()
    }

    /// RK4 step in Cartesian coordinates without projection (cross-form
    /// conservation tests integrate the raw field).
    pub fn spin_step_raw(&self, s: SpinState, step_index: u64) -> SpinState {
        let eps = self.eps_of_interval(step_index);
        let f = |s: SpinState| spin_rhs_eps(s, eps, &self.p);
        let dt = self.dt;
        let at = |s: SpinState, k: (f64, f64, f64), h: f64| SpinState {
            sx: s.sx + h * k.0,
            sy: s.sy + h * k.1,
            sz: s.sz + h * k.2,
        };
        let k1 = f(s);
        let k2 = f(at(s, k1, 0.5 * dt));
        let k3 = f(at(s, k2, 0.5 * dt));
        let k4 = f(at(s, k3, dt));
        SpinState {
            sx: s.sx + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            sy: s.sy + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
            sz: s.sz + dt / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
        }
    }
}

/// Trajectory sample of the angular flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfSample {
    pub t: f64,
    pub phi: f64,
    pub theta: f64,
    pub n: f64,
}

/// Integrate from `initial` over `n_steps` of `dt`, sampling every
/// `sample_every` steps (the initial point is included).
pub fn integrate(
    p: &ModelParams,
    initial: BlochState,
    dt: f64,
    n_steps: u64,
    sample_every: u64,
) -> Result<Vec<MfSample>> {
    let mut integrator = Integrator::new(p, dt)?;
    let mut state = MfState::Bloch(initial);
    let mut out = Vec::with_capacity((n_steps / sample_every + 2) as usize);
    let push = |out: &mut Vec<MfSample>, t: f64, state: MfState| {
        let b = state.as_bloch();
        out.push(MfSample {
            t,
            phi: b.phi,
            theta: b.theta,
            n: state.n_fraction(),
        });
    };
    push(&mut out, 0.0, state);
    for s in 0..n_steps {
        integrator.step(&mut state, s);
        if (s + 1) % sample_every == 0 {
            push(&mut out, (s + 1) as f64 * dt, state);
        }
    }
    Ok(out)
}

/// Stroboscopic bifurcation data for one interaction strength.
#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationCell {
    pub u: f64,
    /// Max-normalized histogram of stroboscopic `n` over [0, 1].
    pub histogram: Vec<f64>,
    /// Distinct occupied-bin clusters (adjacent occupied bins merged).
    pub occupied_clusters: usize,
    pub guard_hit: bool,
}

/// Histogram bin count used for bifurcation columns (bin width 1e-3).
pub const BIFURCATION_BINS: usize = 1000;

/// Stroboscopic histogram of `n` after a transient, for each `U` in the grid.
pub fn bifurcation_scan(
    p_base: &ModelParams,
    u_grid: &[f64],
    cfg: &MeanFieldConfig,
    t0: f64,
    k_max: usize,
) -> Result<Vec<BifurcationCell>> {
    use rayon::prelude::*;
    u_grid
        .par_iter()
        .map(|&u| {
            let p = ModelParams { u, ..*p_base };
            let mut integrator = Integrator::new(&p, cfg.dt)?;
            let per_period = integrator.steps_per_period();
            let transient_periods = (t0 / p.t_period).round() as u64;
            let mut state = MfState::Bloch(cfg.initial);
            let mut step = 0u64;
            for _ in 0..transient_periods * per_period {
                integrator.step(&mut state, step);
                step += 1;
            }
            let mut strobes = Vec::with_capacity(k_max);
            for _ in 0..k_max {
                for _ in 0..per_period {
                    integrator.step(&mut state, step);
                    step += 1;
                }
                strobes.push(state.n_fraction());
            }
            let histogram = crate::trajectory::stroboscopic_histogram(&strobes, BIFURCATION_BINS)?;
            let occupied_clusters = count_clusters(&histogram);
            Ok(BifurcationCell {
                u,
                histogram,
                occupied_clusters,
                guard_hit: integrator.guard_hit,
            })
        })
        .collect()
}

/// Number of occupied-bin clusters; adjacent occupied bins merge so an orbit
/// point sitting on a bin edge is not double counted.
pub fn count_clusters(histogram: &[f64]) -> usize {
    let mut clusters = 0;
    let mut inside = false;
    for &w in histogram {
        if w > 0.0 {
            if !inside {
                clusters += 1;
                inside = true;
            }
        } else {
            inside = false;
        }
    }
    clusters
}

/// Both Lyapunov exponents of the angular flow via tangent-space integration
/// with per-period Gram-Schmidt orthonormalization, sorted descending.
///
/// Errors if the trajectory enters the pole guard band, where the angular
/// tangent frame degenerates.
pub fn classical_lyapunov_spectrum(
    p: &ModelParams,
    cfg: &MeanFieldConfig,
    t0: f64,
    t_acc: f64,
) -> Result<(f64, f64)> {
    let mut integrator = Integrator::new(p, cfg.dt)?;
    let per_period = integrator.steps_per_period();
    let transient_periods = (t0 / p.t_period).round() as u64;
    let acc_periods = (t_acc / p.t_period).round() as u64;

    let mut state = MfState::Bloch(cfg.initial);
    let mut step = 0u64;
    for _ in 0..transient_periods * per_period {
        integrator.step(&mut state, step);
        step += 1;
        if integrator.guard_hit {
            return Err(CoreError::PoleGuard {
                theta: state.as_bloch().theta,
                t: step as f64 * integrator.dt,
            });
        }
    }

    let mut b = match state {
        MfState::Bloch(b) => b,
        MfState::Spin(s) => s.to_bloch(),
    };
    let mut v1 = [1.0, 0.0];
    let mut v2 = [0.0, 1.0];
    let mut log1 = 0.0;
    let mut log2 = 0.0;
    let dt = integrator.dt;

    for _ in 0..acc_periods {
        for _ in 0..per_period {
            let eps = integrator.eps_of_interval(step);
            let next = step_with_tangent(b, &mut v1, &mut v2, eps, p, dt).ok_or(
                CoreError::PoleGuard {
                    theta: b.theta,
                    t: step as f64 * dt,
                },
            )?;
            b = next;
            step += 1;
        }
        // Gram-Schmidt with renormalization once per drive period.
        let r1 = (v1[0] * v1[0] + v1[1] * v1[1]).sqrt();
        v1 = [v1[0] / r1, v1[1] / r1];
        let proj = v2[0] * v1[0] + v2[1] * v1[1];
        v2 = [v2[0] - proj * v1[0], v2[1] - proj * v1[1]];
        let r2 = (v2[0] * v2[0] + v2[1] * v2[1]).sqrt();
        v2 = [v2[0] / r2, v2[1] / r2];
        log1 += r1.ln();
        log2 += r2.ln();
    }

    let t_total = (acc_periods * per_period) as f64 * dt;
    let l1 = log1 / t_total;
    let l2 = log2 / t_total;
    Ok(if l1 >= l2 { (l1, l2) } else { (l2, l1) })
}

/// Combined RK4 step of the base point and two tangent vectors.
fn step_with_tangent(
    b: BlochState,
    v1: &mut [f64; 2],
    v2: &mut [f64; 2],
    eps: f64,
    p: &ModelParams,
    dt: f64,
) -> Option<BlochState> {
    let in_band = |s: &BlochState| {
        s.theta > THETA_GUARD && s.theta < std::f64::consts::PI - THETA_GUARD
    };
    if !in_band(&b) {
        return None;
    }

    #[derive(Clone, Copy)]
    struct Ext {
        b: BlochState,
        v1: [f64; 2],
        v2: [f64; 2],
    }
    let deriv = |x: &Ext| -> Option<Ext> {
        if !in_band(&x.b) {
            return None;
        }
        let (dphi, dtheta) = bloch_rhs_eps(x.b, eps, p);
        let jac = bloch_jacobian(x.b, p);
        let mul = |v: &[f64; 2]| {
            [
                jac[0][0] * v[0] + jac[0][1] * v[1],
                jac[1][0] * v[0] + jac[1][1] * v[1],
            ]
        };
        Some(Ext {
            b: BlochState {
                phi: dphi,
                theta: dtheta,
            },
            v1: mul(&x.v1),
            v2: mul(&x.v2),
        })
    };
    let add = |x: &Ext, k: &Ext, h: f64| Ext {
        b: BlochState {
            phi: x.b.phi + h * k.b.phi,
            theta: x.b.theta + h * k.b.theta,
        },
        v1: [x.v1[0] + h * k.v1[0], x.v1[1] + h * k.v1[1]],
        v2: [x.v2[0] + h * k.v2[0], x.v2[1] + h * k.v2[1]],
    };

    let x0 = Ext { b, v1: *v1, v2: *v2 };
    let k1 = deriv(&x0)?;
    let k2 = deriv(&add(&x0, &k1, 0.5 * dt))?;
    let k3 = deriv(&add(&x0, &k2, 0.5 * dt))?;
    let k4 = deriv(&add(&x0, &k3, dt))?;
    let mut next = x0;
    for (k, w) in [(k1, 1.0), (k2, 2.0), (k3, 2.0), (k4, 1.0)] {
        next = add(&next, &k, w * dt / 6.0);
    }
    if !in_band(&next.b) {
        return None;
    }
    if next.b.phi.abs() > std::f64::consts::PI {
        next.b.phi = next.b.phi.rem_euclid(std::f64::consts::TAU);
        if next.b.phi > std::f64::consts::PI {
            next.b.phi -= std::f64::consts::TAU;
        }
    }
    *v1 = next.v1;
    *v2 = next.v2;
    Some(next.b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(u: f64, mu1: f64, gamma: f64) -> ModelParams {
        ModelParams {
            u,
            mu1,
            gamma,
            n_bosons: 100,
            ..Default::default()
        }
    }

    #[test]
    fn bloch_rhs_zero_drive_symmetry_plane() {
        // gamma = 0, U = 0, eps = 0, phi = 0: no theta motion, pure
        // precession-like phi drift 2J cot(theta).
        let p = params(0.0, 0.0, 0.0);
        let p = ModelParams { mu0: 0.0, ..p };
        let b = BlochState {
            phi: 0.0,
            theta: 1.1,
        };
        let (phi_dot, theta_dot) = rhs_bloch(b, 0.2, &p).unwrap();
        assert_abs_diff_eq!(theta_dot, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi_dot, 2.0 * (1.1_f64).cos() / (1.1_f64).sin(), epsilon = 1e-12);
    }

    #[test]
    fn bloch_rhs_equator() {
        // theta = pi/2, phi = 0, gamma = 0: phi_dot = -2 eps, theta_dot = 0.
        let p = params(0.7, 1.5, 0.0);
        let b = BlochState {
            phi: 0.0,
            theta: std::f64::consts::FRAC_PI_2,
        };
        let t = 0.25 * p.t_period;
        let (phi_dot, theta_dot) = rhs_bloch(b, t, &p).unwrap();
        assert_abs_diff_eq!(phi_dot, -2.0 * p.epsilon(t), epsilon = 1e-12);
        assert_abs_diff_eq!(theta_dot, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bloch_rhs_pole_guard_errors() {
        let p = params(0.5, 1.5, 0.1);
        let b = BlochState {
            phi: 0.3,
            theta: 1e-9,
        };
        assert!(matches!(
            rhs_bloch(b, 0.0, &p),
            Err(CoreError::PoleGuard { .. })
        ));
    }

    #[test]
    fn spin_rhs_conserves_sphere_analytically() {
        // S . S_dot = 0 for random states on and off the sphere.
        let p = params(0.37, 1.1, 0.23);
        for k in 0..50 {
            let s = SpinState {
                sx: ((k * 13 % 17) as f64 / 17.0 - 0.5) * 0.9,
                sy: ((k * 7 % 11) as f64 / 11.0 - 0.5) * 0.9,
                sz: ((k * 5 % 19) as f64 / 19.0 - 0.5) * 0.9,
            };
            let (dx, dy, dz) = rhs_spin(s, 0.3, &p);
            let dot = s.sx * dx + s.sy * dy + s.sz * dz;
            assert!(dot.abs() < 1e-12, "S . S_dot = {dot}");
        }
    }

    #[test]
    fn spin_rhs_dissipation_vanishes_at_in_phase_state() {
        // (1/2, 0, 0) is the classical counterpart of the dark state.
        let p = params(0.0, 0.0, 0.4);
        let p = ModelParams { mu0: 0.0, ..p };
        let s = SpinState {
            sx: 0.5,
            sy: 0.0,
            sz: 0.0,
        };
        let (dx, dy, dz) = rhs_spin(s, 0.0, &p);
        assert_abs_diff_eq!(dx, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dy, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dz, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn forms_agree_through_chain_rule() {
        // (Sx_dot, Sy_dot, Sz_dot) from the angular form must match the
        // Cartesian field mapped through the spherical parametrization.
        let p = params(0.61, 1.4, 0.17);
        for k in 0..40 {
            let b = BlochState {
                phi: (k as f64) * 0.31 - 2.0,
                theta: 0.2 + (k as f64) * 0.065,
            };
            let t = (k as f64) * 0.21;
            let (phi_dot, theta_dot) = rhs_bloch(b, t, &p).unwrap();
            let (sin_t, cos_t) = b.theta.sin_cos();
            let (sin_p, cos_p) = b.phi.sin_cos();
            let from_bloch = (
                0.5 * (-sin_p * sin_t * phi_dot + cos_p * cos_t * theta_dot),
                0.5 * (cos_p * sin_t * phi_dot + sin_p * cos_t * theta_dot),
                -0.5 * sin_t * theta_dot,
            );
            let (dx, dy, dz) = rhs_spin(b.to_spin(), t, &p);
            assert_abs_diff_eq!(from_bloch.0, dx, epsilon = 1e-9);
            assert_abs_diff_eq!(from_bloch.1, dy, epsilon = 1e-9);
            assert_abs_diff_eq!(from_bloch.2, dz, epsilon = 1e-9);
        }
    }

    #[test]
    fn classical_n_endpoints() {
        assert_abs_diff_eq!(
            BlochState { phi: 0.0, theta: 0.0 }.n_fraction(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            BlochState {
                phi: 0.0,
                theta: std::f64::consts::FRAC_PI_2
            }
            .n_fraction(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            BlochState {
                phi: 0.0,
                theta: std::f64::consts::PI
            }
            .n_fraction(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn sphere_conservation_in_raw_spin_integration() {
        let p = params(0.5, 1.5, 0.1);
        let cfg = MeanFieldConfig::for_period(p.t_period);
        let integrator = Integrator::new(&p, cfg.dt).unwrap();
        let mut s = cfg.initial.to_spin();
        let periods = 1000u64;
        for step in 0..periods * integrator.steps_per_period() {
            s = integrator.spin_step_raw(s, step);
        }
        assert!((s.norm_sq() - 0.25).abs() < 1e-8, "S^2 = {}", s.norm_sq());
    }

    #[test]
    fn step_halving_convergence() {
        let p = params(0.05, 1.5, 0.1); // regular regime
        let cfg = MeanFieldConfig::for_period(p.t_period);
        let coarse = integrate(
            &p,
            cfg.initial,
            p.t_period / 2000.0,
            100 * 2000,
            100 * 2000,
        )
        .unwrap();
        let fine = integrate(
            &p,
            cfg.initial,
            p.t_period / 4000.0,
            100 * 4000,
            100 * 4000,
        )
        .unwrap();
        let a = coarse.last().unwrap();
        let b = fine.last().unwrap();
        assert!((a.n - b.n).abs() < 1e-8, "dn = {}", (a.n - b.n).abs());
    }

    #[test]
    fn cluster_counting() {
        assert_eq!(count_clusters(&[0.0, 1.0, 0.0, 0.0]), 1);
        assert_eq!(count_clusters(&[0.0, 1.0, 0.5, 0.0, 0.3]), 2);
        assert_eq!(count_clusters(&[0.2, 0.0, 0.3, 0.0, 0.4]), 3);
        assert_eq!(count_clusters(&[0.0; 5]), 0);
    }
}
