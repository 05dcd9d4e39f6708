//! Independent brute-force reference implementations used to validate the
//! main crate's numerics. Everything here favors obviousness over speed and
//! deliberately avoids sharing code paths with `lyapq-core`:
//!
//! - dimer operators built from explicit two-mode tensor products,
//! - master-equation propagation through the vectorized superoperator,
//! - a Taylor-series matrix exponential,
//! - a cyclic Jacobi eigensolver for Hermitian matrices,
//! - fixed-step RK4 integrators for complex state vectors and generic flows,
//! - a two-trajectory finite-difference estimator of the largest Lyapunov
//!   exponent.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

type CMat = Array2<Complex64>;
type CVec = Array1<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Kronecker product, row-major blocks of `a` scaled into `b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = CMat::zeros((ra * rb, ca * cb));
    for i1 in 0..ra {
        for j1 in 0..ca {
            let f = a[[i1, j1]];
            if f == c(0.0) {
                continue;
            }
            for i2 in 0..rb {
                for j2 in 0..cb {
                    out[[i1 * rb + i2, j1 * cb + j2]] = f * b[[i2, j2]];
                }
            }
        }
    }
    out
}

/// Single-mode annihilation operator with occupation cutoff `n_max`.
pub fn annihilation(n_max: usize) -> CMat {
    let dim = n_max + 1;
    let mut b = CMat::zeros((dim, dim));
    for k in 1..dim {
        b[[k - 1, k]] = c((k as f64).sqrt());
    }
    b
}

fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|x| x.conj())
}

fn eye(dim: usize) -> CMat {
    CMat::from_diag_elem(dim, c(1.0))
}

/// Two-mode operators on the product space with per-site cutoff `n_total`,
/// restricted afterwards to the total-number-`n_total` sector.
pub struct TwoModeOracle {
    n_total: usize,
    b1: CMat,
    b2: CMat,
}

impl TwoModeOracle {
    pub fn new(n_total: usize) -> Self {
        let b = annihilation(n_total);
        let id = eye(n_total + 1);
        Self {
            n_total,
            b1: kron(&b, &id),
            b2: kron(&id, &b),
        }
    }

    /// Row index of |n, N-n> in the product space.
    fn sector_index(&self, n: usize) -> usize {
        n * (self.n_total + 1) + (self.n_total - n)
    }

    /// Project a product-space operator onto the fixed-number sector,
    /// ordered by the occupation of the first site.
    pub fn project(&self, full: &CMat) -> CMat {
        let dim = self.n_total + 1;
        let mut out = CMat::zeros((dim, dim));
        for a in 0..dim {
            for b in 0..dim {
                out[[a, b]] = full[[self.sector_index(a), self.sector_index(b)]];
            }
        }
        out
    }

    /// Dimer Hamiltonian with on-site offset `eps`, projected to the sector.
    pub fn hamiltonian(&self, j: f64, u: f64, eps: f64) -> CMat {
        let b1d = dagger(&self.b1);
        let b2d = dagger(&self.b2);
        let n1 = b1d.dot(&self.b1);
        let n2 = b2d.dot(&self.b2);
        let hop = b1d.dot(&self.b2) + b2d.dot(&self.b1);
        let id = eye(n1.nrows());
        let interaction =
            n1.dot(&n1) - &n1 + n2.dot(&n2) - &n2;
        let full = hop.mapv(|x| x * c(-j))
            + interaction.mapv(|x| x * c(2.0 * u / self.n_total as f64))
            + (n2 - n1).mapv(|x| x * c(eps))
            + id.mapv(|x| x * c(0.0));
        self.project(&full)
    }

    /// Jump operator `(b1^dag + b2^dag)(b1 - b2)`, projected to the sector.
    pub fn jump_operator(&self) -> CMat {
        let sum_dag = dagger(&self.b1) + dagger(&self.b2);
        let diff = &self.b1 - &self.b2;
        self.project(&sum_dag.dot(&diff))
    }

    /// `V^dag V`, projected to the sector.
    pub fn vdv(&self) -> CMat {
        let v = self.jump_operator();
        dagger(&v).dot(&v)
    }

    /// Effective generator `H - (i/2)(gamma/N) V^dag V`.
    pub fn effective(&self, j: f64, u: f64, eps: f64, gamma: f64) -> CMat {
        let h = self.hamiltonian(j, u, eps);
        let vdv = self.vdv();
        let rate = Complex64::new(0.0, 0.5 * gamma / self.n_total as f64);
        h - vdv.mapv(|x| x * rate)
    }
}

/// Matrix exponential by scaling and squaring with a plain Taylor series.
pub fn expm_taylor(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let norm: f64 = a
        .columns()
        .into_iter()
        .map(|col| col.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|x| x * c((0.5_f64).powi(squarings as i32)));

    let mut result = eye(n);
    let mut term = eye(n);
    for k in 1..200 {
        term = term.dot(&scaled).mapv(|x| x / c(k as f64));
        let term_norm: f64 = term.iter().map(|x| x.norm()).sum();
        result = result + &term;
        if term_norm < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// Vectorized Lindblad generator for Hamiltonian `h` and a single jump
/// operator `v` with rate `rate`:
/// `L = -i (I ⊗ H - H^T ⊗ I) + rate (conj(V) ⊗ V - 1/2 I ⊗ V^dag V - 1/2 (V^dag V)^T ⊗ I)`.
///
/// Density matrices are flattened column-major: entry (i, j) sits at
/// `j * dim + i`.
pub fn lindblad_superoperator(h: &CMat, v: &CMat, rate: f64) -> CMat {
    let dim = h.nrows();
    let id = eye(dim);
    let minus_i = Complex64::new(0.0, -1.0);
    let vdv = dagger(v).dot(v);
    let ham_part = (kron(&id, h) - kron(&h.t().to_owned(), &id)).mapv(|x| x * minus_i);
    let jump_part = kron(&v.mapv(|x| x.conj()), v).mapv(|x| x * c(rate));
    let decay = (kron(&id, &vdv) + kron(&vdv.t().to_owned(), &id)).mapv(|x| x * c(0.5 * rate));
    ham_part + jump_part - decay
}

pub fn vectorize(rho: &CMat) -> CVec {
    let dim = rho.nrows();
    let mut v = CVec::zeros(dim * dim);
    for j in 0..dim {
        for i in 0..dim {
            v[j * dim + i] = rho[[i, j]];
        }
    }
    v
}

pub fn unvectorize(v: &CVec, dim: usize) -> CMat {
    let mut rho = CMat::zeros((dim, dim));
    for j in 0..dim {
        for i in 0..dim {
            rho[[i, j]] = v[j * dim + i];
        }
    }
    rho
}

/// Exact strobe-time master-equation propagator for a piecewise-constant
/// Lindbladian alternating between generators built from `h_plus` (first
/// half-period) and `h_minus` (second half-period).
pub struct MasterEquationOracle {
    dim: usize,
    period_map: CMat,
}

impl MasterEquationOracle {
    pub fn new(h_plus: &CMat, h_minus: &CMat, v: &CMat, rate: f64, period: f64) -> Self {
        let l_plus = lindblad_superoperator(h_plus, v, rate);
        let l_minus = lindblad_superoperator(h_minus, v, rate);
        let half = c(0.5 * period);
        let e_plus = expm_taylor(&l_plus.mapv(|x| x * half));
        let e_minus = expm_taylor(&l_minus.mapv(|x| x * half));
        Self {
            dim: h_plus.nrows(),
            period_map: e_minus.dot(&e_plus),
        }
    }

    /// Density matrix after `periods` full drive periods.
    pub fn propagate(&self, rho0: &CMat, periods: usize) -> CMat {
        let mut v = vectorize(rho0);
        for _ in 0..periods {
            v = self.period_map.dot(&v);
        }
        unvectorize(&v, self.dim)
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi sweeps, ascending.
pub fn eigvalsh(a: &CMat) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + m.iter().map(|x| x.norm()).fold(0.0, f64::max)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                // Absorb the phase of the off-diagonal element, then apply a
                // real Jacobi rotation.
                let phase = apq / c(apq.norm());
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = t * cos;
                // Column rotation: [cp, cq] <- [c cp - s* conj(phase) cq, s phase cp + c cq]
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = mip * c(cos) - miq * phase.conj() * c(sin);
                    m[[i, q]] = mip * phase * c(sin) + miq * c(cos);
                }
                for jj in 0..n {
                    let mpj = m[[p, jj]];
                    let mqj = m[[q, jj]];
                    m[[p, jj]] = mpj * c(cos) - mqj * phase * c(sin);
                    m[[q, jj]] = mpj * phase.conj() * c(sin) + mqj * c(cos);
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Fixed-step RK4 for `i d psi/dt = G psi` with constant `G`.
pub fn rk4_schrodinger(gen: &CMat, psi0: &CVec, total_time: f64, steps: usize) -> CVec {
    let dt = total_time / steps as f64;
    let minus_i = Complex64::new(0.0, -1.0);
    let f = |p: &CVec| gen.dot(p).mapv(|x| x * minus_i);
    let mut psi = psi0.clone();
    for _ in 0..steps {
        let k1 = f(&psi);
        let k2 = f(&(&psi + &k1.mapv(|x| x * c(0.5 * dt))));
        let k3 = f(&(&psi + &k2.mapv(|x| x * c(0.5 * dt))));
        let k4 = f(&(&psi + &k3.mapv(|x| x * c(dt))));
        psi = &psi
            + &(k1 + k2.mapv(|x| x * c(2.0)) + k3.mapv(|x| x * c(2.0)) + k4)
                .mapv(|x| x * c(dt / 6.0));
    }
    psi
}

/// Fixed-step RK4 for a generic autonomous-in-segments flow `f(t, x)`.
pub fn rk4_flow<const D: usize>(
    f: &dyn Fn(f64, &[f64; D]) -> [f64; D],
    x0: [f64; D],
    t0: f64,
    dt: f64,
    steps: usize,
) -> [f64; D] {
    let mut x = x0;
    let mut t = t0;
    for _ in 0..steps {
        x = rk4_step(f, t, &x, dt);
        t += dt;
    }
    x
}

fn rk4_step<const D: usize>(
    f: &dyn Fn(f64, &[f64; D]) -> [f64; D],
    t: f64,
    x: &[f64; D],
    dt: f64,
) -> [f64; D] {
    let k1 = f(t, x);
    let mut x2 = *x;
    for i in 0..D {
        x2[i] = x[i] + 0.5 * dt * k1[i];
    }
    let k2 = f(t + 0.5 * dt, &x2);
    for i in 0..D {
        x2[i] = x[i] + 0.5 * dt * k2[i];
    }
    let k3 = f(t + 0.5 * dt, &x2);
    for i in 0..D {
        x2[i] = x[i] + dt * k3[i];
    }
    let k4 = f(t + dt, &x2);
    let mut out = *x;
    for i in 0..D {
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Largest Lyapunov exponent of a 2D flow by the two-trajectory method:
/// evolve a reference and a displaced copy, renormalize the separation to
/// `delta0` every `renorm_interval`, and average the log growth factors.
pub fn benettin_lle_2d(
    f: &dyn Fn(f64, &[f64; 2]) -> [f64; 2],
    x0: [f64; 2],
    t0: f64,
    dt: f64,
    transient: f64,
    accumulation: f64,
    delta0: f64,
    renorm_interval: f64,
) -> f64 {
    let transient_steps = (transient / dt).round() as usize;
    let mut x = rk4_flow(f, x0, t0, dt, transient_steps);
    let mut t = t0 + transient_steps as f64 * dt;

    let mut y = [x[0] + delta0 / 2.0_f64.sqrt(), x[1] + delta0 / 2.0_f64.sqrt()];
    let steps_per_interval = (renorm_interval / dt).round() as usize;
    let intervals = (accumulation / renorm_interval).round() as usize;
    let mut log_sum = 0.0;
    for _ in 0..intervals {
        for _ in 0..steps_per_interval {
            x = rk4_step(f, t, &x, dt);
            y = rk4_step(f, t, &y, dt);
            t += dt;
        }
        let dx = [y[0] - x[0], y[1] - x[1]];
        let dist = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
        if dist == 0.0 {
            continue;
        }
        log_sum += (dist / delta0).ln();
        let scale = delta0 / dist;
        y = [x[0] + dx[0] * scale, x[1] + dx[1] * scale];
    }
    log_sum / (intervals as f64 * renorm_interval)
}
