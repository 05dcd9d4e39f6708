//! Operators of the dimer model in the fixed-particle-number Fock basis.
//!
//! The basis is labeled by the number of bosons `n` on the first site,
//! `n = 0..=N`, so every operator is an `(N+1) x (N+1)` matrix. The
//! Hamiltonian is real symmetric; the jump operator is real tridiagonal but
//! not symmetric.

use crate::error::{CoreError, Result};
use crate::model::ModelParams;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Complex amplitude vector over the `N+1` Fock basis states.
///
/// The squared norm stays in (0, 1] during non-Hermitian evolution and is
/// restored to 1 by initialization and jump renormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Array1<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Array1<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// Basis state with `n` bosons on the first site.
    pub fn fock(n: usize, dim: usize) -> Self {
        assert!(n < dim, "Fock label {n} outside dimension {dim}");
        let mut amplitudes = Array1::zeros(dim);
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// Normalized state with all bosons in the symmetric in-phase mode.
    ///
    /// Its amplitudes are proportional to sqrt(binomial(N, n)); it is
    /// annihilated by the jump operator for every N.
    pub fn symmetric_dark_state(n_bosons: u32) -> Self {
        let dim = n_bosons as usize + 1;
        let mut amplitudes = Array1::zeros(dim);
        let mut a = 1.0_f64;
        let mut norm_sq = 0.0;
        for n in 0..dim {
            amplitudes[n] = Complex64::new(a, 0.0);
            norm_sq += a * a;
            if n + 1 < dim {
                a *= ((n_bosons as usize - n) as f64 / (n + 1) as f64).sqrt();
            }
        }
        let scale = Complex64::new(1.0 / norm_sq.sqrt(), 0.0);
        amplitudes.mapv_inplace(|x| x * scale);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescale to unit norm. Errors if the norm has underflowed to zero.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n <= 0.0 {
            return Err(CoreError::ZeroNormState { t: f64::NAN });
        }
        let inv = Complex64::new(1.0 / n, 0.0);
        self.amplitudes.mapv_inplace(|a| a * inv);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Overlap `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Participation ratio of |psi|^2, normalized to be norm-independent.
    ///
    /// Ranges from 1 (single basis state) to N+1 (uniform spread).
    pub fn participation_ratio(&self) -> f64 {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for a in &self.amplitudes {
            let p = a.norm_sqr();
            sum += p;
            sum_sq += p * p;
        }
        if sum_sq == 0.0 {
            0.0
        } else {
            sum * sum / sum_sq
        }
    }
}

/// Hamiltonian matrix for a fixed quench sign `q`.
///
/// Diagonal: `(2U/N) [n(n-1) + (N-n)(N-n-1)] + (mu0 + mu1 q) ((N-n) - n)`;
/// first off-diagonals: `-J sqrt((n+1)(N-n))`.
pub fn build_hamiltonian(p: &ModelParams, q: i8) -> Array2<Complex64> {
    let n_total = p.n_bosons as usize;
    let dim = n_total + 1;
    let eps = p.mu0 + p.mu1 * f64::from(q);
    let u_scale = 2.0 * p.u / p.n_bosons as f64;
    let mut h = Array2::zeros((dim, dim));
    for n in 0..dim {
        let nf = n as f64;
        let mf = (n_total - n) as f64;
        let interaction = u_scale * (nf * (nf - 1.0) + mf * (mf - 1.0));
        let offset = eps * (mf - nf);
        h[[n, n]] = Complex64::new(interaction + offset, 0.0);
        if n + 1 < dim {
            let hop = -p.j * ((nf + 1.0) * mf).sqrt();
            h[[n + 1, n]] = Complex64::new(hop, 0.0);
            h[[n, n + 1]] = Complex64::new(hop, 0.0);
        }
    }
    h
}

/// Jump operator `V = (b1^dag + b2^dag)(b1 - b2)` in the Fock basis.
///
/// Tridiagonal: diagonal `2n - N`, lower `-sqrt((n+1)(N-n))`, upper
/// `+sqrt(n(N-n+1))` (columns indexed by `n`). Real but not symmetric.
pub fn build_jump_operator(n_bosons: u32) -> Array2<Complex64> {
    let n_total = n_bosons as usize;
    let dim = n_total + 1;
    let mut v = Array2::zeros((dim, dim));
    for n in 0..dim {
        let nf = n as f64;
        let mf = (n_total - n) as f64;
        v[[n, n]] = Complex64::new(2.0 * nf - n_total as f64, 0.0);
        if n + 1 < dim {
            v[[n + 1, n]] = Complex64::new(-((nf + 1.0) * mf).sqrt(), 0.0);
        }
        if n >= 1 {
            v[[n - 1, n]] = Complex64::new((nf * (mf + 1.0)).sqrt(), 0.0);
        }
    }
    v
}

/// `V^dag V`, Hermitian positive semidefinite.
pub fn build_vdv(n_bosons: u32) -> Array2<Complex64> {
    let v = build_jump_operator(n_bosons);
    let vdag = v.t().mapv(|x| x.conj());
    vdag.dot(&v)
}

/// Effective non-Hermitian generator `H(q) - (i/2)(gamma/N) V^dag V`.
///
/// The dissipator rate gamma/N is absorbed into the anti-Hermitian part so
/// that the trajectory ensemble average solves the full master equation.
pub fn build_effective(p: &ModelParams, q: i8) -> Array2<Complex64> {
    let mut heff = build_hamiltonian(p, q);
    let vdv = build_vdv(p.n_bosons);
    let rate = 0.5 * p.gamma / p.n_bosons as f64;
    heff.zip_mut_with(&vdv, |h, w| {
        *h -= Complex64::new(0.0, rate) * w;
    });
    heff
}

/// `<psi|op|psi>` without norm division.
pub fn expectation_raw(op: &Array2<Complex64>, psi: &StateVector) -> Complex64 {
    let opv = op.dot(&psi.amplitudes);
    psi.amplitudes
        .iter()
        .zip(opv.iter())
        .map(|(a, b)| a.conj() * b)
        .sum()
}

/// Norm-normalized expectation value `<psi|op|psi> / <psi|psi>`.
///
/// Dividing by the current norm keeps expectations physical for mid-decay
/// states. Returns the real part; for Hermitian `op` the imaginary residue
/// is at rounding level.
pub fn expectation(op: &Array2<Complex64>, psi: &StateVector) -> Result<f64> {
    let norm_sq = psi.norm_sqr();
    if norm_sq <= 0.0 {
        return Err(CoreError::ZeroNormState { t: f64::NAN });
    }
    Ok(expectation_raw(op, psi).re / norm_sq)
}

/// Precomputed operator matrices for one parameter set.
///
/// Immutable after construction; trajectory workers share it read-only.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub params: ModelParams,
    /// Hamiltonian in the first half-period (Q = +1).
    pub h_plus: Array2<Complex64>,
    /// Hamiltonian in the second half-period (Q = -1).
    pub h_minus: Array2<Complex64>,
    /// Jump operator.
    pub v: Array2<Complex64>,
    /// V^dag V.
    pub vdv: Array2<Complex64>,
    /// Effective non-Hermitian generator for Q = +1.
    pub heff_plus: Array2<Complex64>,
    /// Effective non-Hermitian generator for Q = -1.
    pub heff_minus: Array2<Complex64>,
    /// Diagonal of the left-site fraction observable n1/N.
    pub n_frac_diag: Array1<f64>,
}

impl OperatorSet {
    pub fn build(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let n_frac_diag =
            Array1::from_iter((0..params.dim()).map(|n| n as f64 / params.n_bosons as f64));
        Ok(Self {
            params: *params,
            h_plus: build_hamiltonian(params, 1),
            h_minus: build_hamiltonian(params, -1),
            v: build_jump_operator(params.n_bosons),
            vdv: build_vdv(params.n_bosons),
            heff_plus: build_effective(params, 1),
            heff_minus: build_effective(params, -1),
            n_frac_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// Hamiltonian for quench sign `q`.
    pub fn hamiltonian(&self, q: i8) -> &Array2<Complex64> {
        if q >= 0 {
            &self.h_plus
        } else {
            &self.h_minus
        }
    }

    /// Effective generator for quench sign `q`.
    pub fn effective(&self, q: i8) -> &Array2<Complex64> {
        if q >= 0 {
            &self.heff_plus
        } else {
            &self.heff_minus
        }
    }

    /// Left-site particle fraction `<n1>/N / <psi|psi>`, always in [0, 1].
    pub fn number_fraction(&self, psi: &StateVector) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, w) in psi.amplitudes.iter().zip(self.n_frac_diag.iter()) {
            let p = a.norm_sqr();
            num += w * p;
            den += p;
        }
        num / den
    }

    /// Energy `<H(q)>` normalized by the current norm.
    pub fn energy(&self, psi: &StateVector, q: i8) -> f64 {
        expectation_raw(self.hamiltonian(q), psi).re / psi.norm_sqr()
    }

    /// Apply the jump operator and renormalize. Errors on a dark state.
    pub fn apply_jump(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let jumped = self.v.dot(&psi.amplitudes);
        let norm: f64 = jumped.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        // Relative to the pre-jump norm so the check is scale invariant.
        if norm <= 1e-12 * psi.norm().max(f64::MIN_POSITIVE) {
            return Err(CoreError::DarkStateJump { t, v_norm: norm });
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        Ok(StateVector::new(jumped.mapv(|a| a * inv)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params_n(n: u32, u: f64, mu0: f64, mu1: f64) -> ModelParams {
        ModelParams {
            u,
            mu0,
            mu1,
            n_bosons: n,
            ..Default::default()
        }
    }

    #[test]
    fn hamiltonian_single_boson() {
        // One boson, zero offset: pure hopping between the two sites.
        let p = params_n(1, 0.3, 0.0, 0.0);
        let h = build_hamiltonian(&p, 1);
        assert_eq!(h[[0, 0]], Complex64::new(0.0, 0.0));
        assert_eq!(h[[1, 1]], Complex64::new(0.0, 0.0));
        assert_eq!(h[[0, 1]], Complex64::new(-1.0, 0.0));
        assert_eq!(h[[1, 0]], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn hamiltonian_two_bosons() {
        let p = params_n(2, 0.5, 0.0, 0.0);
        let h = build_hamiltonian(&p, 1);
        let sqrt2 = 2.0_f64.sqrt();
        assert_abs_diff_eq!(h[[0, 0]].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[[1, 1]].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[[2, 2]].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[[1, 0]].re, -sqrt2, epsilon = 1e-15);
        assert_abs_diff_eq!(h[[2, 1]].re, -sqrt2, epsilon = 1e-15);
    }

    #[test]
    fn hamiltonian_exactly_real_symmetric() {
        let p = params_n(7, 0.37, 1.0, 1.5);
        for q in [1i8, -1] {
            let h = build_hamiltonian(&p, q);
            for i in 0..p.dim() {
                for j in 0..p.dim() {
                    assert_eq!(h[[i, j]].im, 0.0);
                    assert_eq!(h[[i, j]], h[[j, i]]);
                }
            }
        }
    }

    #[test]
    fn jump_operator_small_cases() {
        let v1 = build_jump_operator(1);
        assert_eq!(v1[[0, 0]].re, -1.0);
        assert_eq!(v1[[0, 1]].re, 1.0);
        assert_eq!(v1[[1, 0]].re, -1.0);
        assert_eq!(v1[[1, 1]].re, 1.0);

        // V|0> = -2|0> - sqrt(2)|1> at N = 2.
        let v2 = build_jump_operator(2);
        assert_abs_diff_eq!(v2[[0, 0]].re, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v2[[1, 0]].re, -(2.0_f64.sqrt()), epsilon = 1e-15);
        assert_eq!(v2[[2, 0]].re, 0.0);
    }

    #[test]
    fn jump_operator_tridiagonal() {
        let v = build_jump_operator(11);
        for i in 0..12usize {
            for j in 0..12usize {
                if i.abs_diff(j) > 1 {
                    assert_eq!(v[[i, j]], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn dark_state_annihilated_for_all_sizes() {
        for n in 1..=200u32 {
            let psi = StateVector::symmetric_dark_state(n);
            assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
            let v = build_jump_operator(n);
            let vpsi = v.dot(&psi.amplitudes);
            let norm: f64 = vpsi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!(norm < 1e-10, "N = {n}: ||V psi_sym|| = {norm:.3e}");
        }
    }

    #[test]
    fn effective_reduces_to_hamiltonian_without_dissipation() {
        let mut p = params_n(6, 0.5, 1.0, 1.5);
        p.gamma = 0.0;
        for q in [1i8, -1] {
            let heff = build_effective(&p, q);
            let h = build_hamiltonian(&p, q);
            assert_eq!(heff, h);
        }
    }

    #[test]
    fn effective_imaginary_part_from_vdv() {
        let p = params_n(2, 0.5, 1.0, 1.5);
        let heff = build_effective(&p, 1);
        let vdv = build_vdv(2);
        for n in 0..3 {
            assert_abs_diff_eq!(
                heff[[n, n]].im,
                -(0.05 / 2.0) * vdv[[n, n]].re,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn effective_decay_part_negative_semidefinite() {
        // diag entries of V^dag V are non-negative and the anti-Hermitian
        // part is -(rate) V^dag V, a PSD matrix times -i.
        let p = params_n(9, 0.4, 1.0, 1.5);
        let heff = build_effective(&p, -1);
        for n in 0..p.dim() {
            assert!(heff[[n, n]].im <= 0.0);
        }
    }

    #[test]
    fn expectation_on_fock_state() {
        let p = params_n(8, 0.0, 0.0, 0.0);
        let ops = OperatorSet::build(&p).unwrap();
        let psi = StateVector::fock(3, p.dim());
        assert_abs_diff_eq!(ops.number_fraction(&psi), 3.0 / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn expectation_on_eigenvector() {
        // H at N=1 with eps=0 is [[0,-1],[-1,0]]; (1,1)/sqrt(2) has energy -1.
        let p = params_n(1, 0.0, 0.0, 0.0);
        let h = build_hamiltonian(&p, 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(ndarray::array![
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0)
        ]);
        assert_abs_diff_eq!(expectation(&h, &psi).unwrap(), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn expectation_imaginary_residue_small() {
        let p = params_n(12, 0.7, 1.0, 0.4);
        let ops = OperatorSet::build(&p).unwrap();
        let mut psi = StateVector::fock(0, p.dim());
        for (k, a) in psi.amplitudes.iter_mut().enumerate() {
            *a = Complex64::new((k as f64 * 0.7).cos(), (k as f64 * 1.3).sin());
        }
        let raw = expectation_raw(&ops.h_plus, &psi);
        assert!(raw.im.abs() / psi.norm_sqr() < 1e-12);
    }

    #[test]
    fn expectation_rejects_zero_norm() {
        let p = params_n(3, 0.0, 0.0, 0.0);
        let h = build_hamiltonian(&p, 1);
        let psi = StateVector::new(Array1::zeros(4));
        assert!(expectation(&h, &psi).is_err());
    }

    #[test]
    fn jump_from_dark_state_is_an_error() {
        let p = params_n(10, 0.5, 1.0, 1.5);
        let ops = OperatorSet::build(&p).unwrap();
        let psi = StateVector::symmetric_dark_state(10);
        assert!(matches!(
            ops.apply_jump(&psi, 1.0),
            Err(CoreError::DarkStateJump { .. })
        ));
    }

    #[test]
    fn participation_ratio_bounds() {
        let fock = StateVector::fock(2, 9);
        assert_abs_diff_eq!(fock.participation_ratio(), 1.0, epsilon = 1e-12);
        let uniform = StateVector::new(Array1::from_elem(9, Complex64::new(1.0, 0.0)));
        assert_abs_diff_eq!(uniform.participation_ratio(), 9.0, epsilon = 1e-12);
    }
}
