//! Dense complex linear algebra used by the propagators.
//!
//! The matrix exponential follows the scaling-and-squaring scheme with a
//! Pade(13) approximant (Higham 2005); it handles the non-normal effective
//! generators without requiring an eigendecomposition. The propagator itself
//! is stored with split real/imaginary parts so the per-substep
//! matrix-vector product runs as four real column-sweep kernels, which
//! vectorize well and keep the summation order fixed.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Max column sum of absolute values.
pub fn norm_1(a: &Array2<Complex64>) -> f64 {
    let mut max = 0.0_f64;
    for col in a.columns() {
        let s: f64 = col.iter().map(|x| x.norm()).sum();
        max = max.max(s);
    }
    max
}

/// Frobenius distance between two matrices.
pub fn frobenius_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Largest absolute deviation from Hermiticity.
pub fn hermiticity_defect(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut max = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            max = max.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    max
}

// Pade(13) numerator coefficients, Higham (2005) Table 10.4 scheme.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential `exp(A)` by scaling-and-squaring with Pade(13).
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Array2::zeros((0, 0));
    }

    let norm = norm_1(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let scale = Complex64::new((0.5_f64).powi(squarings as i32), 0.0);
    let a1 = a * scale;

    let eye = Array2::from_diag_elem(n, Complex64::new(1.0, 0.0));
    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let c = |k: usize| Complex64::new(PADE13[k], 0.0);
    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let u_inner = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u = a1.dot(&(a6.dot(&u_inner) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &eye * c(1)));
    // W = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let w_inner = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let w = a6.dot(&w_inner) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &eye * c(0);

    // exp(A1) ~ (W - U)^-1 (W + U)
    let mut result = solve_dense(&(&w - &u), &(&w + &u));
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// Solve `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let m = b.ncols();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.nrows());

    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = lu[[col, col]].norm();
        for row in col + 1..n {
            let mag = lu[[row, col]].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        assert!(pivot_mag > 0.0, "singular matrix in solve_dense");
        if pivot_row != col {
            for j in 0..n {
                lu.swap([col, j], [pivot_row, j]);
            }
            for j in 0..m {
                x.swap([col, j], [pivot_row, j]);
            }
        }
        let pivot = lu[[col, col]];
        for row in col + 1..n {
            let factor = lu[[row, col]] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = lu[[col, j]];
                lu[[row, j]] -= factor * v;
            }
            for j in 0..m {
                let v = x[[col, j]];
                x[[row, j]] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let pivot = lu[[col, col]];
        for j in 0..m {
            let mut sum = x[[col, j]];
            for k in col + 1..n {
                sum -= lu[[col, k]] * x[[k, j]];
            }
            x[[col, j]] = sum / pivot;
        }
    }
    x
}

/// Dense complex matrix stored as split real/imaginary parts in
/// column-major order, specialized for repeated matrix-vector products.
#[derive(Debug, Clone)]
pub struct SplitMatrix {
    dim: usize,
    // Column-major: entry (i, j) lives at [j * dim + i].
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SplitMatrix {
    pub fn from_complex(a: &Array2<Complex64>) -> Self {
        let dim = a.nrows();
        assert_eq!(dim, a.ncols());
        let mut re = vec![0.0; dim * dim];
        let mut im = vec![0.0; dim * dim];
        for j in 0..dim {
            for i in 0..dim {
                re[j * dim + i] = a[[i, j]].re;
                im[j * dim + i] = a[[i, j]].im;
            }
        }
        Self { dim, re, im }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `y = A x` on a complex vector, without allocating.
    ///
    /// Column sweeps accumulate `y += col_j * x_j`, so there is no reduction
    /// across the fast axis and the loops auto-vectorize; the accumulation
    /// order is fixed, keeping results bit-reproducible.
    pub fn apply(&self, x: &Array1<Complex64>, y: &mut Array1<Complex64>, scratch: &mut MatVecScratch) {
        let dim = self.dim;
        assert_eq!(x.len(), dim);
        assert_eq!(y.len(), dim);
        scratch.resize(dim);
        let (yr, yi) = scratch.split();
        yr.fill(0.0);
        yi.fill(0.0);
        let xs = x.as_slice().expect("contiguous state vector");
        for (j, xj) in xs.iter().enumerate() {
            let (xr, xi) = (xj.re, xj.im);
            if xr == 0.0 && xi == 0.0 {
                continue;
            }
            let cr = &self.re[j * dim..(j + 1) * dim];
            let ci = &self.im[j * dim..(j + 1) * dim];
            for i in 0..dim {
                let (ar, ai) = (cr[i], ci[i]);
                yr[i] += ar * xr - ai * xi;
                yi[i] += ar * xi + ai * xr;
            }
        }
        let ys = y.as_slice_mut().expect("contiguous output vector");
        for i in 0..dim {
            ys[i] = Complex64::new(yr[i], yi[i]);
        }
    }
}

/// Reusable buffers for [`SplitMatrix::apply`].
#[derive(Debug, Clone, Default)]
pub struct MatVecScratch {
    buf: Vec<f64>,
}

impl MatVecScratch {
    pub fn new(dim: usize) -> Self {
        Self {
            buf: vec![0.0; 2 * dim],
        }
    }

    fn resize(&mut self, dim: usize) {
        if self.buf.len() != 2 * dim {
            self.buf.resize(2 * dim, 0.0);
        }
    }

    fn split(&mut self) -> (&mut [f64], &mut [f64]) {
        let dim = self.buf.len() / 2;
        self.buf.split_at_mut(dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = Array2::<Complex64>::zeros((5, 5));
        let e = expm(&z);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e[[i, j]] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn expm_diagonal() {
        let a = Array2::from_diag(&array![c(1.0, 0.0), c(-2.0, 0.5), c(0.0, 3.0)]);
        let e = expm(&a);
        for (k, lam) in [c(1.0, 0.0), c(-2.0, 0.5), c(0.0, 3.0)].iter().enumerate() {
            assert!((e[[k, k]] - lam.exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_pauli_rotation() {
        // exp(-i theta sx) = cos(theta) I - i sin(theta) sx
        let theta = 0.7;
        let a = array![[c(0.0, 0.0), c(0.0, -theta)], [c(0.0, -theta), c(0.0, 0.0)]];
        let e = expm(&a);
        assert!((e[[0, 0]] - c(theta.cos(), 0.0)).norm() < 1e-14);
        assert!((e[[0, 1]] - c(0.0, -theta.sin())).norm() < 1e-14);
    }

    #[test]
    fn expm_inverse_pairing() {
        // exp(A) exp(-A) = I for a random-ish non-normal matrix.
        let n = 8;
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let v = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5;
                let w = ((i * 5 + j * 13) % 17) as f64 / 17.0 - 0.5;
                a[[i, j]] = c(v, w);
            }
        }
        let e = expm(&a);
        let em = expm(&a.mapv(|x| -x));
        let prod = e.dot(&em);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (prod[[i, j]] - c(want, 0.0)).norm() < 1e-12,
                    "({i},{j}): {:?}",
                    prod[[i, j]]
                );
            }
        }
    }

    #[test]
    fn expm_large_norm_scaling_path() {
        // Norm >> theta so several squarings are exercised.
        let a = array![[c(0.0, -40.0), c(-3.0, 0.0)], [c(-3.0, 0.0), c(0.0, 40.0)]];
        let e = expm(&a);
        let em = expm(&a.mapv(|x| -x));
        let prod = e.dot(&em);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - c(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn solve_dense_roundtrip() {
        let a = array![
            [c(2.0, 1.0), c(0.5, 0.0), c(0.0, -1.0)],
            [c(0.0, 0.3), c(-1.5, 0.2), c(2.0, 0.0)],
            [c(1.0, 0.0), c(0.0, 2.0), c(0.7, -0.4)]
        ];
        let b = array![
            [c(1.0, 0.0), c(0.0, 1.0)],
            [c(0.0, 0.0), c(2.0, -1.0)],
            [c(3.0, 0.5), c(0.0, 0.0)]
        ];
        let x = solve_dense(&a, &b);
        let back = a.dot(&x);
        for (u, v) in back.iter().zip(b.iter()) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn split_matvec_matches_complex_dot() {
        let n = 17;
        let mut a = Array2::zeros((n, n));
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[i] = c((i as f64 * 0.37).sin(), (i as f64 * 0.91).cos());
            for j in 0..n {
                a[[i, j]] = c(
                    ((i * 3 + j) as f64 * 0.11).sin(),
                    ((i + 5 * j) as f64 * 0.23).cos(),
                );
            }
        }
        let split = SplitMatrix::from_complex(&a);
        let mut y = Array1::zeros(n);
        let mut scratch = MatVecScratch::new(n);
        split.apply(&x, &mut y, &mut scratch);
        let reference = a.dot(&x);
        for (u, v) in y.iter().zip(reference.iter()) {
            assert!((u - v).norm() < 1e-13);
        }
    }
}
