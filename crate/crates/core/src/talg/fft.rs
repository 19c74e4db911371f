//! Fourier-domain representation of third-order tensors.
//!
//! The DFT along the slice index block-diagonalizes every block-circulant
//! matrix, so the t-product becomes `N_s` independent (complex) matrix
//! products. For real tensors the spectrum is conjugate-symmetric:
//! frequency `N_s - f` is the entrywise conjugate of frequency `f`, so
//! products and solves are only carried out on the lower half.

use crate::error::{Error, Result};
use crate::talg::{SymTensor3, IMAG_RESIDUE_TOL};
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// A tensor in the Fourier (transform) domain: one complex matrix per
/// frequency along the slice index.
#[derive(Debug, Clone)]
pub struct FreqTensor {
    n_rows: usize,
    n_cols: usize,
    n_slices: usize,
    freq: Vec<Array2<Complex64>>,
}

impl FreqTensor {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn frequency(&self, f: usize) -> &Array2<Complex64> {
        &self.freq[f]
    }

    /// DFT of every tube (i, j, :) of a real tensor.
    pub fn forward(t: &SymTensor3) -> FreqTensor {
        let (n, c, ns) = (t.n_rows(), t.n_cols(), t.n_slices());
        let fft = FftPlanner::new().plan_fft_forward(ns);
        let mut freq = vec![Array2::from_elem((n, c), Complex64::ZERO); ns];
        let mut tube = vec![Complex64::ZERO; ns];
        for i in 0..n {
            for j in 0..c {
                for (k, slice) in t.slices().iter().enumerate() {
                    tube[k] = Complex64::new(slice[[i, j]], 0.0);
                }
                fft.process(&mut tube);
                for (k, v) in tube.iter().enumerate() {
                    freq[k][[i, j]] = *v;
                }
            }
        }
        FreqTensor { n_rows: n, n_cols: c, n_slices: ns, freq }
    }

    /// Per-frequency matrix product, mirroring the upper half by
    /// conjugate symmetry.
    pub fn matmul(&self, other: &FreqTensor) -> Result<FreqTensor> {
        if self.n_cols != other.n_rows || self.n_slices != other.n_slices {
            return Err(Error::shape(
                "FreqTensor::matmul",
                format!(
                    "({} x {} x {}) * ({} x {} x {})",
                    self.n_rows, self.n_cols, self.n_slices,
                    other.n_rows, other.n_cols, other.n_slices
                ),
            ));
        }
        let ns = self.n_slices;
        let half = ns / 2;
        let lower: Vec<Array2<Complex64>> = (0..=half)
            .into_par_iter()
            .map(|f| complex_matmul(&self.freq[f], &other.freq[f]))
            .collect();
        Ok(FreqTensor {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            n_slices: ns,
            freq: mirror_spectrum(lower, ns),
        })
    }

    /// Per-frequency linear solve `self . y = rhs`.
    pub fn solve(&self, rhs: &FreqTensor) -> Result<FreqTensor> {
        if self.n_rows != self.n_cols {
            return Err(Error::shape("FreqTensor::solve", "coefficient must be square"));
        }
        if self.n_cols != rhs.n_rows || self.n_slices != rhs.n_slices {
            return Err(Error::shape(
                "FreqTensor::solve",
                format!(
                    "({} x {} x {}) vs rhs ({} x {} x {})",
                    self.n_rows, self.n_cols, self.n_slices,
                    rhs.n_rows, rhs.n_cols, rhs.n_slices
                ),
            ));
        }
        let ns = self.n_slices;
        let half = ns / 2;
        let lower: Vec<Result<Array2<Complex64>>> = (0..=half)
            .into_par_iter()
            .map(|f| {
                solve_complex(&self.freq[f], &rhs.freq[f])
                    .ok_or(Error::SingularFrequency { index: f })
            })
            .collect();
        let lower = lower.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(FreqTensor {
            n_rows: self.n_rows,
            n_cols: rhs.n_cols,
            n_slices: ns,
            freq: mirror_spectrum(lower, ns),
        })
    }

    /// Inverse DFT back to a real tensor. Any imaginary residue above
    /// `1e-9` (relative) indicates an internal consistency failure.
    pub fn into_real(self) -> Result<SymTensor3> {
        let (n, c, ns) = (self.n_rows, self.n_cols, self.n_slices);
        let ifft = FftPlanner::new().plan_fft_inverse(ns);
        let mut slices = vec![Array2::zeros((n, c)); ns];
        let mut tube = vec![Complex64::ZERO; ns];
        let mut scale = 0.0f64;
        let mut residue = 0.0f64;
        let inv = 1.0 / ns as f64;
        for i in 0..n {
            for j in 0..c {
                for (k, f) in self.freq.iter().enumerate() {
                    tube[k] = f[[i, j]];
                }
                ifft.process(&mut tube);
                for (k, v) in tube.iter().enumerate() {
                    let re = v.re * inv;
                    slices[k][[i, j]] = re;
                    scale = scale.max(re.abs());
                    residue = residue.max((v.im * inv).abs());
                }
            }
        }
        if residue > IMAG_RESIDUE_TOL * scale.max(1.0) {
            return Err(Error::Internal(format!(
                "imaginary residue {residue:.3e} exceeds tolerance (scale {scale:.3e})"
            )));
        }
        SymTensor3::new(slices, false)
    }
}

fn mirror_spectrum(lower: Vec<Array2<Complex64>>, ns: usize) -> Vec<Array2<Complex64>> {
    let half = ns / 2;
    let mut freq = lower;
    for f in half + 1..ns {
        let conj = freq[ns - f].mapv(|v| v.conj());
        freq.push(conj);
    }
    debug_assert_eq!(freq.len(), ns);
    freq
}

/// Plain ikj-order complex matrix product.
fn complex_matmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (n, p) = a.dim();
    let (_, c) = b.dim();
    let mut out = Array2::from_elem((n, c), Complex64::ZERO);
    for i in 0..n {
        let mut out_row = out.row_mut(i);
        let a_row = a.row(i);
        for k in 0..p {
            let aik = a_row[k];
            if aik == Complex64::ZERO {
                continue;
            }
            let b_row = b.row(k);
            for j in 0..c {
                out_row[j] += aik * b_row[j];
            }
        }
    }
    out
}

/// Gaussian elimination with partial pivoting; `None` when a pivot
/// underflows relative to the matrix scale.
fn solve_complex(a: &Array2<Complex64>, rhs: &Array2<Complex64>) -> Option<Array2<Complex64>> {
    let n = a.nrows();
    let c = rhs.ncols();
    let mut lu = a.clone();
    let mut y = rhs.clone();
    let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, lu[[r, col]].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pivot_mag < 1e-13 * scale {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap([col, j], [pivot_row, j]);
            }
            for j in 0..c {
                y.swap([col, j], [pivot_row, j]);
            }
        }
        let pivot = lu[[col, col]];
        for r in col + 1..n {
            let factor = lu[[r, col]] / pivot;
            if factor == Complex64::ZERO {
                continue;
            }
            for j in col..n {
                let v = lu[[col, j]];
                lu[[r, j]] -= factor * v;
            }
            for j in 0..c {
                let v = y[[col, j]];
                y[[r, j]] -= factor * v;
            }
        }
    }
    // Back substitution.
    for col in (0..n).rev() {
        let pivot = lu[[col, col]];
        for j in 0..c {
            let mut acc = y[[col, j]];
            for k in col + 1..n {
                acc -= lu[[col, k]] * y[[k, j]];
            }
            y[[col, j]] = acc / pivot;
        }
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::talg::{identity_tensor, t_product, t_product_fft, t_solve};
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut ChaCha8Rng, n: usize, c: usize, ns: usize) -> SymTensor3 {
        let slices = (0..ns)
            .map(|_| Array2::from_shape_fn((n, c), |_| rng.random_range(-1.0..1.0)))
            .collect();
        SymTensor3::new(slices, false).unwrap()
    }

    #[test]
    fn fft_matches_direct_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_tensor(&mut rng, 8, 3, 17);
        let b = random_tensor(&mut rng, 3, 2, 17);
        let direct = t_product(&a, &b).unwrap();
        let fast = t_product_fft(&a, &b).unwrap();
        let err = direct.sub(&fast).unwrap().max_abs();
        assert!(err <= 1e-10, "max-abs {err}");
    }

    #[test]
    fn fft_identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_tensor(&mut rng, 4, 2, 9);
        let i = identity_tensor(4, 9).unwrap();
        let y = t_product_fft(&i, &x).unwrap();
        assert!(y.sub(&x).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn fft_zero_operand_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = SymTensor3::zeros(3, 3, 5).unwrap();
        let b = random_tensor(&mut rng, 3, 2, 5);
        let y = t_product_fft(&a, &b).unwrap();
        assert_eq!(y.max_abs(), 0.0);
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random_tensor(&mut rng, 5, 2, 7);
        let i = identity_tensor(5, 7).unwrap();
        let y = t_solve(&i, &x).unwrap();
        assert!(y.sub(&x).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn solve_scaled_identity_halves() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_tensor(&mut rng, 4, 1, 5);
        let a = identity_tensor(4, 5).unwrap().scale(2.0);
        let y = t_solve(&a, &x).unwrap();
        assert!(y.sub(&x.scale(0.5)).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn solve_residual_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        // Diagonally dominant per slice keeps every frequency well conditioned.
        let mut a = random_tensor(&mut rng, 6, 6, 9);
        for k in 0..9 {
            for i in 0..6 {
                a.slices_mut()[k][[i, i]] += 12.0;
            }
        }
        let x = random_tensor(&mut rng, 6, 2, 9);
        let y = t_solve(&a, &x).unwrap();
        let residual = t_product(&a, &y).unwrap().sub(&x).unwrap().max_abs();
        assert!(residual <= 1e-8 * x.max_abs().max(1.0), "residual {residual}");
    }

    #[test]
    fn solve_reports_singular_frequency() {
        // All-zero coefficient tensor is singular at every frequency.
        let a = SymTensor3::zeros(3, 3, 5).unwrap();
        let x = SymTensor3::new(
            vec![array![[1.0], [0.0], [0.0]]; 5],
            false,
        )
        .unwrap();
        match t_solve(&a, &x) {
            Err(Error::SingularFrequency { .. }) => {}
            other => panic!("expected singular frequency error, got {other:?}"),
        }
    }

    #[test]
    fn transpose_is_conjugate_transpose_per_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let t = random_tensor(&mut rng, 4, 3, 7);
        let ft = FreqTensor::forward(&t);
        let ftt = FreqTensor::forward(&crate::talg::t_transpose(&t));
        for f in 0..7 {
            let expected = ft.frequency(f).t().mapv(|v| v.conj());
            let got = ftt.frequency(f);
            let err = expected
                .iter()
                .zip(got.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            assert!(err <= 1e-10, "frequency {f}: {err}");
        }
    }
}
