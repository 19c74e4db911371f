//! The t-algebra kernel.
//!
//! Third-order tensors are stored slice-major: a tensor of shape
//! `N x C x N_s` is a sequence of `N_s` dense `N x C` frontal slices.
//! The t-product `a * b = fold(bcirc(a) . unfold(b))` is computed either
//! directly via its slice-convolution form or through the Fourier domain,
//! where the block-circulant structure diagonalizes into `N_s` independent
//! matrix products.

mod fft;

pub use fft::FreqTensor;

use crate::error::{Error, Result};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Slice count at or above which the FFT path is used by default.
/// Below it the direct slice-convolution is faster (measured via `bench`).
pub const FFT_CROSSOVER_SLICES: usize = 8;

/// Maximum tolerated imaginary residue (relative) when materializing a
/// Fourier-domain result back to a real tensor.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// A third-order tensor with an arbitrary number of frontal slices.
///
/// This is the carrier for unsymmetrized data (e.g. the flattened
/// adjacency tensor, whose slice count `N^(M-2)` need not be odd).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n_rows: usize,
    n_cols: usize,
    slices: Vec<Array2<f64>>,
}

impl Tensor3 {
    pub fn new(slices: Vec<Array2<f64>>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::shape("Tensor3::new", "no frontal slices"));
        }
        let (n_rows, n_cols) = slices[0].dim();
        for (k, s) in slices.iter().enumerate() {
            if s.dim() != (n_rows, n_cols) {
                return Err(Error::shape(
                    "Tensor3::new",
                    format!("slice {k} has shape {:?}, expected ({n_rows}, {n_cols})", s.dim()),
                ));
            }
        }
        Ok(Tensor3 { n_rows, n_cols, slices })
    }

    pub fn zeros(n_rows: usize, n_cols: usize, n_slices: usize) -> Self {
        Tensor3 {
            n_rows,
            n_cols,
            slices: vec![Array2::zeros((n_rows, n_cols)); n_slices],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[Array2<f64>] {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.slices
    }

    /// Sum of all frontal slices.
    pub fn slice_sum(&self) -> Array2<f64> {
        let mut acc = Array2::zeros((self.n_rows, self.n_cols));
        for s in &self.slices {
            acc += s;
        }
        acc
    }
}

/// A third-order tensor with an odd number of frontal slices, the
/// universal operand of the t-algebra.
///
/// When `symmetrized` is set, the first slice is all-zero and slice `k`
/// equals slice `N_s - k` for `k = 1..N_s-1` (reflection structure
/// produced by [`crate::builder::symmetrize`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor3 {
    n_rows: usize,
    n_cols: usize,
    n_slices: usize,
    slices: Vec<Array2<f64>>,
    symmetrized: bool,
}

/// JSON dump layout for tensors (debug/test fixtures and CLI output).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorDump {
    pub n_rows: usize,
    pub n_cols: usize,
    pub n_slices: usize,
    pub symmetrized: bool,
    pub slices: Vec<Vec<Vec<f64>>>,
}

impl SymTensor3 {
    pub fn new(slices: Vec<Array2<f64>>, symmetrized: bool) -> Result<Self> {
        let t = Tensor3::new(slices)?;
        if t.n_slices() % 2 == 0 {
            return Err(Error::shape(
                "SymTensor3::new",
                format!("slice count {} must be odd", t.n_slices()),
            ));
        }
        let out = SymTensor3 {
            n_rows: t.n_rows,
            n_cols: t.n_cols,
            n_slices: t.slices.len(),
            slices: t.slices,
            symmetrized,
        };
        if symmetrized && !out.reflection_holds(0.0) {
            return Err(Error::shape(
                "SymTensor3::new",
                "symmetrized flag set but reflection structure does not hold",
            ));
        }
        Ok(out)
    }

    pub fn zeros(n_rows: usize, n_cols: usize, n_slices: usize) -> Result<Self> {
        if n_slices % 2 == 0 {
            return Err(Error::shape("SymTensor3::zeros", "slice count must be odd"));
        }
        Ok(SymTensor3 {
            n_rows,
            n_cols,
            n_slices,
            slices: vec![Array2::zeros((n_rows, n_cols)); n_slices],
            symmetrized: false,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn slices(&self) -> &[Array2<f64>] {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut [Array2<f64>] {
        self.symmetrized = false;
        &mut self.slices
    }

    pub fn slice(&self, k: usize) -> &Array2<f64> {
        &self.slices[k]
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub(crate) fn set_symmetrized(&mut self, flag: bool) {
        self.symmetrized = flag;
    }

    /// True if slice 0 is zero and slice k mirrors slice N_s - k within `tol`.
    pub fn reflection_holds(&self, tol: f64) -> bool {
        if self.slices[0].iter().any(|v| v.abs() > tol) {
            return false;
        }
        for k in 1..=(self.n_slices - 1) / 2 {
            let a = &self.slices[k];
            let b = &self.slices[self.n_slices - k];
            if a.iter().zip(b.iter()).any(|(x, y)| (x - y).abs() > tol) {
                return false;
            }
        }
        true
    }

    /// Sum of all frontal slices.
    pub fn slice_sum(&self) -> Array2<f64> {
        let mut acc = Array2::zeros((self.n_rows, self.n_cols));
        for s in &self.slices {
            acc += s;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.slices
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, factor: f64) -> SymTensor3 {
        SymTensor3 {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            n_slices: self.n_slices,
            slices: self.slices.iter().map(|s| s * factor).collect(),
            symmetrized: self.symmetrized,
        }
    }

    pub fn add(&self, other: &SymTensor3) -> Result<SymTensor3> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &SymTensor3) -> Result<SymTensor3> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &SymTensor3,
        op: &'static str,
        f: impl Fn(&Array2<f64>, &Array2<f64>) -> Array2<f64>,
    ) -> Result<SymTensor3> {
        if (self.n_rows, self.n_cols, self.n_slices)
            != (other.n_rows, other.n_cols, other.n_slices)
        {
            return Err(Error::shape(
                "zip_with",
                format!(
                    "{op}: ({}, {}, {}) vs ({}, {}, {})",
                    self.n_rows, self.n_cols, self.n_slices,
                    other.n_rows, other.n_cols, other.n_slices
                ),
            ));
        }
        let slices = self
            .slices
            .iter()
            .zip(other.slices.iter())
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(SymTensor3 {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            n_slices: self.n_slices,
            slices,
            symmetrized: false,
        })
    }

    pub fn to_dump(&self) -> TensorDump {
        TensorDump {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            n_slices: self.n_slices,
            symmetrized: self.symmetrized,
            slices: self
                .slices
                .iter()
                .map(|s| s.outer_iter().map(|r| r.to_vec()).collect())
                .collect(),
        }
    }

    pub fn from_dump(dump: &TensorDump) -> Result<SymTensor3> {
        if dump.slices.len() != dump.n_slices {
            return Err(Error::shape(
                "SymTensor3::from_dump",
                format!("{} slices listed, header says {}", dump.slices.len(), dump.n_slices),
            ));
        }
        let mut slices = Vec::with_capacity(dump.n_slices);
        for (k, rows) in dump.slices.iter().enumerate() {
            if rows.len() != dump.n_rows || rows.iter().any(|r| r.len() != dump.n_cols) {
                return Err(Error::shape(
                    "SymTensor3::from_dump",
                    format!("slice {k} does not match ({}, {})", dump.n_rows, dump.n_cols),
                ));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            slices.push(
                Array2::from_shape_vec((dump.n_rows, dump.n_cols), flat)
                    .map_err(|e| Error::shape("SymTensor3::from_dump", e.to_string()))?,
            );
        }
        SymTensor3::new(slices, dump.symmetrized)
    }
}

/// A `1 x 1 x N_s` tensor, the scalar-like object of the t-algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Tube(pub Vec<f64>);

impl Tube {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Scalar monitor: the total of the leading block column (all entries).
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Stack the frontal slices vertically into an `(N_s * N) x C` matrix.
pub fn unfold(t: &SymTensor3) -> Array2<f64> {
    let n = t.n_rows;
    let mut out = Array2::zeros((t.n_slices * n, t.n_cols));
    for (k, s) in t.slices.iter().enumerate() {
        out.slice_mut(ndarray::s![k * n..(k + 1) * n, ..]).assign(s);
    }
    out
}

/// Inverse of [`unfold`]: split the block rows back into frontal slices.
pub fn fold(m: &Array2<f64>, n_rows: usize, n_slices: usize) -> Result<SymTensor3> {
    let rows = m.nrows();
    if n_rows * n_slices != rows {
        return Err(Error::shape(
            "fold",
            format!("{rows} rows not equal to n_rows {n_rows} * n_slices {n_slices}"),
        ));
    }
    let slices = (0..n_slices)
        .map(|k| m.slice(ndarray::s![k * n_rows..(k + 1) * n_rows, ..]).to_owned())
        .collect::<Vec<Array2<f64>>>();
    SymTensor3::new(slices, false)
}

/// Materialize the block circulant matrix whose first block column is
/// `unfold(t)`. O((N_s N)^2) memory; used by tests and small oracles only.
pub fn bcirc(t: &SymTensor3) -> Array2<f64> {
    let n = t.n_rows;
    let c = t.n_cols;
    let ns = t.n_slices;
    let mut out = Array2::zeros((ns * n, ns * c));
    for br in 0..ns {
        for bc in 0..ns {
            let k = (br + ns - bc) % ns;
            out.slice_mut(ndarray::s![br * n..(br + 1) * n, bc * c..(bc + 1) * c])
                .assign(&t.slices[k]);
        }
    }
    out
}

fn check_product_shapes(a: &SymTensor3, b: &SymTensor3, op: &'static str) -> Result<()> {
    if a.n_cols != b.n_rows || a.n_slices != b.n_slices {
        return Err(Error::shape(
            op,
            format!(
                "({} x {} x {}) * ({} x {} x {})",
                a.n_rows, a.n_cols, a.n_slices, b.n_rows, b.n_cols, b.n_slices
            ),
        ));
    }
    Ok(())
}

/// t-product via the slice-convolution form: result slice k is
/// `sum_j a_j . b_((k - j) mod N_s)`, algebraically identical to
/// `fold(bcirc(a) . unfold(b))` without materializing `bcirc`.
pub fn t_product(a: &SymTensor3, b: &SymTensor3) -> Result<SymTensor3> {
    check_product_shapes(a, b, "t_product")?;
    let ns = a.n_slices;
    let mut slices = vec![Array2::zeros((a.n_rows, b.n_cols)); ns];
    for (j, aj) in a.slices.iter().enumerate() {
        for (m, bm) in b.slices.iter().enumerate() {
            let k = (j + m) % ns;
            slices[k] += &aj.dot(bm);
        }
    }
    SymTensor3::new(slices, false)
}

/// t-product through the Fourier domain; identical to [`t_product`]
/// within 1e-10 max-abs.
pub fn t_product_fft(a: &SymTensor3, b: &SymTensor3) -> Result<SymTensor3> {
    check_product_shapes(a, b, "t_product_fft")?;
    let fa = FreqTensor::forward(a);
    let fb = FreqTensor::forward(b);
    fa.matmul(&fb)?.into_real()
}

/// Dispatch between the direct and FFT paths by slice count.
pub fn t_product_auto(a: &SymTensor3, b: &SymTensor3) -> Result<SymTensor3> {
    if a.n_slices() >= FFT_CROSSOVER_SLICES {
        t_product_fft(a, b)
    } else {
        t_product(a, b)
    }
}

/// Tensor transpose: transpose each slice, keep slice 0, reverse the
/// order of the remaining slices.
pub fn t_transpose(t: &SymTensor3) -> SymTensor3 {
    let ns = t.n_slices;
    let slices = (0..ns)
        .map(|k| t.slices[(ns - k) % ns].t().to_owned())
        .collect();
    SymTensor3 {
        n_rows: t.n_cols,
        n_cols: t.n_rows,
        n_slices: ns,
        slices,
        symmetrized: t.symmetrized && t.n_rows == t.n_cols,
    }
}

/// Identity tensor: first frontal slice is the identity matrix, all
/// other entries zero.
pub fn identity_tensor(n: usize, n_slices: usize) -> Result<SymTensor3> {
    if n_slices % 2 == 0 {
        return Err(Error::shape("identity_tensor", "slice count must be odd"));
    }
    let mut slices = vec![Array2::zeros((n, n)); n_slices];
    slices[0] = Array2::eye(n);
    SymTensor3::new(slices, false)
}

/// Solve `a * y = x` per Fourier frequency.
///
/// Errors with the offending frequency index if any frequency-domain
/// slice of `a` is numerically singular. On success the residual
/// satisfies `max_abs(a * y - x) <= 1e-8 * max_abs(x)` for
/// well-conditioned `a`.
pub fn t_solve(a: &SymTensor3, x: &SymTensor3) -> Result<SymTensor3> {
    if a.n_rows != a.n_cols {
        return Err(Error::shape("t_solve", "a must be square per slice"));
    }
    check_product_shapes(a, x, "t_solve")?;
    let fa = FreqTensor::forward(a);
    let fx = FreqTensor::forward(x);
    fa.solve(&fx)?.into_real()
}
