//! Hypergraph signal denoising: fidelity-plus-Laplacian-regularization
//! objective, its leading-block gradient, the one-step shifting
//! equivalence, the K-step iterative solver, and a closed-form
//! fixed-point oracle.
//!
//! The iteration follows
//! `Y(k) = (1 - 2b - 2bc) Y(k-1) + 2b X + 2bc A_s * Y(k-1)` with
//! `Y(0) = X`. In alpha mode (`alpha = 2b`, `1 - alpha = 2bc`) the
//! first coefficient vanishes and the update reduces to the
//! personalized-PageRank form `Y(k) = alpha X + (1 - alpha) A_s * Y(k-1)`.

use crate::builder::laplacian;
use crate::error::{Error, Result};
use crate::talg::{identity_tensor, t_product_auto, t_solve, t_transpose, SymTensor3, Tube};

/// Solver configuration. `alpha`, when set, derives `b = alpha / 2` and
/// `c = (1 - alpha) / alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseConfig {
    pub b: f64,
    pub c: f64,
    pub k: usize,
    pub tol: f64,
    pub alpha: Option<f64>,
}

pub const DEFAULT_TOL: f64 = 1e-10;

impl DenoiseConfig {
    pub fn new(b: f64, c: f64, k: usize) -> Self {
        DenoiseConfig { b, c, k, tol: DEFAULT_TOL, alpha: None }
    }

    pub fn from_alpha(alpha: f64, k: usize) -> Result<Self> {
        if !(0.0 < alpha && alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!("alpha {alpha} must be in (0, 1]")));
        }
        Ok(DenoiseConfig {
            b: alpha / 2.0,
            c: (1.0 - alpha) / alpha,
            k,
            tol: DEFAULT_TOL,
            alpha: Some(alpha),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::InvalidConfig(format!("b {} must be positive", self.b)));
        }
        if self.c < 0.0 || !self.c.is_finite() {
            return Err(Error::InvalidConfig(format!("c {} must be nonnegative", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol {} must be positive", self.tol)));
        }
        Ok(())
    }

    /// `|1 - 2b - 2bc| + 2bc`; the iteration contracts when this is < 1.
    pub fn contraction_bound(&self) -> f64 {
        (1.0 - 2.0 * self.b - 2.0 * self.b * self.c).abs() + 2.0 * self.b * self.c
    }
}

fn check_signal_shapes(y: &SymTensor3, x: &SymTensor3, op: &'static str) -> Result<()> {
    if (y.n_rows(), y.n_cols(), y.n_slices()) != (x.n_rows(), x.n_cols(), x.n_slices()) {
        return Err(Error::shape(
            op,
            format!(
                "({} x {} x {}) vs ({} x {} x {})",
                y.n_rows(), y.n_cols(), y.n_slices(),
                x.n_rows(), x.n_cols(), x.n_slices()
            ),
        ));
    }
    Ok(())
}

/// The tube-valued objective `(Y-X)^T * (Y-X) + b Y^T * L * Y` for a
/// single feature column (`D = 1`). Multi-feature callers sum the
/// returned tubes over columns.
pub fn objective(y: &SymTensor3, x: &SymTensor3, l: &SymTensor3, b: f64) -> Result<Tube> {
    if y.n_cols() != 1 {
        return Err(Error::shape("objective", "objective expects a single feature column"));
    }
    check_signal_shapes(y, x, "objective")?;
    let tube = objective_traced(y, x, l, b)?;
    Ok(tube)
}

/// Generalization used for logging: for `D` columns returns the sum of
/// the per-column tubes (the trace of each slice of the `D x D` result).
fn objective_traced(y: &SymTensor3, x: &SymTensor3, l: &SymTensor3, b: f64) -> Result<Tube> {
    if l.n_rows() != y.n_rows() || l.n_cols() != y.n_rows() || l.n_slices() != y.n_slices() {
        return Err(Error::shape("objective", "Laplacian shape does not match signal"));
    }
    let diff = y.sub(x)?;
    let fidelity = t_product_auto(&t_transpose(&diff), &diff)?;
    let ly = t_product_auto(l, y)?;
    let reg = t_product_auto(&t_transpose(y), &ly)?;
    let ns = y.n_slices();
    let mut values = Vec::with_capacity(ns);
    for k in 0..ns {
        let trace = |m: &ndarray::Array2<f64>| (0..m.nrows()).map(|i| m[[i, i]]).sum::<f64>();
        values.push(trace(fidelity.slice(k)) + b * trace(reg.slice(k)));
    }
    Ok(Tube(values))
}

/// Scalar monitor for a (possibly multi-column) signal: total of the
/// objective tube. Non-normative; logging only.
pub fn objective_monitor(y: &SymTensor3, x: &SymTensor3, l: &SymTensor3, b: f64) -> Result<f64> {
    Ok(objective_traced(y, x, l, b)?.total())
}

/// The leading block column of the formal gradient:
/// `2 (Y - X) + 2b (L * Y)`.
pub fn gradient_leading(
    y: &SymTensor3,
    x: &SymTensor3,
    l: &SymTensor3,
    b: f64,
) -> Result<SymTensor3> {
    check_signal_shapes(y, x, "gradient_leading")?;
    let diff = y.sub(x)?;
    let ly = t_product_auto(l, y)?;
    diff.scale(2.0).add(&ly.scale(2.0 * b))
}

/// One gradient-descent step from `X`: `(1 - 2bc) X + 2bc (A_s * X)`.
/// With `c = 1/(2b)` this is exactly the shifting `A_s * X`.
pub fn one_step(x: &SymTensor3, a_s: &SymTensor3, b: f64, c: f64) -> Result<SymTensor3> {
    let coeff = 2.0 * b * c;
    let ax = t_product_auto(a_s, x)?;
    x.scale(1.0 - coeff).add(&ax.scale(coeff))
}

/// Result of [`iterate`]: the final signal plus per-step scalar monitors.
#[derive(Debug, Clone)]
pub struct IterateOutcome {
    pub signal: SymTensor3,
    /// Objective monitor per completed step (index 0 = after step 1).
    pub trace: Vec<f64>,
    /// Max-abs update per completed step.
    pub deltas: Vec<f64>,
    /// Max-abs update of the last completed step.
    pub last_delta: f64,
    pub steps_run: usize,
}

/// K-step iterative solver with early stopping on the update max-norm
/// and a divergence guard.
pub fn iterate(x: &SymTensor3, a_s: &SymTensor3, cfg: &DenoiseConfig) -> Result<IterateOutcome> {
    cfg.validate()?;
    if a_s.n_rows() != a_s.n_cols() || a_s.n_rows() != x.n_rows() || a_s.n_slices() != x.n_slices()
    {
        return Err(Error::shape("iterate", "adjacency tensor does not match signal"));
    }
    let l = laplacian(a_s)?;
    let coeff_prev = 1.0 - 2.0 * cfg.b - 2.0 * cfg.b * cfg.c;
    let coeff_x = 2.0 * cfg.b;
    let coeff_shift = 2.0 * cfg.b * cfg.c;
    let input_scale = x.max_abs().max(f64::MIN_POSITIVE);

    let mut y = x.clone();
    let mut trace = Vec::with_capacity(cfg.k);
    let mut deltas = Vec::with_capacity(cfg.k);
    let mut last_delta = 0.0;
    let mut steps_run = 0;
    for _ in 0..cfg.k {
        let shifted = t_product_auto(a_s, &y)?;
        let next = y
            .scale(coeff_prev)
            .add(&x.scale(coeff_x))?
            .add(&shifted.scale(coeff_shift))?;
        if next.max_abs() > 1e6 * input_scale {
            return Err(Error::Divergence { bound: cfg.contraction_bound() });
        }
        last_delta = next.sub(&y)?.max_abs();
        deltas.push(last_delta);
        y = next;
        steps_run += 1;
        trace.push(objective_monitor(&y, x, &l, cfg.b)?);
        if last_delta < cfg.tol {
            break;
        }
    }
    Ok(IterateOutcome { signal: y, trace, deltas, last_delta, steps_run })
}

/// Closed-form stationary point of the leading-block gradient with
/// regularization weight `w`: solves `(I + w L) * Y = X` per frequency.
///
/// Note: with the printed K-step recursion, the iterate limit solves
/// this equation with `w = c` (the step size), not `w = b`.
pub fn fixed_point(x: &SymTensor3, a_s: &SymTensor3, w: f64) -> Result<SymTensor3> {
    if !(w > 0.0) {
        return Err(Error::InvalidConfig(format!("weight {w} must be positive")));
    }
    let l = laplacian(a_s)?;
    let system = identity_tensor(a_s.n_rows(), a_s.n_slices())?.add(&l.scale(w))?;
    t_solve(&system, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::talg::{bcirc, t_product, unfold};
    use ndarray::{array, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_signal(rng: &mut ChaCha8Rng, n: usize, ns: usize) -> SymTensor3 {
        SymTensor3::new(
            (0..ns)
                .map(|_| Array2::from_shape_fn((n, 1), |_| rng.random_range(-1.0..1.0)))
                .collect(),
            false,
        )
        .unwrap()
    }

    fn random_operator(rng: &mut ChaCha8Rng, n: usize, ns: usize, scale: f64) -> SymTensor3 {
        SymTensor3::new(
            (0..ns)
                .map(|_| Array2::from_shape_fn((n, n), |_| rng.random_range(-scale..scale)))
                .collect(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn objective_at_truth_is_regularizer_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_signal(&mut rng, 4, 5);
        let l = random_operator(&mut rng, 4, 5, 0.5);
        let b = 0.7;
        let tube = objective(&x, &x, &l, b).unwrap();
        let expected = t_product(&t_transpose(&x), &t_product(&l, &x).unwrap()).unwrap();
        for k in 0..5 {
            assert!((tube.0[k] - b * expected.slice(k)[[0, 0]]).abs() < 1e-12);
        }
    }

    #[test]
    fn objective_zero_when_b_zero_and_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_signal(&mut rng, 3, 3);
        let l = random_operator(&mut rng, 3, 3, 0.5);
        let tube = objective(&x, &x, &l, 0.0).unwrap();
        assert!(tube.0.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn objective_matches_bcirc_quadratic_form() {
        // Tube entry 0 equals the unfolded quadratic form through bcirc.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = random_signal(&mut rng, 4, 5);
        let x = random_signal(&mut rng, 4, 5);
        let l = random_operator(&mut rng, 4, 5, 0.4);
        let b = 0.3;
        let tube = objective(&y, &x, &l, b).unwrap();
        let uy = unfold(&y);
        let ux = unfold(&x);
        let diff = &uy - &ux;
        let fid = diff.t().dot(&diff)[[0, 0]];
        let reg = uy.t().dot(&bcirc(&l).dot(&uy))[[0, 0]];
        assert!((tube.0[0] - (fid + b * reg)).abs() < 1e-10);
    }

    #[test]
    fn gradient_zero_at_truth_without_regularization() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_signal(&mut rng, 4, 5);
        let l = random_operator(&mut rng, 4, 5, 0.4);
        let g = gradient_leading(&x, &x, &l, 0.0).unwrap();
        assert!(g.max_abs() < 1e-14);
    }

    #[test]
    fn gradient_at_truth_is_laplacian_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_signal(&mut rng, 4, 5);
        let l = random_operator(&mut rng, 4, 5, 0.4);
        let b = 0.6;
        let g = gradient_leading(&x, &x, &l, b).unwrap();
        let expected = t_product(&l, &x).unwrap().scale(2.0 * b);
        assert!(g.sub(&expected).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn one_step_with_matched_step_size_is_pure_shifting() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_signal(&mut rng, 5, 7);
        let a = random_operator(&mut rng, 5, 7, 0.2);
        for b in [0.1, 0.5, 2.0] {
            let y = one_step(&x, &a, b, 1.0 / (2.0 * b)).unwrap();
            let shifted = t_product(&a, &x).unwrap();
            assert!(y.sub(&shifted).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn one_step_with_zero_rate_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_signal(&mut rng, 4, 3);
        let a = random_operator(&mut rng, 4, 3, 0.3);
        let y = one_step(&x, &a, 0.5, 0.0).unwrap();
        assert!(y.sub(&x).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn one_step_is_gradient_step_from_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_signal(&mut rng, 5, 5);
        let a = random_operator(&mut rng, 5, 5, 0.3);
        let l = laplacian(&a).unwrap();
        let (b, c) = (0.4, 0.7);
        let y = one_step(&x, &a, b, c).unwrap();
        let manual = x
            .sub(&gradient_leading(&x, &x, &l, b).unwrap().scale(c))
            .unwrap();
        assert!(y.sub(&manual).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn iterate_zero_steps_returns_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_signal(&mut rng, 4, 5);
        let a = random_operator(&mut rng, 4, 5, 0.2);
        let out = iterate(&x, &a, &DenoiseConfig::new(0.5, 0.2, 0)).unwrap();
        assert_eq!(out.signal, x);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn iterate_alpha_mode_is_ppr_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random_signal(&mut rng, 4, 5);
        let a = random_operator(&mut rng, 4, 5, 0.2);
        let alpha = 0.25;
        let cfg = DenoiseConfig::from_alpha(alpha, 4).unwrap();
        let out = iterate(&x, &a, &cfg).unwrap();
        let mut y = x.clone();
        for _ in 0..4 {
            let shifted = t_product_auto(&a, &y).unwrap();
            y = x.scale(alpha).add(&shifted.scale(1.0 - alpha)).unwrap();
        }
        assert!(out.signal.sub(&y).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn iterate_converges_to_fixed_point_in_step_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_signal(&mut rng, 5, 7);
        // Row-stochastic-like scale keeps the spectral radius below 1.
        let a = random_operator(&mut rng, 5, 7, 0.1);
        let cfg = DenoiseConfig { b: 0.5, c: 0.2, k: 200, tol: 1e-14, alpha: None };
        let out = iterate(&x, &a, &cfg).unwrap();
        let star = fixed_point(&x, &a, cfg.c).unwrap();
        assert!(out.signal.sub(&star).unwrap().max_abs() <= 1e-8);
    }

    #[test]
    fn fixed_point_of_zero_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_signal(&mut rng, 4, 3);
        let a = SymTensor3::zeros(4, 4, 3).unwrap();
        let b = 0.8;
        let y = fixed_point(&x, &a, b).unwrap();
        assert!(y.sub(&x.scale(1.0 / (1.0 + b))).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn fixed_point_small_weight_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = random_signal(&mut rng, 4, 5);
        let a = random_operator(&mut rng, 4, 5, 0.2);
        let y = fixed_point(&x, &a, 1e-8).unwrap();
        assert!(y.sub(&x).unwrap().max_abs() <= 1e-6);
    }

    #[test]
    fn fixed_point_kills_leading_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let x = random_signal(&mut rng, 5, 5);
        let a = random_operator(&mut rng, 5, 5, 0.15);
        let b = 0.6;
        let l = laplacian(&a).unwrap();
        let y = fixed_point(&x, &a, b).unwrap();
        let g = gradient_leading(&y, &x, &l, b).unwrap();
        assert!(g.max_abs() <= 1e-7 * (1.0 + x.max_abs()));
    }

    #[test]
    fn divergence_guard_triggers() {
        let x = SymTensor3::new(vec![array![[1.0]]; 3], false).unwrap();
        let a = SymTensor3::new(vec![array![[40.0]]; 3], false).unwrap();
        let cfg = DenoiseConfig::new(2.0, 5.0, 100);
        match iterate(&x, &a, &cfg) {
            Err(Error::Divergence { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
