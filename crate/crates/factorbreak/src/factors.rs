//! Principal-component estimation of the factor model and residuals.
//!
//! Given a T x N panel `X` and a factor count `r`, the estimator solves the
//! eigenvalue problem `X X' Fhat = Fhat Vhat` under the normalization
//! `(1/T) Fhat' Fhat = I_r`, so the factor columns are `sqrt(T)` times the
//! leading orthonormal eigenvectors of the time-by-time Gram matrix.
//! Loadings are `Lhat = X' Fhat / T` and residuals `E = X - Fhat Lhat'`,
//! i.e. the projection of `X` off the span of the estimated factors.
//!
//! When `N < T` the same factors come cheaper from the unit-by-unit Gram
//! matrix `X' X`: an eigenpair `(mu, w)` maps to the factor column
//! `sqrt(T) X w / sqrt(mu)`. [`estimate_factors`] picks the smaller side
//! automatically and falls back to the time side when a requested
//! eigenvalue is too close to zero for the conversion to be stable; the two
//! routes agree on residuals to high accuracy and are both exposed for
//! verification through [`estimate_factors_via`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::panel::PanelData;

/// Which Gram matrix the eigensolver works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramSide {
    /// Eigendecompose the T x T matrix `X X'`.
    Time,
    /// Eigendecompose the N x N matrix `X' X` and convert.
    Unit,
    /// Pick the cheaper side, with a stability fallback to `Time`.
    Auto,
}

/// Estimated factor structure of a panel.
#[derive(Debug, Clone)]
pub struct FactorEstimate {
    /// Number of extracted factors.
    pub r_tilde: usize,
    /// T x r factor matrix with `(1/T) Fhat' Fhat = I`.
    pub f_hat: DMatrix<f64>,
    /// N x r loading matrix `X' Fhat / T`.
    pub lambda_hat: DMatrix<f64>,
    /// Leading eigenvalues of `X X'`, descending.
    pub eigvals: DVector<f64>,
    /// T x N residual matrix `X - Fhat Lhat'`.
    pub residuals: DMatrix<f64>,
    /// Per-period residual sums `s_t = sum_i residuals[t, i]`.
    pub residual_colsum: DVector<f64>,
}

impl FactorEstimate {
    /// The cached per-period residual sums over units.
    pub fn residual_column_sums(&self) -> &DVector<f64> {
        &self.residual_colsum
    }
}

/// Relative eigenvalue floor below which the unit-side conversion
/// `sqrt(T) X w / sqrt(mu)` is considered unstable.
const DUAL_PATH_RTOL: f64 = 1e-9;

/// Iteration cap handed to the eigensolver; convergence failures surface as
/// numeric errors instead of hanging.
const EIG_MAX_SWEEPS: usize = 100_000;

/// Estimate `r_tilde` factors from a panel by PCA (automatic Gram side).
pub fn estimate_factors(panel: &PanelData, r_tilde: usize) -> Result<FactorEstimate> {
    estimate_factors_via(panel, r_tilde, GramSide::Auto)
}

/// Estimate factors using an explicit Gram side (used by the equivalence
/// checks; `Auto` is the production route).
pub fn estimate_factors_via(
    panel: &PanelData,
    r_tilde: usize,
    side: GramSide,
) -> Result<FactorEstimate> {
    estimate_factors_raw(panel.values(), r_tilde, side)
}

/// Matrix-level estimator; the simulation loop calls this directly to skip
/// panel bookkeeping.
pub(crate) fn estimate_factors_raw(
    x: &DMatrix<f64>,
    r_tilde: usize,
    side: GramSide,
) -> Result<FactorEstimate> {
    let (t, n) = (x.nrows(), x.ncols());
    if r_tilde < 1 || r_tilde > t.min(n) {
        return Err(Error::Config(format!(
            "factor count {r_tilde} out of range 1..={}",
            t.min(n)
        )));
    }

    let f_hat = match side {
        GramSide::Time => time_side_factors(x, r_tilde)?,
        GramSide::Unit => unit_side_factors(x, r_tilde)?
            .ok_or_else(|| Error::Numeric(
                "factor estimation: eigenvalue too small for the unit-side conversion".into(),
            ))?,
        GramSide::Auto => {
            if n < t {
                match unit_side_factors(x, r_tilde)? {
                    Some(f) => f,
                    None => time_side_factors(x, r_tilde)?,
                }
            } else {
                time_side_factors(x, r_tilde)?
            }
        }
    };

    // Loadings, residuals, and the eigenvalues of X X' recovered from the
    // normalized factors: X X' f = mu f with |f|^2 = T gives
    // mu = |X' f|^2 / T.
    let lambda_hat = x.tr_mul(&f_hat) / t as f64;
    let eigvals = DVector::from_fn(r_tilde, |k, _| {
        x.tr_mul(&f_hat.column(k)).norm_squared() / t as f64
    });
    let residuals = x - &f_hat * lambda_hat.transpose();
    let residual_colsum = row_sums(&residuals);

    Ok(FactorEstimate { r_tilde, f_hat, lambda_hat, eigvals, residuals, residual_colsum })
}

/// Factors from the T x T Gram matrix: `sqrt(T)` times its leading
/// eigenvectors.
fn time_side_factors(x: &DMatrix<f64>, r_tilde: usize) -> Result<DMatrix<f64>> {
    let t = x.nrows();
    let gram = x * x.transpose();
    let (_vals, vecs) = sorted_symmetric_eigen(gram)?;
    let mut f_hat = DMatrix::zeros(t, r_tilde);
    for k in 0..r_tilde {
        f_hat.set_column(k, &(vecs.column(k) * (t as f64).sqrt()));
    }
    apply_sign_convention(&mut f_hat);
    Ok(f_hat)
}

/// `X' X` exploiting symmetry: one dot product per upper-triangle entry
/// over the contiguous columns.
fn unit_gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.ncols();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        let ci = x.column(i);
        for j in i..n {
            let v = ci.dot(&x.column(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Factors from the N x N Gram matrix. Returns `None` when a requested
/// eigenvalue is too small relative to the largest one for a stable
/// conversion (rank-deficient panels); callers fall back to the time side.
fn unit_side_factors(x: &DMatrix<f64>, r_tilde: usize) -> Result<Option<DMatrix<f64>>> {
    let t = x.nrows();
    let gram = unit_gram(x);
    let (vals, vecs) = sorted_symmetric_eigen(gram)?;
    let floor = vals[0].max(0.0) * DUAL_PATH_RTOL;
    if vals[0] <= 0.0 || vals[..r_tilde].iter().any(|&v| v <= floor) {
        return Ok(None);
    }
    let mut f_hat = DMatrix::zeros(t, r_tilde);
    for (k, &val) in vals.iter().enumerate().take(r_tilde) {
        let f = x * vecs.column(k) * ((t as f64).sqrt() / val.sqrt());
        f_hat.set_column(k, &f);
    }
    apply_sign_convention(&mut f_hat);
    Ok(Some(f_hat))
}

/// Full symmetric eigendecomposition with eigenvalues sorted descending.
fn sorted_symmetric_eigen(gram: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = gram.nrows();
    let eig = gram
        .try_symmetric_eigen(f64::EPSILON, EIG_MAX_SWEEPS)
        .ok_or_else(|| Error::Numeric("eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// Deterministic eigenvector orientation: the entry of largest magnitude in
/// each column is made positive, ties broken by the lowest row index.
fn apply_sign_convention(f_hat: &mut DMatrix<f64>) {
    for mut col in f_hat.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Row sums of a matrix (for residuals: the per-period sum over units).
fn row_sums(m: &DMatrix<f64>) -> DVector<f64> {
    let mut s = DVector::zeros(m.nrows());
    for col in m.column_iter() {
        s += col;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NormalSource;

    fn random_panel(t: usize, n: usize, seed: u64) -> PanelData {
        let mut src = NormalSource::new(seed, 0);
        PanelData::from_matrix(DMatrix::from_fn(t, n, |_, _| src.sample())).unwrap()
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    #[test]
    fn rank_one_panel_recovers_exactly() {
        // X = f lambda' with f = (1,-1,1,-1)', lambda = (1,2)'.
        let f = DVector::from_column_slice(&[1.0, -1.0, 1.0, -1.0]);
        let lam = DVector::from_column_slice(&[1.0, 2.0]);
        let x = &f * lam.transpose();
        let panel = PanelData::from_matrix(x).unwrap();
        let est = estimate_factors(&panel, 1).unwrap();
        assert!((est.eigvals[0] - 20.0).abs() < 1e-10, "|f|^2 |lambda|^2 = 20");
        assert!(max_abs(&est.residuals) < 1e-10);
        // Normalization (1/T) F'F = I and the sign convention on f.
        assert!((est.f_hat.column(0).norm_squared() / 4.0 - 1.0).abs() < 1e-12);
        assert!(est.f_hat[(0, 0)] > 0.0);
    }

    #[test]
    fn full_rank_projection_zeroes_residuals() {
        // T <= N and r = T: the projector spans the whole column space.
        let panel = random_panel(4, 6, 11);
        let est = estimate_factors(&panel, 4).unwrap();
        assert!(max_abs(&est.residuals) < 1e-8);
    }

    #[test]
    fn orthonormality_and_eigen_identity() {
        let panel = random_panel(40, 25, 5);
        for r in [1usize, 2, 5] {
            let est = estimate_factors(&panel, r).unwrap();
            let gram_f = est.f_hat.tr_mul(&est.f_hat) / 40.0;
            for i in 0..r {
                for j in 0..r {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((gram_f[(i, j)] - want).abs() < 1e-8);
                }
            }
            // X X' Fhat = Fhat Vhat, column by column.
            let x = panel.values();
            let xxt = x * x.transpose();
            for k in 0..r {
                let lhs = &xxt * est.f_hat.column(k);
                let rhs = est.f_hat.column(k) * est.eigvals[k];
                let rel = (&lhs - &rhs).norm() / rhs.norm();
                assert!(rel < 1e-6, "eigen identity violated: rel = {rel}");
            }
            // Residuals orthogonal to the factors.
            let ftr = est.f_hat.tr_mul(&est.residuals);
            assert!(max_abs(&ftr) < 1e-6);
            // Eigenvalues descending and nonnegative.
            for k in 1..r {
                assert!(est.eigvals[k] <= est.eigvals[k - 1] + 1e-10);
            }
            assert!(est.eigvals[r - 1] > -1e-10);
        }
    }

    #[test]
    fn dual_paths_agree_on_residuals() {
        // N < T so the unit side is genuinely the cheap one.
        let panel = random_panel(30, 12, 77);
        for r in [1usize, 3, 6] {
            let a = estimate_factors_via(&panel, r, GramSide::Time).unwrap();
            let b = estimate_factors_via(&panel, r, GramSide::Unit).unwrap();
            assert!(max_abs(&(&a.residuals - &b.residuals)) < 1e-8);
            for k in 0..r {
                assert!((a.eigvals[k] - b.eigvals[k]).abs() / a.eigvals[k].max(1.0) < 1e-10);
            }
        }
    }

    #[test]
    fn auto_falls_back_on_rank_deficient_panels() {
        // Exact rank-2 panel with N < T: the unit side cannot deliver a
        // third factor, the automatic route must still produce one.
        let mut src = NormalSource::new(3, 0);
        let f = DMatrix::from_fn(50, 2, |_, _| src.sample());
        let lam = DMatrix::from_fn(20, 2, |_, _| 1.0 + src.sample());
        let x = &f * lam.transpose();
        let panel = PanelData::from_matrix(x).unwrap();
        let est = estimate_factors(&panel, 3).unwrap();
        let gram_f = est.f_hat.tr_mul(&est.f_hat) / 50.0;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram_f[(i, j)] - want).abs() < 1e-8);
            }
        }
        // Rank 2 means the 3-factor fit is exact.
        assert!(max_abs(&est.residuals) < 1e-8);
    }

    #[test]
    fn sign_flips_leave_residuals_unchanged() {
        let panel = random_panel(18, 9, 123);
        let est = estimate_factors(&panel, 3).unwrap();
        // Flip the sign of each factor column (and loading column): the
        // reconstructed residuals must be identical.
        for k in 0..3 {
            let mut f = est.f_hat.clone();
            let mut l = est.lambda_hat.clone();
            f.column_mut(k).neg_mut();
            l.column_mut(k).neg_mut();
            let resid = panel.values() - &f * l.transpose();
            assert!(max_abs(&(&resid - &est.residuals)) < 1e-10);
        }
    }

    #[test]
    fn nesting_monotone_in_factor_count() {
        let panel = random_panel(24, 10, 2024);
        let mut prev = f64::INFINITY;
        for r in 1..=8 {
            let est = estimate_factors(&panel, r).unwrap();
            let ssq: f64 = est.residuals.iter().map(|v| v * v).sum();
            assert!(
                ssq <= prev + 1e-9,
                "residual sum of squares must not grow with r: {ssq} > {prev}"
            );
            prev = ssq;
        }
    }

    #[test]
    fn colsum_matches_naive_loop() {
        let panel = random_panel(10, 7, 9);
        let est = estimate_factors(&panel, 2).unwrap();
        for t in 0..10 {
            let naive: f64 = (0..7).map(|i| est.residuals[(t, i)]).sum();
            assert_eq!(naive, est.residual_colsum[t], "cached colsum must be exact");
        }
        // Hand case from a fixed matrix.
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let s = row_sums(&m);
        assert_eq!((s[0], s[1]), (3.0, 7.0));
    }

    #[test]
    fn out_of_range_factor_count_is_rejected() {
        let panel = random_panel(6, 4, 1);
        assert!(estimate_factors(&panel, 0).is_err());
        assert!(estimate_factors(&panel, 5).is_err());
    }

    #[test]
    fn deterministic_across_calls() {
        let panel = random_panel(25, 15, 31);
        let a = estimate_factors(&panel, 4).unwrap();
        let b = estimate_factors(&panel, 4).unwrap();
        assert_eq!(a.f_hat, b.f_hat);
        assert_eq!(a.residuals, b.residuals);
    }
}
