//! Residual diagnostics for empirical panels: Pesaran's CD statistic for
//! cross-sectional dependence and the Ljung-Box Q-test for serial
//! correlation, applied per unit.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dist::chi_squared_sf;
use crate::error::{Error, Result};

/// Summary of the residual diagnostics at one factor count.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    /// Pesaran CD statistic; approximately N(0, 1) under cross-sectional
    /// independence.
    pub cd_stat: f64,
    /// Fraction of units whose Ljung-Box test rejects at `alpha`.
    pub lbq_reject_fraction: f64,
    /// Number of autocorrelation lags in the Q statistic.
    pub lbq_lags: usize,
    pub alpha: f64,
    /// Per-unit Q statistics (NaN for units that could not be tested).
    pub per_unit_q: Vec<f64>,
    /// Units skipped by the Ljung-Box pass (constant series).
    pub lbq_skipped: usize,
}

/// Default Ljung-Box lag: `min(10, T/5)`, at least 1.
pub fn default_lbq_lag(t_obs: usize) -> usize {
    (t_obs / 5).clamp(1, 10)
}

/// Pesaran CD statistic over a T x N residual panel:
/// `sqrt(2T / (N (N-1))) * sum_{i<j} corr(col_i, col_j)`.
pub fn pesaran_cd(residuals: &DMatrix<f64>) -> Result<f64> {
    let (t, n) = (residuals.nrows(), residuals.ncols());
    if n < 2 {
        return Err(Error::Input("CD requires N >= 2 units".into()));
    }
    if t < 2 {
        return Err(Error::Input("CD requires T >= 2 periods".into()));
    }
    // Normalize each column to zero mean and unit norm; the pairwise
    // correlation sum is then (|sum_i v_i|^2 - N) / 2.
    let mut normalized = DMatrix::zeros(t, n);
    for j in 0..n {
        let col = residuals.column(j);
        let mean = col.sum() / t as f64;
        let mut v: Vec<f64> = col.iter().map(|x| x - mean).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // Relative floor: a constant column demeans to rounding noise, not
        // to exact zeros.
        let scale = col.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if norm <= 1e-12 * scale * (t as f64).sqrt() {
            return Err(Error::Input(format!(
                "unit {j} has a constant residual series"
            )));
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        for r in 0..t {
            normalized[(r, j)] = v[r];
        }
    }
    let mut rowsum = vec![0.0f64; t];
    for j in 0..n {
        for r in 0..t {
            rowsum[r] += normalized[(r, j)];
        }
    }
    let total: f64 = rowsum.iter().map(|x| x * x).sum();
    let corr_sum = (total - n as f64) / 2.0;
    let nn = n as f64;
    Ok((2.0 * t as f64 / (nn * (nn - 1.0))).sqrt() * corr_sum)
}

/// Q statistic from precomputed autocorrelations:
/// `T (T + 2) sum_k acf_k^2 / (T - k)`.
fn ljung_box_from_acf(acf: &[f64], t_obs: usize) -> f64 {
    let t = t_obs as f64;
    t * (t + 2.0)
        * acf
            .iter()
            .enumerate()
            .map(|(idx, &rho)| rho * rho / (t - (idx + 1) as f64))
            .sum::<f64>()
}

/// Demeaned sample autocorrelations at lags `1..=m` with the biased
/// (divide-by-T) convention.
fn sample_acf(series: &[f64], m: usize) -> Result<Vec<f64>> {
    let t = series.len();
    let mean = series.iter().sum::<f64>() / t as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let denom: f64 = centered.iter().map(|x| x * x).sum();
    let scale = series.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if denom <= (1e-12 * scale).powi(2) * t as f64 {
        return Err(Error::Input("constant series has no autocorrelation".into()));
    }
    Ok((1..=m)
        .map(|k| centered[..t - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect())
}

/// Ljung-Box Q-test at `m` lags: returns the statistic and its upper-tail
/// chi-squared(m) p-value.
pub fn ljung_box(series: &[f64], m: usize) -> Result<(f64, f64)> {
    let t = series.len();
    if m < 1 || m >= t {
        return Err(Error::Config(format!(
            "Ljung-Box lag {m} out of range 1..{t}"
        )));
    }
    let acf = sample_acf(series, m)?;
    let q = ljung_box_from_acf(&acf, t);
    Ok((q, chi_squared_sf(q, m)))
}

/// Fraction of residual columns whose Ljung-Box test rejects at `alpha`.
/// Constant columns are skipped and counted, not dropped silently.
pub fn lbq_rejection_fraction(
    residuals: &DMatrix<f64>,
    m: usize,
    alpha: f64,
) -> Result<(f64, Vec<f64>, usize)> {
    let n = residuals.ncols();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut rejected = 0usize;
    let mut skipped = 0usize;
    let mut qs = Vec::with_capacity(n);
    for j in 0..n {
        let col: Vec<f64> = residuals.column(j).iter().copied().collect();
        match ljung_box(&col, m) {
            Ok((q, p)) => {
                qs.push(q);
                if p < alpha {
                    rejected += 1;
                }
            }
            Err(Error::Input(_)) => {
                qs.push(f64::NAN);
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    let tested = n - skipped;
    if tested == 0 {
        return Err(Error::Input("no testable residual series".into()));
    }
    Ok((rejected as f64 / tested as f64, qs, skipped))
}

/// Run both diagnostics on a residual panel.
pub fn residual_diagnostics(
    residuals: &DMatrix<f64>,
    lbq_lags: usize,
    alpha: f64,
) -> Result<DiagnosticsReport> {
    let cd_stat = pesaran_cd(residuals)?;
    let (lbq_reject_fraction, per_unit_q, lbq_skipped) =
        lbq_rejection_fraction(residuals, lbq_lags, alpha)?;
    Ok(DiagnosticsReport {
        cd_stat,
        lbq_reject_fraction,
        lbq_lags,
        alpha,
        per_unit_q,
        lbq_skipped,
    })
}
