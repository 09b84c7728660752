//! Sequential factor-number selection.
//!
//! The stability test is applied with j = 1, 2, ... factors; the selected
//! count is the first j at which the test fails to reject. Each j is a
//! separate composite test and draws its simulated critical value from its
//! own seed, derived from `(seed, j)`; no multiplicity adjustment is
//! applied. When a j-factor model reproduces the panel to machine precision
//! the long-run variance degenerates and no statistic exists; a perfect fit
//! carries no evidence of instability, so the procedure stops there and
//! reports that j (flagged via `exact_fit_stop`).
//!
//! With abrupt breaks in the loadings the selected count estimates the rank
//! of the equivalent constant-loading representation, which exceeds the
//! underlying factor count.

use crate::breaktest::{run_test, TestConfig, TestResult};
use crate::error::{Error, Result};
use crate::panel::PanelData;
use crate::rng::derive_seed;

/// Outcome of the sequential procedure.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// First factor count at which the test fails to reject, or `None` when
    /// every count up to `r_max` rejects.
    pub r_hat: Option<usize>,
    /// Completed per-count test results, in order. Counts before `r_hat`
    /// reject; the entry at `r_hat` (when present) does not. On an
    /// exact-fit stop there is no test result for the final count.
    pub per_j: Vec<(usize, TestResult)>,
    pub alpha: f64,
    /// The stop was triggered by a numerically exact factor fit rather than
    /// a completed test.
    pub exact_fit_stop: bool,
}

/// Run the test for j = 1..=r_max factors, stopping at the first
/// fail-to-reject. `cfg.r_tilde` is ignored; `cfg.seed` is the parent seed
/// for the per-j streams.
pub fn sequential_factor_number(
    panel: &PanelData,
    r_max: usize,
    cfg: &TestConfig,
) -> Result<SelectionResult> {
    let limit = panel.t_obs().min(panel.n_units());
    if r_max < 1 || r_max > limit {
        return Err(Error::Config(format!(
            "r_max {r_max} out of range 1..={limit}"
        )));
    }
    let mut per_j = Vec::new();
    for j in 1..=r_max {
        let cfg_j = TestConfig {
            r_tilde: j,
            seed: derive_seed(cfg.seed, j as u64),
            ..cfg.clone()
        };
        match run_test(panel, &cfg_j) {
            Ok(res) => {
                let rejected = res.reject;
                per_j.push((j, res));
                if !rejected {
                    return Ok(SelectionResult {
                        r_hat: Some(j),
                        per_j,
                        alpha: cfg.alpha,
                        exact_fit_stop: false,
                    });
                }
            }
            Err(Error::DegenerateVariance(_)) => {
                return Ok(SelectionResult {
                    r_hat: Some(j),
                    per_j,
                    alpha: cfg.alpha,
                    exact_fit_stop: true,
                });
            }
            Err(e) => return Err(e.with_stage(&format!("selection at j = {j}"))),
        }
    }
    Ok(SelectionResult { r_hat: None, per_j, alpha: cfg.alpha, exact_fit_stop: false })
}
