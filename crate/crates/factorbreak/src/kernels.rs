//! Kernel functions, kernel constants, and bandwidth rules.
//!
//! Two kernels appear in the test: a smoothing kernel `K` applied to time
//! distances scaled by `T*h`, and a HAC taper `a` applied to autocovariance
//! lags scaled by `l`. Both default to Bartlett, with the plug-in rules
//! `h = (T*N)^{-1/5}` and `l = ceil(0.75 * T^{1/3})`.

use crate::error::{Error, Result};

/// Kernel family. Only Bartlett is shipped; the enum exists so that
/// additional compact-support kernels can be added without touching callers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// Triangular kernel `max(0, 1 - |u|)`.
    Bartlett,
}

impl KernelKind {
    /// Evaluate the kernel at `u`.
    pub fn eval(self, u: f64) -> f64 {
        match self {
            KernelKind::Bartlett => bartlett(u),
        }
    }

    /// The constant `nu0 = integral of K(u)^2 over [-1, 1]`, in closed form.
    pub fn nu0(self) -> f64 {
        match self {
            // 2 * int_0^1 (1-u)^2 du = 2/3.
            KernelKind::Bartlett => 2.0 / 3.0,
        }
    }
}

/// Bartlett (triangular) kernel: `max(0, 1 - |u|)`. Symmetric, supported on
/// [-1, 1], `K(0) = 1`, Lipschitz with constant 1.
pub fn bartlett(u: f64) -> f64 {
    (1.0 - u.abs()).max(0.0)
}

/// Rule-of-thumb smoothing bandwidth `h = (T*N)^{-1/5}`.
pub fn rule_of_thumb_h(t_obs: usize, n_units: usize) -> f64 {
    ((t_obs * n_units) as f64).powf(-0.2)
}

/// HAC truncation lag `l = ceil(0.75 * T^{1/3})`.
pub fn hac_lag(t_obs: usize) -> usize {
    (0.75 * (t_obs as f64).cbrt()).ceil() as usize
}

/// Smoothing and HAC kernel configuration for one test run.
///
/// Fields are public so that callers with special needs (unit fixtures,
/// sensitivity studies) can build a spec directly; [`KernelSpec::new`] and
/// [`KernelSpec::rule_of_thumb`] are the validating constructors.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    /// Smoothing kernel for the quadratic-form statistic.
    pub kind: KernelKind,
    /// Smoothing bandwidth, a fraction of the sample span; must be in (0, 1).
    pub h: f64,
    /// `integral K^2` for `kind`; kept on the spec so the standardization
    /// uses exactly the constant the spec was built with.
    pub nu0: f64,
    /// HAC taper kernel.
    pub hac_kind: KernelKind,
    /// HAC truncation lag, at least 1.
    pub hac_lag: usize,
}

impl KernelSpec {
    /// Build a validated spec: requires `0 < h < 1` and `hac_lag >= 1`.
    pub fn new(kind: KernelKind, h: f64, hac_kind: KernelKind, hac_lag: usize) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::Config(format!(
                "bandwidth h must lie in (0, 1), got {h}"
            )));
        }
        if hac_lag < 1 {
            return Err(Error::Config("HAC lag must be >= 1".into()));
        }
        Ok(Self { kind, h, nu0: kind.nu0(), hac_kind, hac_lag })
    }

    /// Bartlett kernels with the plug-in bandwidths for a T x N panel.
    pub fn rule_of_thumb(t_obs: usize, n_units: usize) -> Result<Self> {
        Self::new(
            KernelKind::Bartlett,
            rule_of_thumb_h(t_obs, n_units),
            KernelKind::Bartlett,
            hac_lag(t_obs),
        )
    }
}
