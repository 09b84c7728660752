//! Residual-based testing for structural change in large-dimensional factor
//! models.
//!
//! The pipeline: estimate factors by principal components, aggregate the
//! residuals across units, form a kernel-weighted quadratic form of the
//! aggregate, standardize it with a HAC long-run variance, and compare
//! against simulation-based critical values. Loading instability of any
//! shape (smooth drifts, abrupt breaks) leaks into the residuals and
//! inflates the statistic; the number of extracted factors may be
//! over-specified without distorting the null distribution.
//!
//! Modules: [`panel`] (data model and CSV ingestion), [`factors`] (PCA
//! estimation), [`kernels`] (kernel functions and bandwidth rules),
//! [`breaktest`] (the statistic and the decision), [`selection`]
//! (sequential factor-number choice), [`montecarlo`] (named simulation
//! designs and the replication engine), [`diagnostics`] (CD and Ljung-Box
//! residual checks), plus [`dist`]/[`rng`] support layers and a [`cli`]
//! front end.

pub mod breaktest;
pub mod cli;
pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod factors;
pub mod kernels;
pub mod montecarlo;
pub mod panel;
pub mod rng;
pub mod selection;

pub use breaktest::{
    run_test, simulate_null_statistics, CritSource, NullSim, TestConfig, TestResult,
};
pub use diagnostics::{ljung_box, pesaran_cd, residual_diagnostics, DiagnosticsReport};
pub use error::{Error, Result};
pub use factors::{estimate_factors, estimate_factors_via, FactorEstimate, GramSide};
pub use kernels::{KernelKind, KernelSpec};
pub use montecarlo::{
    generate_panel, run_experiment, DgpFamily, DgpSpec, GridEntry, McConfig, RateTable,
};
pub use panel::{load_csv, IngestOptions, PanelData, TimeColumn};
pub use selection::{sequential_factor_number, SelectionResult};
