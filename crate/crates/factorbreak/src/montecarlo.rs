//! Data-generating designs and the replication engine for the size/power
//! study.
//!
//! Twelve families share one backbone: two factors following
//! `f_t = drift + 0.3 f_{t-1} + N(0, I_2)` (drift 0.5), loadings drawn
//! entrywise from N(1, 1), and errors that are iid or AR(0.2) over time
//! with iid or first-order-Toeplitz (`rho = 0.3`) innovations across units.
//! The families differ in the loading path:
//!
//! * `S1..S3` - constant loadings (size designs);
//! * `L1..L3` - a smooth logistic departure on the first loading
//!   coordinate, scaled by `10 * a_TN` with
//!   `a_TN = (T N)^{-1/2} h^{-1/4}` (local alternatives);
//! * `L4..L6` - an abrupt mid-sample shift of `a_TN * (2, 2)` (local
//!   abrupt alternatives);
//! * `G1..G3` - an abrupt mid-sample shift of `(0.25, 0.25)` (global
//!   alternatives).
//!
//! Error designs pair up as 1 <-> cross-sectional dependence only,
//! 2 <-> serial correlation only, 3 <-> both; `L4..L6` reuse the designs of
//! `L1..L3` in order.
//!
//! The engine derives one seed per replication from the base seed, so
//! replications are independent work units and the resulting table is
//! identical for any thread count.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::breaktest::{run_test, TestConfig};
use crate::error::{Error, Result};
use crate::kernels::rule_of_thumb_h;
use crate::panel::PanelData;
use crate::rng::{derive_seed, NormalSource};
use crate::selection::sequential_factor_number;

/// The twelve simulation designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DgpFamily {
    S1,
    S2,
    S3,
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    G1,
    G2,
    G3,
}

impl DgpFamily {
    pub const ALL: [DgpFamily; 12] = [
        DgpFamily::S1,
        DgpFamily::S2,
        DgpFamily::S3,
        DgpFamily::L1,
        DgpFamily::L2,
        DgpFamily::L3,
        DgpFamily::L4,
        DgpFamily::L5,
        DgpFamily::L6,
        DgpFamily::G1,
        DgpFamily::G2,
        DgpFamily::G3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DgpFamily::S1 => "S1",
            DgpFamily::S2 => "S2",
            DgpFamily::S3 => "S3",
            DgpFamily::L1 => "L1",
            DgpFamily::L2 => "L2",
            DgpFamily::L3 => "L3",
            DgpFamily::L4 => "L4",
            DgpFamily::L5 => "L5",
            DgpFamily::L6 => "L6",
            DgpFamily::G1 => "G1",
            DgpFamily::G2 => "G2",
            DgpFamily::G3 => "G3",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown DGP family '{s}'")))
    }

    /// AR(1) coefficient of the error process (0 = iid over time).
    pub fn ar_error(self) -> f64 {
        match self {
            DgpFamily::S1 | DgpFamily::L1 | DgpFamily::L4 | DgpFamily::G1 => 0.0,
            _ => 0.2,
        }
    }

    /// Toeplitz decay of the error innovation covariance (0 = iid across
    /// units).
    pub fn toeplitz_rho(self) -> f64 {
        match self {
            DgpFamily::S2 | DgpFamily::L2 | DgpFamily::L5 | DgpFamily::G2 => 0.0,
            _ => 0.3,
        }
    }

    fn loading_path(self) -> LoadingPath {
        match self {
            DgpFamily::S1 | DgpFamily::S2 | DgpFamily::S3 => LoadingPath::Constant,
            DgpFamily::L1 | DgpFamily::L2 | DgpFamily::L3 => LoadingPath::SmoothLogistic,
            DgpFamily::L4 | DgpFamily::L5 | DgpFamily::L6 => LoadingPath::AbruptScaled,
            DgpFamily::G1 | DgpFamily::G2 | DgpFamily::G3 => LoadingPath::AbruptFixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LoadingPath {
    Constant,
    /// `10 * a_TN * [G(10 t/T; 0.1, (1,3,7,9)), 0]` on the first coordinate.
    SmoothLogistic,
    /// `a_TN * (2, 2)` for `t > T/2`.
    AbruptScaled,
    /// `(0.25, 0.25)` for `t > T/2`.
    AbruptFixed,
}

/// Logistic path constants for the smooth designs.
const LOGISTIC_SCALE: f64 = 0.1;
const LOGISTIC_LOCATIONS: [f64; 4] = [1.0, 3.0, 7.0, 9.0];
const LOGISTIC_MULTIPLIER: f64 = 10.0;
const SCALED_BREAK: [f64; 2] = [2.0, 2.0];
const FIXED_BREAK: [f64; 2] = [0.25, 0.25];

/// One fully parameterized design.
#[derive(Debug, Clone)]
pub struct DgpSpec {
    pub family: DgpFamily,
    pub t_obs: usize,
    pub n_units: usize,
    /// Number of factors (the designs use 2).
    pub n_factors: usize,
    /// Factor AR(1) coefficient.
    pub factor_ar: f64,
    /// Factor drift; the stationary mean is `drift / (1 - ar)`. Zero gives
    /// the zero-mean-factor variant of the designs.
    pub factor_drift: f64,
    pub ar_error: f64,
    pub toeplitz_rho: f64,
    /// Presample periods discarded from both AR recursions.
    pub burn_in: usize,
}

impl DgpSpec {
    pub fn new(family: DgpFamily, t_obs: usize, n_units: usize) -> Result<Self> {
        if t_obs < 2 || n_units < 1 {
            return Err(Error::Config(format!(
                "design needs T >= 2 and N >= 1, got {t_obs} x {n_units}"
            )));
        }
        Ok(Self {
            family,
            t_obs,
            n_units,
            n_factors: 2,
            factor_ar: 0.3,
            factor_drift: 0.5,
            ar_error: family.ar_error(),
            toeplitz_rho: family.toeplitz_rho(),
            burn_in: 200,
        })
    }

    pub fn with_factor_drift(mut self, drift: f64) -> Self {
        self.factor_drift = drift;
        self
    }

    /// Departure of the period-`t_idx` loading (0-based) from the baseline,
    /// per factor coordinate; identical across units.
    pub fn loading_departure(&self, t_idx: usize) -> [f64; 2] {
        let t = self.t_obs;
        let post_break = t_idx + 1 > t / 2;
        match self.family.loading_path() {
            LoadingPath::Constant => [0.0, 0.0],
            LoadingPath::SmoothLogistic => {
                let a = local_departure_rate(t, self.n_units, rule_of_thumb_h(t, self.n_units));
                let y = 10.0 * (t_idx + 1) as f64 / t as f64;
                let g = logistic_g(y, LOGISTIC_SCALE, &LOGISTIC_LOCATIONS);
                [LOGISTIC_MULTIPLIER * a * g, 0.0]
            }
            LoadingPath::AbruptScaled => {
                if post_break {
                    let a =
                        local_departure_rate(t, self.n_units, rule_of_thumb_h(t, self.n_units));
                    [a * SCALED_BREAK[0], a * SCALED_BREAK[1]]
                } else {
                    [0.0, 0.0]
                }
            }
            LoadingPath::AbruptFixed => {
                if post_break {
                    FIXED_BREAK
                } else {
                    [0.0, 0.0]
                }
            }
        }
    }
}

/// Departure rate of the local alternatives: `(T N)^{-1/2} h^{-1/4}`.
pub fn local_departure_rate(t_obs: usize, n_units: usize, h: f64) -> f64 {
    ((t_obs * n_units) as f64).powf(-0.5) * h.powf(-0.25)
}

/// Multi-location logistic transition
/// `[1 + exp(-scale * prod_l (y - loc_l))]^{-1}`.
pub fn logistic_g(y: f64, scale: f64, locations: &[f64]) -> f64 {
    let prod: f64 = locations.iter().map(|&b| y - b).product();
    1.0 / (1.0 + (-scale * prod).exp())
}

/// Baseline loadings, entrywise N(1, 1), drawn unit-major.
fn draw_loadings(n: usize, r: usize, src: &mut NormalSource) -> DMatrix<f64> {
    let mut lam0 = DMatrix::zeros(n, r);
    for i in 0..n {
        for k in 0..r {
            lam0[(i, k)] = 1.0 + src.sample();
        }
    }
    lam0
}

/// Factor AR(1) with drift, initialized at the stationary mean, burn-in
/// discarded.
fn simulate_factors(spec: &DgpSpec, src: &mut NormalSource) -> DMatrix<f64> {
    let (t, r) = (spec.t_obs, spec.n_factors);
    let mut factors = DMatrix::zeros(t, r);
    let init = if spec.factor_ar.abs() < 1.0 {
        spec.factor_drift / (1.0 - spec.factor_ar)
    } else {
        0.0
    };
    let mut state = vec![init; r];
    for _ in 0..spec.burn_in {
        for s in state.iter_mut() {
            *s = spec.factor_drift + spec.factor_ar * *s + src.sample();
        }
    }
    for row in 0..t {
        for (k, s) in state.iter_mut().enumerate() {
            *s = spec.factor_drift + spec.factor_ar * *s + src.sample();
            factors[(row, k)] = *s;
        }
    }
    factors
}

/// Error panel: Toeplitz innovation covariance via its Cholesky factor
/// (computed once), AR(1) recursion over time when required, burn-in
/// discarded, innovations drawn unit-major within each period.
fn simulate_errors(spec: &DgpSpec, src: &mut NormalSource) -> Result<DMatrix<f64>> {
    let (t, n) = (spec.t_obs, spec.n_units);
    let chol: Option<Cholesky<f64, nalgebra::Dyn>> = if spec.toeplitz_rho != 0.0 {
        let rho = spec.toeplitz_rho;
        let sigma = DMatrix::from_fn(n, n, |i, j| rho.powi((i as i32 - j as i32).abs()));
        Some(Cholesky::new(sigma).ok_or_else(|| {
            Error::Numeric("error covariance is not positive definite".into())
        })?)
    } else {
        None
    };
    let mut errors = DMatrix::zeros(t, n);
    let mut state = DVector::zeros(n);
    let mut z = DVector::zeros(n);
    let burn = if spec.ar_error != 0.0 { spec.burn_in } else { 0 };
    for row in 0..t + burn {
        for i in 0..n {
            z[i] = src.sample();
        }
        let innov = match &chol {
            Some(c) => c.l() * &z,
            None => z.clone(),
        };
        if spec.ar_error != 0.0 {
            state = state * spec.ar_error + innov;
        } else {
            state = innov;
        }
        if row >= burn {
            errors.row_mut(row - burn).copy_from(&state.transpose());
        }
    }
    Ok(errors)
}

/// Simulate one panel from a design. Draw order: loadings, factors
/// (burn-in then sample), errors (burn-in then sample).
pub fn generate_panel(spec: &DgpSpec, seed: u64) -> Result<PanelData> {
    let (t, n, r) = (spec.t_obs, spec.n_units, spec.n_factors);
    let mut src = NormalSource::new(seed, 0);
    let lam0 = draw_loadings(n, r, &mut src);
    let factors = simulate_factors(spec, &mut src);
    let errors = simulate_errors(spec, &mut src)?;

    // x_t = Lambda_t f_t + eps_t with Lambda_t = Lambda_0 + 1_N d_t'.
    let mut x = errors;
    for row in 0..t {
        let dep = spec.loading_departure(row);
        let mut common = 0.0;
        for k in 0..r.min(2) {
            common += dep[k] * factors[(row, k)];
        }
        for i in 0..n {
            let mut v = common;
            for k in 0..r {
                v += lam0[(i, k)] * factors[(row, k)];
            }
            x[(row, i)] += v;
        }
    }
    PanelData::from_matrix(x)
}

/// One entry of the factor-count grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridEntry {
    /// Test with a fixed factor count.
    Fixed(usize),
    /// Select the count sequentially, then test at the selected count with
    /// a fresh seed.
    Auto,
}

impl GridEntry {
    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(GridEntry::Auto)
        } else {
            s.parse::<usize>()
                .ok()
                .filter(|&r| r >= 1)
                .map(GridEntry::Fixed)
                .ok_or_else(|| Error::Config(format!("bad grid entry '{s}'")))
        }
    }

    pub fn label(&self) -> String {
        match self {
            GridEntry::Fixed(r) => r.to_string(),
            GridEntry::Auto => "auto".into(),
        }
    }
}

/// Configuration of one experiment (one design, one grid).
#[derive(Debug, Clone)]
pub struct McConfig {
    pub dgp: DgpSpec,
    pub replications: usize,
    /// Template test configuration; `r_tilde` and `seed` are overridden per
    /// grid entry and replication.
    pub test_cfg: TestConfig,
    pub r_tilde_grid: Vec<GridEntry>,
    /// Search bound for `Auto` entries.
    pub r_max: usize,
    pub base_seed: u64,
}

impl McConfig {
    pub fn new(dgp: DgpSpec, replications: usize, grid: Vec<GridEntry>, base_seed: u64) -> Self {
        Self {
            dgp,
            replications,
            test_cfg: TestConfig::default(),
            r_tilde_grid: grid,
            r_max: 8,
            base_seed,
        }
    }
}

/// Rejection-rate table row.
#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub family: String,
    pub t_obs: usize,
    pub n_units: usize,
    pub r_label: String,
    pub rate: f64,
    pub replications: usize,
    pub failures: usize,
}

/// Rejection-rate table (one row per grid entry).
#[derive(Debug, Clone, Serialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    /// CSV rendering with a fixed header and six-decimal rates; output is
    /// byte-stable for identical configurations.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("family,T,N,r_tilde,rate,replications,failures\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{},{}\n",
                r.family, r.t_obs, r.n_units, r.r_label, r.rate, r.replications, r.failures
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
    }
}

/// Seed tags for the per-replication work units.
const TAG_AUTO_SELECT: u64 = 1 << 32;
const TAG_AUTO_CONFIRM: u64 = (1 << 32) + 1;

/// Run one experiment: for every replication generate a panel and apply the
/// test at every grid entry; aggregate rejection frequencies. Failures are
/// counted per grid entry and excluded from the rate denominator.
pub fn run_experiment(cfg: &McConfig) -> Result<RateTable> {
    if cfg.replications < 1 {
        return Err(Error::Config("need at least one replication".into()));
    }
    if cfg.r_tilde_grid.is_empty() {
        return Err(Error::Config("empty factor-count grid".into()));
    }
    cfg.test_cfg.validate()?;

    let outcomes: Vec<Vec<Option<bool>>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(cfg.base_seed, rep as u64);
            let panel = match generate_panel(&cfg.dgp, rep_seed) {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("replication {rep}: panel generation failed: {e}");
                    return vec![None; cfg.r_tilde_grid.len()];
                }
            };
            cfg.r_tilde_grid
                .iter()
                .map(|entry| run_grid_entry(&panel, cfg, *entry, rep, rep_seed))
                .collect()
        })
        .collect();

    let rows = cfg
        .r_tilde_grid
        .iter()
        .enumerate()
        .map(|(gi, entry)| {
            let mut rejects = 0usize;
            let mut failures = 0usize;
            for rep_out in &outcomes {
                match rep_out[gi] {
                    Some(true) => rejects += 1,
                    Some(false) => {}
                    None => failures += 1,
                }
            }
            let done = cfg.replications - failures;
            RateRow {
                family: cfg.dgp.family.name().into(),
                t_obs: cfg.dgp.t_obs,
                n_units: cfg.dgp.n_units,
                r_label: entry.label(),
                rate: if done > 0 { rejects as f64 / done as f64 } else { f64::NAN },
                replications: cfg.replications,
                failures,
            }
        })
        .collect();
    Ok(RateTable { rows })
}

fn run_grid_entry(
    panel: &PanelData,
    cfg: &McConfig,
    entry: GridEntry,
    rep: usize,
    rep_seed: u64,
) -> Option<bool> {
    match entry {
        GridEntry::Fixed(r_tilde) => {
            let tc = TestConfig {
                r_tilde,
                seed: derive_seed(rep_seed, r_tilde as u64),
                ..cfg.test_cfg.clone()
            };
            match run_test(panel, &tc) {
                Ok(res) => Some(res.reject),
                Err(e) => {
                    log::warn!("replication {rep}, r={r_tilde}: {e}");
                    None
                }
            }
        }
        GridEntry::Auto => {
            let sel_cfg = TestConfig {
                seed: derive_seed(rep_seed, TAG_AUTO_SELECT),
                ..cfg.test_cfg.clone()
            };
            let r_max = cfg.r_max.min(panel.t_obs().min(panel.n_units()));
            match sequential_factor_number(panel, r_max, &sel_cfg) {
                // Every count up to r_max rejects: instability detected.
                Ok(sel) if sel.r_hat.is_none() => Some(true),
                Ok(sel) => {
                    let tc = TestConfig {
                        r_tilde: sel.r_hat.unwrap(),
                        seed: derive_seed(rep_seed, TAG_AUTO_CONFIRM),
                        ..cfg.test_cfg.clone()
                    };
                    match run_test(panel, &tc) {
                        Ok(res) => Some(res.reject),
                        Err(e) => {
                            log::warn!("replication {rep}, auto confirm: {e}");
                            None
                        }
                    }
                }
                Err(e) => {
                    log::warn!("replication {rep}, auto selection: {e}");
                    None
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn departure_rate_fixtures() {
        let h = rule_of_thumb_h(100, 100);
        assert!((local_departure_rate(100, 100, h) - 0.015_848_931_924_611_138).abs() < 1e-15);
        assert!((local_departure_rate(100, 100, 1.0) - 0.01).abs() < 1e-15);
        assert!((local_departure_rate(1, 1, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn logistic_fixtures() {
        // At any location the product vanishes, so the value is 1/2.
        for &b in &LOGISTIC_LOCATIONS {
            assert!((logistic_g(b, LOGISTIC_SCALE, &LOGISTIC_LOCATIONS) - 0.5).abs() < 1e-15);
        }
        assert!((logistic_g(4.2, 0.0, &LOGISTIC_LOCATIONS) - 0.5).abs() < 1e-15);
        // y = 10: product = 9*7*3*1 = 189.
        let v = logistic_g(10.0, 0.1, &LOGISTIC_LOCATIONS);
        assert!((v - 1.0 / (1.0 + (-18.9f64).exp())).abs() < 1e-15);
        assert!(v > 0.999_999_99);
        let w = logistic_g(2.0, 0.1, &LOGISTIC_LOCATIONS);
        assert!(w > 0.0 && w < 1.0);
    }

    #[test]
    fn family_error_designs() {
        use DgpFamily::*;
        for (fam, ar, rho) in [
            (S1, 0.0, 0.3),
            (S2, 0.2, 0.0),
            (S3, 0.2, 0.3),
            (L1, 0.0, 0.3),
            (L2, 0.2, 0.0),
            (L3, 0.2, 0.3),
            (L4, 0.0, 0.3),
            (L5, 0.2, 0.0),
            (L6, 0.2, 0.3),
            (G1, 0.0, 0.3),
            (G2, 0.2, 0.0),
            (G3, 0.2, 0.3),
        ] {
            assert_eq!(fam.ar_error(), ar, "{fam:?}");
            assert_eq!(fam.toeplitz_rho(), rho, "{fam:?}");
        }
        assert_eq!(DgpFamily::parse("g2").unwrap(), G2);
        assert!(DgpFamily::parse("Q7").is_err());
    }

    #[test]
    fn factor_process_matches_stationary_mean() {
        // AR(1) with drift 0.5 and coefficient 0.3 has mean 5/7.
        let spec = DgpSpec::new(DgpFamily::S2, 10_000, 2).unwrap();
        let mut src = NormalSource::new(42, 0);
        let f = simulate_factors(&spec, &mut src);
        for k in 0..2 {
            let m = f.column(k).sum() / 10_000.0;
            assert!((m - 5.0 / 7.0).abs() < 0.05, "factor {k} mean {m}");
        }
    }

    #[test]
    fn error_covariance_matches_toeplitz_design() {
        // S1: iid over time, covariance 0.3^{|i-j|} across units.
        let spec = DgpSpec::new(DgpFamily::S1, 10_000, 5).unwrap();
        let mut src = NormalSource::new(9, 0);
        let e = simulate_errors(&spec, &mut src).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let cov = e.column(i).dot(&e.column(j)) / 10_000.0;
                let want = 0.3f64.powi((i as i32 - j as i32).abs());
                assert!(
                    (cov - want).abs() < 0.05,
                    "cov[{i},{j}] = {cov} vs {want}"
                );
            }
        }
    }

    #[test]
    fn ar_errors_have_matching_serial_correlation() {
        // S2: AR(0.2) over time, iid across units.
        let spec = DgpSpec::new(DgpFamily::S2, 10_000, 3).unwrap();
        let mut src = NormalSource::new(5, 0);
        let e = simulate_errors(&spec, &mut src).unwrap();
        for j in 0..3 {
            let col = e.column(j);
            let var = col.dot(&col) / 10_000.0;
            let lag1 = (0..9_999).map(|t| col[t] * col[t + 1]).sum::<f64>() / 9_999.0;
            assert!(
                (lag1 / var - 0.2).abs() < 0.05,
                "lag-1 autocorrelation {} in column {j}",
                lag1 / var
            );
        }
    }

    #[test]
    fn abrupt_departure_means_are_exact() {
        let spec = DgpSpec::new(DgpFamily::G3, 100, 4).unwrap();
        let mean: f64 =
            (0..100).map(|t| spec.loading_departure(t)[0]).sum::<f64>() / 100.0;
        // Break of 0.25 over exactly half the sample.
        assert!((mean - 0.25 * 0.5).abs() < 1e-15);
        let spec = DgpSpec::new(DgpFamily::G1, 101, 4).unwrap();
        let frac = (0..101).filter(|&t| spec.loading_departure(t)[1] > 0.0).count();
        assert_eq!(frac, 51, "break covers t > floor(T/2)");
    }

    #[test]
    fn smooth_departure_structure_and_vanishing() {
        let small = DgpSpec::new(DgpFamily::L1, 50, 50).unwrap();
        let large = DgpSpec::new(DgpFamily::L1, 400, 400).unwrap();
        let max_dep = |s: &DgpSpec| {
            (0..s.t_obs)
                .map(|t| {
                    let d = s.loading_departure(t);
                    assert_eq!(d[1], 0.0, "smooth departure hits only the first coordinate");
                    d[0].abs()
                })
                .fold(0.0f64, f64::max)
        };
        let (ms, ml) = (max_dep(&small), max_dep(&large));
        assert!(ml < ms, "departure must vanish as sizes grow: {ml} vs {ms}");
        // L4: scaled break on both coordinates.
        let l4 = DgpSpec::new(DgpFamily::L4, 60, 30).unwrap();
        let a = local_departure_rate(60, 30, rule_of_thumb_h(60, 30));
        let d = l4.loading_departure(59);
        assert!((d[0] - 2.0 * a).abs() < 1e-15);
        assert!((d[1] - 2.0 * a).abs() < 1e-15);
    }

    #[test]
    fn panels_are_seed_deterministic() {
        let spec = DgpSpec::new(DgpFamily::S3, 30, 8).unwrap();
        let a = generate_panel(&spec, 7).unwrap();
        let b = generate_panel(&spec, 7).unwrap();
        let c = generate_panel(&spec, 8).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn single_replication_rate_is_binary() {
        let spec = DgpSpec::new(DgpFamily::S1, 30, 10).unwrap();
        let mut cfg = McConfig::new(spec, 1, vec![GridEntry::Fixed(2)], 3);
        cfg.test_cfg.b_reps = 19;
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert!(table.rows[0].rate == 0.0 || table.rows[0].rate == 1.0);
        assert_eq!(table.rows[0].failures, 0);
    }

    #[test]
    fn experiment_is_thread_count_invariant() {
        let spec = DgpSpec::new(DgpFamily::G1, 24, 12).unwrap();
        let mut cfg = McConfig::new(
            spec,
            6,
            vec![GridEntry::Fixed(1), GridEntry::Fixed(2), GridEntry::Auto],
            11,
        );
        cfg.test_cfg.b_reps = 19;
        cfg.r_max = 3;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let eight = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = one.install(|| run_experiment(&cfg)).unwrap().to_csv_string();
        let b = eight.install(|| run_experiment(&cfg)).unwrap().to_csv_string();
        assert_eq!(a, b);
        let c = run_experiment(&cfg).unwrap().to_csv_string();
        assert_eq!(a, c);
    }

    #[test]
    fn grid_entry_parsing() {
        assert_eq!(GridEntry::parse("3").unwrap(), GridEntry::Fixed(3));
        assert_eq!(GridEntry::parse("AUTO").unwrap(), GridEntry::Auto);
        assert!(GridEntry::parse("0").is_err());
        assert!(GridEntry::parse("x").is_err());
    }
}
