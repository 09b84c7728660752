//! Command-line front end: `test`, `simulate`, `select-factors`, and
//! `diagnose` subcommands over the library pipeline.
//!
//! Every run prints its effective configuration (including the derived
//! bandwidth, HAC lag, and seed) so results are reproducible from the
//! output alone. Exit codes: 0 success, 2 input error, 3 numeric error,
//! 4 configuration/usage error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::breaktest::{run_test, CritSource, NullSim, TestConfig, TestResult};
use crate::error::{Error, Result};
use crate::kernels::{hac_lag, rule_of_thumb_h, KernelKind, KernelSpec};
use crate::montecarlo::{run_experiment, DgpFamily, DgpSpec, GridEntry, McConfig};
use crate::panel::{load_csv, IngestOptions, PanelData, TimeColumn};
use crate::selection::sequential_factor_number;

/// Fallback seed source when `--seed` is not given.
pub const SEED_ENV_VAR: &str = "FACTORBREAK_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "factorbreak",
    version,
    about = "Residual-based structural change testing for large factor models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Cap the worker thread count (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a CSV panel for structural change in the factor loadings.
    Test(TestArgs),
    /// Reproduce rejection-rate tables over the built-in designs.
    Simulate(SimulateArgs),
    /// Select the number of factors by sequential testing.
    SelectFactors(SelectArgs),
    /// Residual diagnostics (CD statistic, Ljung-Box fractions) per factor
    /// count.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NullSimArg {
    /// Synthetic panels with drifted AR factors and N(1,1) loadings.
    DriftedFactor,
    /// Synthetic panels with iid standard normal factors and loadings.
    IidFactor,
    /// Pure-noise panels.
    PureNoise,
}

impl From<NullSimArg> for NullSim {
    fn from(v: NullSimArg) -> Self {
        match v {
            NullSimArg::DriftedFactor => NullSim::DriftedFactor,
            NullSimArg::IidFactor => NullSim::IidFactor,
            NullSimArg::PureNoise => NullSim::PureNoise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CritArg {
    Simulated,
    Asymptotic,
}

impl From<CritArg> for CritSource {
    fn from(v: CritArg) -> Self {
        match v {
            CritArg::Simulated => CritSource::Simulated,
            CritArg::Asymptotic => CritSource::Asymptotic,
        }
    }
}

/// Flags shared by the test-like subcommands.
#[derive(Debug, Args)]
pub struct CommonTestArgs {
    /// Simulation replications for the critical value.
    #[arg(long, default_value_t = 1000)]
    pub b: usize,
    /// Nominal level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// RNG seed (falls back to FACTORBREAK_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Smoothing bandwidth override (default: (T*N)^(-1/5)).
    #[arg(long)]
    pub h_override: Option<f64>,
    /// HAC lag override (default: ceil(0.75*T^(1/3))).
    #[arg(long)]
    pub l_override: Option<usize>,
    /// Null-panel recipe for the simulated critical values.
    #[arg(long, value_enum, default_value_t = NullSimArg::DriftedFactor)]
    pub null_sim: NullSimArg,
    /// Critical value source.
    #[arg(long, value_enum, default_value_t = CritArg::Simulated)]
    pub crit: CritArg,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Input CSV panel.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of factors to extract.
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// Standardize each series to mean 0, variance 1 first.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub standardize: bool,
    #[command(flatten)]
    pub common: CommonTestArgs,
    /// Write the full result as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also dump the simulated null statistics as CSV here.
    #[arg(long)]
    pub sim_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Design family (S1..S3, L1..L6, G1..G3).
    #[arg(long)]
    pub dgp: String,
    /// Number of time periods.
    #[arg(long = "T")]
    pub t: usize,
    /// Number of cross-sectional units.
    #[arg(long = "N")]
    pub n: usize,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Factor-count grid, e.g. "2,3,4,5,auto".
    #[arg(long, default_value = "2")]
    pub grid: String,
    /// Search bound for "auto" grid entries.
    #[arg(long, default_value_t = 8)]
    pub r_max: usize,
    /// Factor drift override (0 gives zero-mean factors).
    #[arg(long)]
    pub factor_drift: Option<f64>,
    #[command(flatten)]
    pub common: CommonTestArgs,
    /// Write the rate table as CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Input CSV panel.
    #[arg(long)]
    pub input: PathBuf,
    /// Largest factor count to try.
    #[arg(long, default_value_t = 8)]
    pub r_max: usize,
    /// Standardize each series first.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub standardize: bool,
    #[command(flatten)]
    pub common: CommonTestArgs,
    /// Write the per-count table as CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Input CSV panel.
    #[arg(long)]
    pub input: PathBuf,
    /// Factor-count grid, e.g. "1..8" or "1,2,3".
    #[arg(long, default_value = "1..8")]
    pub r_grid: String,
    /// Ljung-Box lag (default: min(10, T/5)).
    #[arg(long)]
    pub lbq_lag: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Standardize each series first.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub standardize: bool,
    /// Write the diagnostics table as CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse an argument vector into a command (exposed for tests; `main` uses
/// the clap-generated parser directly).
pub fn parse<I, S>(argv: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.or_else(|| std::env::var(SEED_ENV_VAR).ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn kernel_override(
    common: &CommonTestArgs,
    t_obs: usize,
    n_units: usize,
) -> Result<Option<KernelSpec>> {
    if common.h_override.is_none() && common.l_override.is_none() {
        return Ok(None);
    }
    let h = common.h_override.unwrap_or_else(|| rule_of_thumb_h(t_obs, n_units));
    let l = common.l_override.unwrap_or_else(|| hac_lag(t_obs));
    KernelSpec::new(KernelKind::Bartlett, h, KernelKind::Bartlett, l).map(Some)
}

fn test_config(common: &CommonTestArgs, r_tilde: usize, standardize: bool) -> TestConfig {
    TestConfig {
        r_tilde,
        kernel: None,
        b_reps: common.b,
        alpha: common.alpha,
        seed: resolve_seed(common.seed),
        standardize_input: standardize,
        null_sim: common.null_sim.into(),
        crit: common.crit.into(),
    }
}

fn load_panel(path: &std::path::Path) -> Result<PanelData> {
    load_csv(path, &IngestOptions { time_column: TimeColumn::Auto, ..Default::default() })
}

fn print_config_line(label: &str, t: usize, n: usize, cfg: &TestConfig, kernel: &KernelSpec) {
    println!(
        "# {label}: T={t} N={n} r={} B={} alpha={} seed={} h={:.6} l={} null_sim={:?} crit={:?} standardize={}",
        cfg.r_tilde,
        cfg.b_reps,
        cfg.alpha,
        cfg.seed,
        kernel.h,
        kernel.hac_lag,
        cfg.null_sim,
        cfg.crit,
        cfg.standardize_input,
    );
}

fn print_test_result(res: &TestResult) {
    println!(
        "stat={:.6} crit={:.6} p={:.4} raw={:.6e} lrv={:.6e}",
        res.standardized_stat, res.crit_value, res.p_value, res.raw_stat, res.long_run_variance
    );
    if res.reject {
        println!(
            "REJECT constant loadings at alpha={}: evidence of structural change",
            res.alpha
        );
    } else {
        println!("fail to reject constant loadings at alpha={}", res.alpha);
    }
}

/// Execute a parsed command.
pub fn execute(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        // Erroring here would mean a second pool was already installed (it
        // is process-global); in-process callers run tests sequentially so
        // only the first install wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match &cli.command {
        Command::Test(args) => run_test_cmd(args),
        Command::Simulate(args) => run_simulate_cmd(args),
        Command::SelectFactors(args) => run_select_cmd(args),
        Command::Diagnose(args) => run_diagnose_cmd(args),
    }
}

fn run_test_cmd(args: &TestArgs) -> Result<()> {
    let panel = load_panel(&args.input)?;
    let (t, n) = (panel.t_obs(), panel.n_units());
    let mut cfg = test_config(&args.common, args.r, args.standardize);
    cfg.kernel = kernel_override(&args.common, t, n)?;
    let kernel = cfg.resolve_kernel(t, n)?;
    print_config_line("test", t, n, &cfg, &kernel);
    let res = run_test(&panel, &cfg)?;
    print_test_result(&res);
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&res)
            .map_err(|e| Error::Input(format!("serialize result: {e}")))?;
        std::fs::write(out, json)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", out.display())))?;
        println!("# wrote {}", out.display());
    }
    if let Some(sim_out) = &args.sim_out {
        let mut csv = String::from("replication,stat\n");
        for (i, v) in res.sim_stats.iter().enumerate() {
            csv.push_str(&format!("{i},{v}\n"));
        }
        std::fs::write(sim_out, csv)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", sim_out.display())))?;
        println!("# wrote {}", sim_out.display());
    }
    Ok(())
}

fn run_simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let family = DgpFamily::parse(&args.dgp)?;
    let mut dgp = DgpSpec::new(family, args.t, args.n)?;
    if let Some(drift) = args.factor_drift {
        dgp = dgp.with_factor_drift(drift);
    }
    let grid: Vec<GridEntry> = args
        .grid
        .split(',')
        .map(|s| GridEntry::parse(s.trim()))
        .collect::<Result<_>>()?;
    let seed = resolve_seed(args.common.seed);
    let mut cfg = McConfig::new(dgp, args.reps, grid, seed);
    cfg.r_max = args.r_max;
    cfg.test_cfg = test_config(&args.common, 2, false);
    cfg.test_cfg.kernel = kernel_override(&args.common, args.t, args.n)?;
    let kernel = cfg.test_cfg.resolve_kernel(args.t, args.n)?;
    println!(
        "# simulate: dgp={} T={} N={} reps={} grid={} r_max={} B={} alpha={} seed={} h={:.6} l={} null_sim={:?} factor_drift={}",
        family.name(),
        args.t,
        args.n,
        args.reps,
        args.grid,
        args.r_max,
        cfg.test_cfg.b_reps,
        cfg.test_cfg.alpha,
        seed,
        kernel.h,
        kernel.hac_lag,
        cfg.test_cfg.null_sim,
        cfg.dgp.factor_drift,
    );
    let table = run_experiment(&cfg)?;
    print!("{}", table.to_csv_string());
    if let Some(out) = &args.out {
        table.write_csv(out)?;
        println!("# wrote {}", out.display());
    }
    Ok(())
}

fn run_select_cmd(args: &SelectArgs) -> Result<()> {
    let panel = load_panel(&args.input)?;
    let (t, n) = (panel.t_obs(), panel.n_units());
    let mut cfg = test_config(&args.common, 1, args.standardize);
    cfg.kernel = kernel_override(&args.common, t, n)?;
    let kernel = cfg.resolve_kernel(t, n)?;
    print_config_line("select-factors", t, n, &cfg, &kernel);
    let sel = sequential_factor_number(&panel, args.r_max, &cfg)?;
    let mut csv = String::from("j,stat,crit,p_value,reject\n");
    println!("j     stat      crit    p-value  reject");
    for (j, res) in &sel.per_j {
        println!(
            "{j:<4} {:>9.4} {:>9.4} {:>8.4}  {}",
            res.standardized_stat, res.crit_value, res.p_value, res.reject
        );
        csv.push_str(&format!(
            "{j},{},{},{},{}\n",
            res.standardized_stat, res.crit_value, res.p_value, res.reject
        ));
    }
    match sel.r_hat {
        Some(r) if sel.exact_fit_stop => {
            println!("selected r = {r} (exact factor fit at r = {r}; no residual variation left)")
        }
        Some(r) => println!("selected r = {r}"),
        None => println!("no factor count up to {} is compatible with constant loadings", args.r_max),
    }
    if let Some(out) = &args.out {
        std::fs::write(out, csv)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", out.display())))?;
        println!("# wrote {}", out.display());
    }
    Ok(())
}

fn parse_r_grid(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let lo: usize = a
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad grid bound '{a}'")))?;
        let hi: usize = b
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad grid bound '{b}'")))?;
        if lo < 1 || hi < lo {
            return Err(Error::Config(format!("bad grid range '{spec}'")));
        }
        Ok((lo..=hi).collect())
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&r| r >= 1)
                    .ok_or_else(|| Error::Config(format!("bad grid entry '{s}'")))
            })
            .collect()
    }
}

fn run_diagnose_cmd(args: &DiagnoseArgs) -> Result<()> {
    let panel = load_panel(&args.input)?;
    let working = if args.standardize { panel.standardize()? } else { panel };
    let (t, n) = (working.t_obs(), working.n_units());
    if n < 2 {
        return Err(Error::Input("CD requires N >= 2 units".into()));
    }
    let grid = parse_r_grid(&args.r_grid)?;
    let lag = args.lbq_lag.unwrap_or_else(|| crate::diagnostics::default_lbq_lag(t));
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", args.alpha)));
    }
    println!("# diagnose: T={t} N={n} r_grid={} lbq_lag={lag} alpha={} standardize={}",
        args.r_grid, args.alpha, args.standardize);
    println!("r     CD          LBQ");
    let mut csv = String::from("r_tilde,cd,lbq_fraction,lbq_skipped\n");
    for &r in &grid {
        let est = crate::factors::estimate_factors(&working, r)
            .map_err(|e| e.with_stage(&format!("r = {r}")))?;
        let report = crate::diagnostics::residual_diagnostics(&est.residuals, lag, args.alpha)
            .map_err(|e| e.with_stage(&format!("r = {r}")))?;
        println!("{r:<4} {:>10.2}  {:>6.2}", report.cd_stat, report.lbq_reject_fraction);
        csv.push_str(&format!(
            "{r},{},{},{}\n",
            report.cd_stat, report.lbq_reject_fraction, report.lbq_skipped
        ));
    }
    if let Some(out) = &args.out {
        std::fs::write(out, csv)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", out.display())))?;
        println!("# wrote {}", out.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_test_subcommand_with_defaults() {
        let cli = parse(["factorbreak", "test", "--input", "x.csv", "--r", "2"]).unwrap();
        match &cli.command {
            Command::Test(a) => {
                assert_eq!(a.input, PathBuf::from("x.csv"));
                assert_eq!(a.r, 2);
                assert_eq!(a.common.b, 1000);
                assert_eq!(a.common.alpha, 0.05);
                assert!(a.standardize);
                assert_eq!(a.common.null_sim, NullSimArg::DriftedFactor);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn parses_simulate_subcommand() {
        let cli = parse([
            "factorbreak", "simulate", "--dgp", "S1", "--T", "200", "--N", "100", "--reps",
            "1000", "--seed", "42", "--grid", "2,3,4,5,auto",
        ])
        .unwrap();
        match &cli.command {
            Command::Simulate(a) => {
                assert_eq!(a.dgp, "S1");
                assert_eq!(a.t, 200);
                assert_eq!(a.n, 100);
                assert_eq!(a.reps, 1000);
                assert_eq!(a.common.seed, Some(42));
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn missing_required_flag_fails_parsing() {
        assert!(parse(["factorbreak", "test"]).is_err());
        assert!(parse(["factorbreak", "nonsense"]).is_err());
        assert!(parse(["factorbreak", "test", "--input", "x.csv", "--r", "two"]).is_err());
    }

    #[test]
    fn r_grid_parsing() {
        assert_eq!(parse_r_grid("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_r_grid("2,5,7").unwrap(), vec![2, 5, 7]);
        assert!(parse_r_grid("4..2").is_err());
        assert!(parse_r_grid("0..3").is_err());
        assert!(parse_r_grid("a,b").is_err());
    }
}
