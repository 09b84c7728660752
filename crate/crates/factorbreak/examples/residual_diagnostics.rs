//! Residual diagnostics across factor counts: the CD statistic for
//! cross-sectional dependence and the fraction of units with significant
//! Ljung-Box autocorrelation, on a design with both kinds of dependence.
//!
//! ```bash
//! cargo run --release --example residual_diagnostics
//! ```

use factorbreak::diagnostics::default_lbq_lag;
use factorbreak::{estimate_factors, generate_panel, residual_diagnostics, DgpFamily, DgpSpec};

fn main() -> factorbreak::Result<()> {
    let dgp = DgpSpec::new(DgpFamily::S3, 240, 60)?;
    let panel = generate_panel(&dgp, 99)?;
    let lag = default_lbq_lag(panel.t_obs());
    println!("r     CD      LBQ fraction   (T={}, N={}, lag={lag})", panel.t_obs(), panel.n_units());
    for r in 1..=6 {
        let est = estimate_factors(&panel, r)?;
        let rep = residual_diagnostics(&est.residuals, lag, 0.05)?;
        println!("{r:<4} {:>7.2}  {:>7.2}", rep.cd_stat, rep.lbq_reject_fraction);
    }
    Ok(())
}
