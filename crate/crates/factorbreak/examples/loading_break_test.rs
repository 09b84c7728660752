//! Generate a panel with an abrupt mid-sample loading break and test for
//! structural change, printing the full decision summary.
//!
//! ```bash
//! cargo run --release --example loading_break_test
//! ```

use factorbreak::{generate_panel, run_test, DgpFamily, DgpSpec, TestConfig};

fn main() -> factorbreak::Result<()> {
    let dgp = DgpSpec::new(DgpFamily::G1, 100, 100)?;
    let panel = generate_panel(&dgp, 7)?;
    println!(
        "panel: T={} N={} (two factors, +0.25 loading shift after T/2)",
        panel.t_obs(),
        panel.n_units()
    );

    let cfg = TestConfig { r_tilde: 2, b_reps: 499, seed: 42, ..TestConfig::default() };
    let res = run_test(&panel, &cfg)?;
    println!("standardized statistic: {:.4}", res.standardized_stat);
    println!("simulated 95% critical value: {:.4}", res.crit_value);
    println!("p-value: {:.4}", res.p_value);
    println!("bandwidth h = {:.5}, HAC lag l = {}", res.h_used, res.l_used);
    println!("reject constant loadings: {}", res.reject);

    // The same panel without the break fails to reject.
    let calm = generate_panel(&DgpSpec::new(DgpFamily::S1, 100, 100)?, 7)?;
    let res0 = run_test(&calm, &cfg)?;
    println!(
        "no-break control: stat {:.4} vs crit {:.4} -> reject = {}",
        res0.standardized_stat, res0.crit_value, res0.reject
    );
    Ok(())
}
