//! Re-run one test under 0.8x, 1.0x, and 1.2x the plug-in bandwidth: the
//! decision should be stable across the three choices.
//!
//! ```bash
//! cargo run --release --example bandwidth_sensitivity
//! ```

use factorbreak::kernels::{hac_lag, rule_of_thumb_h};
use factorbreak::{generate_panel, run_test, DgpFamily, DgpSpec, KernelKind, KernelSpec, TestConfig};

fn main() -> factorbreak::Result<()> {
    let dgp = DgpSpec::new(DgpFamily::G1, 100, 100)?;
    let panel = generate_panel(&dgp, 21)?;
    let (t, n) = (panel.t_obs(), panel.n_units());
    let h_c = rule_of_thumb_h(t, n);
    for scale in [0.8, 1.0, 1.2] {
        let kernel =
            KernelSpec::new(KernelKind::Bartlett, scale * h_c, KernelKind::Bartlett, hac_lag(t))?;
        let cfg = TestConfig {
            r_tilde: 2,
            kernel: Some(kernel),
            b_reps: 199,
            seed: 5,
            ..TestConfig::default()
        };
        let res = run_test(&panel, &cfg)?;
        println!(
            "h = {:.5} ({}x): stat {:>7.3} crit {:>6.3} reject {}",
            scale * h_c,
            scale,
            res.standardized_stat,
            res.crit_value,
            res.reject
        );
    }
    Ok(())
}
