//! Sequential factor-number selection: the smallest factor count at which
//! the constancy test stops rejecting.
//!
//! On a stable panel the procedure stops quickly; every count below the
//! stop rejected. With an abrupt loading break there is no small constant
//! representation: the procedure keeps rejecting and reports an inflated
//! count or exhausts the search bound, which is itself evidence of
//! instability.
//!
//! ```bash
//! cargo run --release --example factor_selection
//! ```

use factorbreak::{generate_panel, sequential_factor_number, DgpFamily, DgpSpec, TestConfig};

fn main() -> factorbreak::Result<()> {
    let cfg = TestConfig { b_reps: 199, seed: 11, ..TestConfig::default() };
    for family in [DgpFamily::S1, DgpFamily::G1] {
        let dgp = DgpSpec::new(family, 200, 100)?;
        let panel = generate_panel(&dgp, 3)?;
        let sel = sequential_factor_number(&panel, 8, &cfg)?;
        println!("design {:?}:", family);
        for (j, res) in &sel.per_j {
            println!(
                "  j={j}: stat {:>8.3} crit {:>7.3} reject {}",
                res.standardized_stat, res.crit_value, res.reject
            );
        }
        match sel.r_hat {
            Some(r) => println!("  smallest count compatible with constant loadings: {r}"),
            None => println!("  every count up to 8 rejected: loadings are unstable"),
        }
    }
    Ok(())
}
