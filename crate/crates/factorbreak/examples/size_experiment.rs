//! A scaled-down rejection-rate experiment under a null design: the
//! empirical size should sit near the nominal 5% level.
//!
//! ```bash
//! cargo run --release --example size_experiment
//! ```

use factorbreak::{run_experiment, DgpFamily, DgpSpec, GridEntry, McConfig};

fn main() -> factorbreak::Result<()> {
    let dgp = DgpSpec::new(DgpFamily::S1, 100, 50)?;
    let mut cfg = McConfig::new(
        dgp,
        200,
        vec![GridEntry::Fixed(2), GridEntry::Fixed(3)],
        20240901,
    );
    cfg.test_cfg.b_reps = 199;
    let table = run_experiment(&cfg)?;
    print!("{}", table.to_csv_string());
    Ok(())
}
