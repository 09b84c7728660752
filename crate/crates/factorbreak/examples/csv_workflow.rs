//! File-based workflow: write a panel to CSV, load it back, standardize,
//! and test -- the same path the command-line interface drives.
//!
//! ```bash
//! cargo run --release --example csv_workflow
//! ```

use factorbreak::{generate_panel, load_csv, run_test, DgpFamily, DgpSpec, IngestOptions, TestConfig};

fn main() -> factorbreak::Result<()> {
    let dir = std::env::temp_dir();
    let path = dir.join("factorbreak_example_panel.csv");

    let dgp = DgpSpec::new(DgpFamily::G2, 120, 40)?;
    generate_panel(&dgp, 17)?.write_csv(&path)?;
    println!("wrote {}", path.display());

    let panel = load_csv(&path, &IngestOptions::default())?;
    println!("loaded T={} N={}", panel.t_obs(), panel.n_units());

    let cfg = TestConfig {
        r_tilde: 2,
        b_reps: 199,
        seed: 3,
        standardize_input: true,
        ..TestConfig::default()
    };
    let res = run_test(&panel, &cfg)?;
    println!(
        "stat {:.3} crit {:.3} p {:.4} reject {}",
        res.standardized_stat, res.crit_value, res.p_value, res.reject
    );
    let _ = std::fs::remove_file(&path);
    Ok(())
}
