//! Inspect the simulated null distribution of the standardized statistic:
//! summary quantiles under the three null-panel recipes.
//!
//! ```bash
//! cargo run --release --example null_distribution
//! ```

use factorbreak::breaktest::empirical_quantile;
use factorbreak::{simulate_null_statistics, NullSim, TestConfig};

fn main() -> factorbreak::Result<()> {
    for recipe in [NullSim::DriftedFactor, NullSim::IidFactor, NullSim::PureNoise] {
        let cfg = TestConfig { r_tilde: 2, b_reps: 999, seed: 1, null_sim: recipe, ..TestConfig::default() };
        let sims = simulate_null_statistics(100, 50, &cfg)?;
        let mean = sims.iter().sum::<f64>() / sims.len() as f64;
        println!(
            "{recipe:?}: mean {:>6.3}  q50 {:>6.3}  q95 {:>6.3}  q99 {:>6.3}",
            mean,
            empirical_quantile(&sims, 0.5)?,
            empirical_quantile(&sims, 0.95)?,
            empirical_quantile(&sims, 0.99)?,
        );
    }
    Ok(())
}
