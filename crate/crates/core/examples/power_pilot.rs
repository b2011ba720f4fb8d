//! Rejection rate of the dCov test against the control laws as the sample
//! size grows. Used to pick the sample size of the theorem2 power check.
//!
//! cargo run --release --example power_pilot -- [seed] [n ...]

use sechlab::harness::{run_experiment, Experiment, ExperimentConfig};
use sechlab::sech::DistKind;

fn main() -> sechlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args
        .next()
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_240_601);
    let mut sizes: Vec<usize> = args.filter_map(|s| s.parse().ok()).collect();
    if sizes.is_empty() {
        sizes = vec![2000, 4000, 8000, 12_000, 16_000];
    }
    println!("dist,n,reject_fraction,median_p");
    for dist in [DistKind::Normal, DistKind::Laplace] {
        for &n in &sizes {
            let mut config = ExperimentConfig::new(Experiment::Theorem2, seed);
            config.dist = dist;
            config.n_samples = n;
            let report = run_experiment(&config)?;
            let agg = &report.aggregate;
            println!(
                "{},{},{},{}",
                dist.as_str(),
                n,
                agg.reject_fraction.unwrap_or(f64::NAN),
                agg.median_p.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
