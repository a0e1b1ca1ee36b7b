//! Runs a reduced benchmark grid and prints the report tables.

use rf_lab::eval::{run_benchmark, BenchmarkConfig, Method};
use rf_lab::feature_store::{generate_synthetic, FeatureSchema, SyntheticSpec};

fn main() -> rf_lab::Result<()> {
    let ds = generate_synthetic(&SyntheticSpec {
        categories: 30,
        per_category: 50,
        schema: FeatureSchema::uniform(4, 8)?,
        separation: 0.7,
        noise: 1.0,
        seed: 7,
    })?;
    let cfg = BenchmarkConfig {
        methods: vec![Method::Rocchio, Method::Mars, Method::MarsQ, Method::Riemann, Method::Latent],
        kbars: vec![5.0, 1.0],
        rs: vec![5, 20],
        repetitions: 10,
        ..BenchmarkConfig::new(1)
    };
    let report = run_benchmark(&ds, &cfg)?;
    print!("{}", report.to_table());
    print!("{}", report.pairwise_table());
    Ok(())
}
