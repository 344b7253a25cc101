//! Five-fold cross-validation on a separable and a null dataset.
//!
//! cargo run --release --example cross_validation

use dualgraph::{cross_validate, cv, synthesize, SynthSpec, TrainConfig};

fn main() -> dualgraph::Result<()> {
    let config = TrainConfig::default();
    for gap in [3.0, 0.0] {
        let data = synthesize(&SynthSpec {
            n_per_class: 100,
            d_total: 100,
            d_informative: 10,
            gap,
            seed: 7,
        })?;
        let report = cross_validate(&data, &config)?;
        println!("gap {gap}:");
        print!("{}", cv::metrics_csv(&report));
        println!(
            "accuracy {:.3} +/- {:.3}\n",
            report.summary.acc.mean, report.summary.acc.std
        );
    }
    Ok(())
}
