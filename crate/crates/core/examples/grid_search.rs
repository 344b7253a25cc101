//! Sweeps lambda1 x lambda2 and prints the accuracy surface.
//!
//! cargo run --release --example grid_search [-- --full]

use dualgraph::cv::{self, DEFAULT_LAMBDA1_GRID, DEFAULT_LAMBDA2_GRID};
use dualgraph::{synthesize, SynthSpec, TrainConfig};

fn main() -> dualgraph::Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    let data = synthesize(&SynthSpec {
        n_per_class: if full { 100 } else { 40 },
        d_total: if full { 100 } else { 40 },
        d_informative: 6,
        gap: 1.0,
        seed: 7,
    })?;
    let config = TrainConfig {
        epochs: if full { 50 } else { 20 },
        ..TrainConfig::default()
    };
    let grid = cv::grid_search(&data, &config, &DEFAULT_LAMBDA1_GRID, &DEFAULT_LAMBDA2_GRID)?;
    print!("{}", cv::surface_csv(&grid));
    let best = grid.best_cell();
    println!(
        "best lambda1 {} lambda2 {} accuracy {:.3}, spread {:.3}",
        best.lambda1,
        best.lambda2,
        best.report.summary.acc.mean,
        grid.accuracy_spread()
    );
    Ok(())
}
