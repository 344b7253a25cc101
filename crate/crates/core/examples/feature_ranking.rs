//! Scores features on a synthetic dataset and prints the ranked table.
//!
//! cargo run --example feature_ranking

use dualgraph::feature_graph::{FeatureGraph, ScoringOptions};
use dualgraph::{synthesize, SynthSpec};

fn main() -> dualgraph::Result<()> {
    let data = synthesize(&SynthSpec {
        n_per_class: 60,
        d_total: 20,
        d_informative: 4,
        gap: 2.0,
        seed: 11,
    })?;
    let (z, _) = dualgraph::dataio::standardize(&data.x, &(0..data.len()).collect::<Vec<_>>())?;
    let fg = FeatureGraph::fit(&z, &data.y, &ScoringOptions::default())?;
    println!(
        "spectral radius {:.4}, damping {:.4}",
        fg.energy.rho, fg.energy.r
    );
    println!(
        "{:>4} {:>6} {:>9} {:>7} {:>6} {:>8}",
        "rank", "name", "fisher", "mi", "s", "c_tilde"
    );
    for (rank, f) in dualgraph::feature_graph::rank_descending(&fg.relevance)
        .into_iter()
        .enumerate()
    {
        println!(
            "{:>4} {:>6} {:>9.4} {:>7.4} {:>6.3} {:>8.3}",
            rank + 1,
            data.feature_names[f],
            fg.fisher[f],
            fg.mutual_info[f],
            fg.combined[f],
            fg.relevance[f]
        );
    }
    println!("top 4: {:?}", fg.top_k(4)?);
    Ok(())
}
