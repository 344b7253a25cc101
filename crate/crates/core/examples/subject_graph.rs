//! Builds the fused-feature KNN subject graph and reports its structure.
//!
//! cargo run --example subject_graph

use dualgraph::dynamic_graph::{self, SubjectGraph};
use dualgraph::{gcn, matrix, synthesize, trainer, SynthSpec, TrainConfig};

fn main() -> dualgraph::Result<()> {
    let data = synthesize(&SynthSpec {
        n_per_class: 40,
        d_total: 30,
        d_informative: 5,
        gap: 2.5,
        seed: 5,
    })?;
    let config = TrainConfig {
        top_k_features: 10,
        ..TrainConfig::default()
    };
    let all: Vec<usize> = (0..data.len()).collect();
    let prepared = trainer::prepare(&data, &all, &config)?;
    let h = dynamic_graph::fuse_features(&prepared.x, &prepared.energy, None, config.lambda1)?;
    let theta = dynamic_graph::median_heuristic_theta(&matrix::pairwise_sq_euclidean(&h));
    let graph = SubjectGraph::build(&h, theta, config.knn_k)?;

    let degrees = graph.degrees();
    let same_class = graph
        .edges
        .iter()
        .filter(|e| data.y[e.i] == data.y[e.j])
        .count();
    println!(
        "theta {theta:.5}, {} edges over {} subjects",
        graph.edges.len(),
        graph.node_count()
    );
    println!(
        "degree min {} max {}, same-class edges {:.1}%",
        degrees.iter().min().unwrap(),
        degrees.iter().max().unwrap(),
        100.0 * same_class as f64 / graph.edges.len() as f64
    );
    let a_hat = gcn::normalize_adjacency(&graph.adjacency)?;
    let radius = matrix::spectral_radius(
        &a_hat,
        matrix::POWER_ITERATION_MAX_ITERS,
        matrix::POWER_ITERATION_TOL,
    )?;
    println!("normalized adjacency spectral radius {radius:.6}");
    for e in graph.edges.iter().take(5) {
        println!("  {} -- {}  a = {:.4}", e.i, e.j, e.weight);
    }
    Ok(())
}
