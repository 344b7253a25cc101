//! Compares analytic gradients of the composite loss with central
//! differences on a small random problem.
//!
//! cargo run --example gradient_check

use dualgraph::dynamic_graph::{self, SubjectGraph};
use dualgraph::loss::Reduction;
use dualgraph::trainer::Objective;
use dualgraph::{gcn, matrix, GcnModel, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dualgraph::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, d) = (10, 4);
    let h = Matrix::from_vec(
        n,
        d,
        (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )?;
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let train: Vec<usize> = (0..7).collect();
    let delta: Vec<f64> = (0..n)
        .map(|i| {
            if i < 7 {
                rng.random_range(-0.5..0.5)
            } else {
                0.0
            }
        })
        .collect();
    let theta = dynamic_graph::median_heuristic_theta(&matrix::pairwise_sq_euclidean(&h));
    let graph = SubjectGraph::build(&h, theta, 3)?;
    let a_hat = gcn::normalize_adjacency(&graph.adjacency)?;
    let mut model = GcnModel::init(d, 6, 2, 0.0, theta, &mut rng)?;
    let objective = Objective {
        a_hat: &a_hat,
        features: &h,
        labels: &labels,
        train: &train,
        edges: &graph.edges,
        edge_dist_sq: &graph.edge_dist_sq,
        delta: &delta,
        lambda2: 0.8,
        reduction: Reduction::Mean,
        training: false,
        dropout_seed: 0,
    };
    let trace = objective.forward(&model)?;
    let (parts, grads, grad_tau) = objective.gradients(&model, &trace)?;
    println!(
        "loss: ce {:.6} graph {:.6} total {:.6}",
        parts.cross_entropy, parts.graph, parts.total
    );

    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for idx in 0..model.w1.as_slice().len() {
        let orig = model.w1.as_slice()[idx];
        model.w1.as_mut_slice()[idx] = orig + step;
        let up = objective.loss(&model)?.total;
        model.w1.as_mut_slice()[idx] = orig - step;
        let down = objective.loss(&model)?.total;
        model.w1.as_mut_slice()[idx] = orig;
        let numeric = (up - down) / (2.0 * step);
        worst = worst.max((grads.w1.as_slice()[idx] - numeric).abs());
    }
    println!("W1: max abs gradient error {worst:.2e}");

    let tau = model.tau;
    model.tau = tau + step;
    let up = objective.loss(&model)?.total;
    model.tau = tau - step;
    let down = objective.loss(&model)?.total;
    model.tau = tau;
    println!(
        "tau: analytic {grad_tau:.6e}, numeric {:.6e}",
        (up - down) / (2.0 * step)
    );
    Ok(())
}
