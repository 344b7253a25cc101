//! Trains on one held-out fold and prints the loss curve and test metrics.
//!
//! cargo run --release --example train_fold

use dualgraph::{cv, synthesize, train_fold, trainer, SynthSpec, TrainConfig};

fn main() -> dualgraph::Result<()> {
    let data = synthesize(&SynthSpec {
        n_per_class: 100,
        d_total: 100,
        d_informative: 10,
        gap: 3.0,
        seed: 7,
    })?;
    let config = TrainConfig::default();
    let folds = cv::stratified_folds(&data.y, config.folds, config.seed)?;
    let test = &folds[0];
    let train = cv::complement(data.len(), test);
    let run = train_fold(&data, &train, test, &config)?;

    for r in run.history.iter().step_by(10) {
        println!(
            "epoch {:>2}  ce {:.4}  graph {:.4}  train acc {:.3}  theta {:.5}",
            r.epoch, r.cross_entropy, r.graph, r.train_accuracy, r.theta
        );
    }
    let m = run.metrics(&data.y, test, config.positive_class);
    println!(
        "held-out: acc {:.3}  sen {:?}  spe {:?}  auc {:?}",
        m.acc, m.sen, m.spe, m.auc
    );
    println!("selected features: {:?}", &run.prepared.selected[..10]);
    print!("{}", trainer::history_csv(&run.history[..3]));
    Ok(())
}
