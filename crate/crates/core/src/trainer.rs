//! End-to-end training of one fold.
//!
//! Per fold: z-score with training statistics, score and select features on
//! training rows, build the energy matrix, then for every epoch fuse
//! features, (re)build the subject graph over all subjects, run the GCN,
//! compute rewards and the composite loss on training rows, and take one
//! optimizer step on `W1`, `W2` and `τ`.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataio::{Dataset, Standardization};
use crate::dynamic_graph::{self, BlendMode, Edge, SubjectGraph};
use crate::error::{Error, Result};
use crate::feature_graph::{FeatureGraph, ScoringOptions};
use crate::gcn::{self, ForwardTrace, GcnModel, Gradients};
use crate::loss::{self, Reduction, RewardState};
use crate::matrix::{self, Matrix};
use crate::metrics::Metrics;

/// Number of convolution layers; the graph loss counts every edge once per layer.
pub const GRAPH_LAYERS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout: f64,
    pub weight_decay: f64,
    pub knn_k: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub top_k_features: usize,
    pub mi_bins: usize,
    pub hidden_dim: usize,
    pub seed: u64,
    pub rebuild_graph_every_epoch: bool,
    /// Keep the KNN topology fixed from this epoch on.
    pub freeze_graph_after: Option<usize>,
    pub folds: usize,
    pub normalize_mi: bool,
    pub rescale_scores: bool,
    pub ce_reduction: Reduction,
    pub blend: BlendMode,
    pub optimizer: OptimizerKind,
    /// Class index counted as positive for SEN/SPE/AUC.
    pub positive_class: usize,
    pub reward_momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            epochs: 50,
            dropout: 0.1,
            weight_decay: 5e-4,
            knn_k: 8,
            lambda1: 1e-2,
            lambda2: 1.0,
            alpha: 0.5,
            top_k_features: 60,
            mi_bins: 10,
            hidden_dim: 16,
            seed: 0,
            rebuild_graph_every_epoch: true,
            freeze_graph_after: None,
            folds: 5,
            normalize_mi: false,
            rescale_scores: true,
            ce_reduction: Reduction::Mean,
            blend: BlendMode::Blend,
            optimizer: OptimizerKind::Adam,
            positive_class: 1,
            reward_momentum: loss::REWARD_MOMENTUM,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{v} must be finite and > 0")))
            }
        };
        let nonneg = |name, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{v} must be finite and >= 0")))
            }
        };
        positive("learning_rate", self.learning_rate)?;
        nonneg("weight_decay", self.weight_decay)?;
        nonneg("lambda1", self.lambda1)?;
        nonneg("lambda2", self.lambda2)?;
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout", "must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.reward_momentum) {
            return Err(Error::invalid("reward_momentum", "must lie in [0, 1]"));
        }
        for (name, v) in [
            ("epochs", self.epochs),
            ("knn_k", self.knn_k),
            ("top_k_features", self.top_k_features),
            ("hidden_dim", self.hidden_dim),
        ] {
            if v == 0 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        if self.mi_bins < 2 {
            return Err(Error::invalid("mi_bins", "must be at least 2"));
        }
        if self.folds < 2 {
            return Err(Error::invalid("folds", "must be at least 2"));
        }
        if self.positive_class > 1 {
            return Err(Error::invalid("positive_class", "must be 0 or 1"));
        }
        Ok(())
    }

    pub fn scoring_options(&self) -> ScoringOptions {
        ScoringOptions {
            alpha: self.alpha,
            mi_bins: self.mi_bins,
            normalize_mi: self.normalize_mi,
            rescale: self.rescale_scores,
        }
    }

    /// Whether the KNN topology is rebuilt at `epoch`.
    fn rebuilds_at(&self, epoch: usize) -> bool {
        if epoch == 0 {
            return true;
        }
        if !self.rebuild_graph_every_epoch {
            return false;
        }
        self.freeze_graph_after.is_none_or(|e| epoch < e)
    }
}

/// Independent random streams derived from one seed.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    Folds = 1,
    Init = 2,
    Dropout = 3,
}

/// SplitMix64 finalizer over `(seed, stream, index)`.
pub(crate) fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    let mut z = seed
        ^ (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng_for(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

/// Loss components of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub cross_entropy: f64,
    pub graph: f64,
    pub total: f64,
}

/// The composite objective with the graph topology, distances and rewards
/// held fixed; the trainable inputs are the model's `W1`, `W2` and `τ`.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub a_hat: &'a Matrix,
    pub features: &'a Matrix,
    pub labels: &'a [usize],
    pub train: &'a [usize],
    pub edges: &'a [Edge],
    pub edge_dist_sq: &'a [f64],
    pub delta: &'a [f64],
    pub lambda2: f64,
    pub reduction: Reduction,
    pub training: bool,
    pub dropout_seed: u64,
}

impl Objective<'_> {
    pub fn forward(&self, model: &GcnModel) -> Result<ForwardTrace> {
        gcn::gcn_forward(
            self.a_hat,
            self.features,
            model,
            self.training,
            self.dropout_seed,
        )
    }

    /// Loss parts and gradients for `W1`, `W2` and `τ` at `model`, given the
    /// forward trace for the same model.
    pub fn gradients(
        &self,
        model: &GcnModel,
        trace: &ForwardTrace,
    ) -> Result<(LossParts, Gradients, f64)> {
        let (ce, grad_logits) =
            loss::cross_entropy(&trace.probs, self.labels, self.train, self.reduction)?;
        let theta = model.theta();
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .zip(self.edge_dist_sq)
            .map(|(e, d)| Edge {
                weight: (-theta * d).exp(),
                ..*e
            })
            .collect();
        let graph = loss::graph_loss(&edges, self.delta, GRAPH_LAYERS);
        let total = loss::total_loss(ce, graph, self.lambda2);
        let grads = gcn::gcn_backward(trace, &grad_logits, model)?;
        let grad_tau = self.lambda2
            * gcn::theta_gradient(&edges, self.edge_dist_sq, self.delta, theta, GRAPH_LAYERS);
        Ok((
            LossParts {
                cross_entropy: ce,
                graph,
                total,
            },
            grads,
            grad_tau,
        ))
    }

    pub fn loss(&self, model: &GcnModel) -> Result<LossParts> {
        let trace = self.forward(model)?;
        Ok(self.gradients(model, &trace)?.0)
    }
}

#[derive(Debug, Clone)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// Adam or plain gradient descent over the flat parameter blocks.
#[derive(Debug, Clone)]
struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    step: i32,
    w1: Moments,
    w2: Moments,
    tau: Moments,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Optimizer {
    fn new(kind: OptimizerKind, lr: f64, model: &GcnModel) -> Self {
        Self {
            kind,
            lr,
            step: 0,
            w1: Moments::new(model.w1.as_slice().len()),
            w2: Moments::new(model.w2.as_slice().len()),
            tau: Moments::new(1),
        }
    }

    fn update(&mut self, model: &mut GcnModel, grads: &Gradients, grad_tau: f64) {
        self.step += 1;
        let mut tau = [model.tau];
        let blocks: [(&mut [f64], &[f64], &mut Moments); 3] = [
            (model.w1.as_mut_slice(), grads.w1.as_slice(), &mut self.w1),
            (model.w2.as_mut_slice(), grads.w2.as_slice(), &mut self.w2),
            (&mut tau, &[grad_tau], &mut self.tau),
        ];
        let bias1 = 1.0 - BETA1.powi(self.step);
        let bias2 = 1.0 - BETA2.powi(self.step);
        for (params, grad, moments) in blocks {
            match self.kind {
                OptimizerKind::Sgd => {
                    for (p, g) in params.iter_mut().zip(grad) {
                        *p -= self.lr * g;
                    }
                }
                OptimizerKind::Adam => {
                    for (((p, g), m), v) in params
                        .iter_mut()
                        .zip(grad)
                        .zip(moments.m.iter_mut())
                        .zip(moments.v.iter_mut())
                    {
                        *m = BETA1 * *m + (1.0 - BETA1) * g;
                        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                        *p -= self.lr * (*m / bias1) / ((*v / bias2).sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        model.tau = tau[0];
    }
}

/// One row of the training history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub cross_entropy: f64,
    pub graph: f64,
    pub total: f64,
    pub train_accuracy: f64,
    pub expected_accuracy: f64,
    pub theta: f64,
}

pub const HISTORY_HEADER: &str = "epoch,l_ce,l_graph,total,train_acc,ema_acc,theta";

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HISTORY_HEADER}");
    for r in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.epoch,
            r.cross_entropy,
            r.graph,
            r.total,
            r.train_accuracy,
            r.expected_accuracy,
            r.theta
        );
    }
    out
}

/// Preprocessing shared by training and graph inspection: standardization,
/// feature scoring on training rows, top-k selection and the energy matrix
/// of the selected features.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub standardization: Standardization,
    pub feature_graph: FeatureGraph,
    pub selected: Vec<usize>,
    /// Standardized selected features of every subject.
    pub x: Matrix,
    pub energy: Matrix,
}

pub fn prepare(dataset: &Dataset, train: &[usize], config: &TrainConfig) -> Result<Prepared> {
    let standardization = Standardization::fit(&dataset.x, train)?;
    let z = standardization.apply(&dataset.x);
    let z_train = z.select_rows(train);
    let y_train: Vec<usize> = train.iter().map(|&i| dataset.y[i]).collect();
    let feature_graph = FeatureGraph::fit(&z_train, &y_train, &config.scoring_options())?;
    let k = config.top_k_features.min(dataset.feature_count());
    let selected = feature_graph.top_k(k)?;
    let energy = feature_graph.energy_for(&selected)?.c;
    Ok(Prepared {
        standardization,
        feature_graph,
        selected: selected.clone(),
        x: z.select_columns(&selected),
        energy,
    })
}

#[derive(Debug, Clone)]
pub struct FoldRun {
    pub model: GcnModel,
    pub history: Vec<EpochRecord>,
    pub prepared: Prepared,
    /// Subject graph and fused features used for the final evaluation.
    pub graph: SubjectGraph,
    pub features: Matrix,
    /// Eval-mode class probabilities of every subject.
    pub probs: Matrix,
}

impl FoldRun {
    pub fn predictions(&self) -> Vec<usize> {
        gcn::argmax_rows(&self.probs)
    }

    pub fn metrics(&self, labels: &[usize], mask: &[usize], positive: usize) -> Metrics {
        let scores: Vec<f64> = (0..self.probs.rows())
            .map(|i| self.probs[(i, positive)])
            .collect();
        Metrics::compute(labels, &self.predictions(), &scores, mask, positive)
    }
}

fn check_masks(dataset: &Dataset, train: &[usize], test: &[usize]) -> Result<()> {
    let n = dataset.len();
    let mut seen = vec![false; n];
    for &i in train {
        if i >= n {
            return Err(Error::invalid(
                "train mask",
                format!("index {i} out of range"),
            ));
        }
        seen[i] = true;
    }
    for &i in test {
        if i >= n {
            return Err(Error::invalid(
                "test mask",
                format!("index {i} out of range"),
            ));
        }
        if seen[i] {
            return Err(Error::invalid(
                "masks",
                format!("index {i} is in both masks"),
            ));
        }
    }
    if train.is_empty() {
        return Err(Error::EmptyMask { op: "train_fold" });
    }
    let first = dataset.y[train[0]];
    if train.iter().all(|&i| dataset.y[i] == first) {
        return Err(Error::ClassCount { found: 1 });
    }
    Ok(())
}

fn fused(prepared: &Prepared, previous: Option<&Matrix>, config: &TrainConfig) -> Result<Matrix> {
    let previous = match config.blend {
        BlendMode::Blend => previous,
        BlendMode::CurrentOnly => None,
    };
    dynamic_graph::fuse_features(&prepared.x, &prepared.energy, previous, config.lambda1)
}

/// Trains one fold transductively: the graph spans every subject, the loss
/// only sees `train`.
pub fn train_fold(
    dataset: &Dataset,
    train: &[usize],
    test: &[usize],
    config: &TrainConfig,
) -> Result<FoldRun> {
    config.validate()?;
    check_masks(dataset, train, test)?;
    let prepared = prepare(dataset, train, config)?;
    let n = dataset.len();
    let k = config.knn_k.min(n - 1);

    let initial = fused(&prepared, None, config)?;
    let theta0 = dynamic_graph::median_heuristic_theta(&matrix::pairwise_sq_euclidean(&initial));
    let mut init_rng = rng_for(config.seed, Stream::Init, 0);
    let mut model = GcnModel::init(
        prepared.x.cols(),
        config.hidden_dim,
        dataset.class_count(),
        config.dropout,
        theta0,
        &mut init_rng,
    )?;
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate, &model);
    let mut reward = RewardState::new(n, config.reward_momentum);
    let mut history = Vec::with_capacity(config.epochs);
    let mut graph: Option<SubjectGraph> = None;
    let mut a_hat = Matrix::identity(n);
    let mut previous_energy: Option<&Matrix> = None;

    for epoch in 0..config.epochs {
        let h = fused(&prepared, previous_energy, config)?;
        let theta = model.theta();
        graph = Some(match graph {
            Some(g) if !config.rebuilds_at(epoch) => g.reweight(&h, theta)?,
            _ => {
                let g = SubjectGraph::build(&h, theta, k)?;
                a_hat = gcn::normalize_adjacency(&g.adjacency)?;
                g
            }
        });
        let g = graph.as_ref().expect("graph built above");

        let dropout_seed = derive_seed(config.seed, Stream::Dropout, epoch as u64);
        let trace = gcn::gcn_forward(&a_hat, &h, &model, true, dropout_seed)?;
        let train_accuracy = reward.update(&trace.predictions(), &dataset.y, train);
        let objective = Objective {
            a_hat: &a_hat,
            features: &h,
            labels: &dataset.y,
            train,
            edges: &g.edges,
            edge_dist_sq: &g.edge_dist_sq,
            delta: &reward.delta,
            lambda2: config.lambda2,
            reduction: config.ce_reduction,
            training: true,
            dropout_seed,
        };
        let (parts, mut grads, grad_tau) = objective.gradients(&model, &trace)?;
        if !parts.total.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        if config.weight_decay > 0.0 {
            grads.w1 = grads.w1.add_scaled(&model.w1, config.weight_decay)?;
            grads.w2 = grads.w2.add_scaled(&model.w2, config.weight_decay)?;
        }
        history.push(EpochRecord {
            epoch,
            cross_entropy: parts.cross_entropy,
            graph: parts.graph,
            total: parts.total,
            train_accuracy,
            expected_accuracy: reward.expected_accuracy.unwrap_or(train_accuracy),
            theta,
        });
        optimizer.update(&mut model, &grads, grad_tau);
        if !model.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        previous_energy = Some(&prepared.energy);
    }

    let features = fused(&prepared, previous_energy, config)?;
    let graph = match graph {
        Some(g) if !config.rebuilds_at(config.epochs) => g.reweight(&features, model.theta())?,
        _ => SubjectGraph::build(&features, model.theta(), k)?,
    };
    let probs = evaluate_probs(&model, &features, &graph)?;
    Ok(FoldRun {
        model,
        history,
        prepared,
        graph,
        features,
        probs,
    })
}

fn evaluate_probs(model: &GcnModel, features: &Matrix, graph: &SubjectGraph) -> Result<Matrix> {
    let a_hat = gcn::normalize_adjacency(&graph.adjacency)?;
    Ok(gcn::gcn_forward(&a_hat, features, model, false, 0)?.probs)
}

/// Eval-mode forward over the whole graph, scored on `mask`.
pub fn evaluate(
    model: &GcnModel,
    features: &Matrix,
    graph: &SubjectGraph,
    labels: &[usize],
    mask: &[usize],
    positive: usize,
) -> Result<Metrics> {
    if mask.is_empty() {
        return Err(Error::EmptyMask { op: "evaluate" });
    }
    let probs = evaluate_probs(model, features, graph)?;
    let scores: Vec<f64> = (0..probs.rows()).map(|i| probs[(i, positive)]).collect();
    Ok(Metrics::compute(
        labels,
        &gcn::argmax_rows(&probs),
        &scores,
        mask,
        positive,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{synthesize, SynthSpec};

    fn blobs(seed: u64) -> Dataset {
        synthesize(&SynthSpec {
            n_per_class: 50,
            d_total: 20,
            d_informative: 2,
            gap: 6.0,
            seed,
        })
        .unwrap()
    }

    fn split(n: usize) -> (Vec<usize>, Vec<usize>) {
        (
            (0..n).filter(|i| i % 5 != 0).collect(),
            (0..n).filter(|i| i % 5 == 0).collect(),
        )
    }

    #[test]
    fn separable_blobs_reach_perfect_training_accuracy() {
        let ds = blobs(1);
        let (train, test) = split(ds.len());
        let run = train_fold(&ds, &train, &test, &TrainConfig::default()).unwrap();
        assert_eq!(run.history.len(), 50);
        let best = run
            .history
            .iter()
            .map(|r| r.train_accuracy)
            .fold(0.0, f64::max);
        assert_eq!(best, 1.0);
        let m = run.metrics(&ds.y, &test, 1);
        assert!(m.acc >= 0.9, "{m:?}");
    }

    #[test]
    fn zero_lambda2_gives_pure_cross_entropy() {
        let ds = blobs(2);
        let (train, test) = split(ds.len());
        let config = TrainConfig {
            lambda2: 0.0,
            epochs: 10,
            ..TrainConfig::default()
        };
        let run = train_fold(&ds, &train, &test, &config).unwrap();
        for r in &run.history {
            assert_eq!(r.total, r.cross_entropy);
        }
    }

    #[test]
    fn identical_seeds_give_identical_histories() {
        let ds = blobs(3);
        let (train, test) = split(ds.len());
        let config = TrainConfig {
            epochs: 15,
            seed: 99,
            ..TrainConfig::default()
        };
        let a = train_fold(&ds, &train, &test, &config).unwrap();
        let b = train_fold(&ds, &train, &test, &config).unwrap();
        assert_eq!(history_csv(&a.history), history_csv(&b.history));
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn rejects_bad_masks() {
        let ds = blobs(4);
        let zeros: Vec<usize> = (0..ds.len()).filter(|&i| ds.y[i] == 0).collect();
        assert!(matches!(
            train_fold(&ds, &zeros, &[], &TrainConfig::default()),
            Err(Error::ClassCount { found: 1 })
        ));
        assert!(train_fold(&ds, &[0, 1, 2], &[2], &TrainConfig::default()).is_err());
        assert!(train_fold(&ds, &[], &[1], &TrainConfig::default()).is_err());
    }

    #[test]
    fn divergence_is_reported_with_epoch() {
        let ds = blobs(5);
        let (train, test) = split(ds.len());
        let config = TrainConfig {
            learning_rate: 1e300,
            optimizer: OptimizerKind::Sgd,
            epochs: 5,
            ..TrainConfig::default()
        };
        match train_fold(&ds, &train, &test, &config) {
            Err(Error::Divergence { epoch }) => assert!(epoch < 5),
            other => panic!("expected divergence, got {:?}", other.map(|r| r.history)),
        }
    }

    #[test]
    fn frozen_graph_keeps_topology() {
        let ds = blobs(6);
        let (train, test) = split(ds.len());
        let config = TrainConfig {
            epochs: 6,
            freeze_graph_after: Some(2),
            ..TrainConfig::default()
        };
        assert!(config.rebuilds_at(1));
        assert!(!config.rebuilds_at(2));
        let run = train_fold(&ds, &train, &test, &config).unwrap();
        assert!(run.graph.degrees().iter().all(|&d| d >= 8));
        let once = TrainConfig {
            rebuild_graph_every_epoch: false,
            ..TrainConfig::default()
        };
        assert!(once.rebuilds_at(0) && !once.rebuilds_at(1));
    }

    #[test]
    fn derived_streams_differ() {
        assert_ne!(
            derive_seed(7, Stream::Folds, 0),
            derive_seed(7, Stream::Init, 0)
        );
        assert_ne!(
            derive_seed(7, Stream::Dropout, 0),
            derive_seed(7, Stream::Dropout, 1)
        );
        assert_eq!(
            derive_seed(7, Stream::Init, 3),
            derive_seed(7, Stream::Init, 3)
        );
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig {
                dropout: 1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                lambda2: -1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                folds: 1,
                ..TrainConfig::default()
            },
            TrainConfig {
                mi_bins: 1,
                ..TrainConfig::default()
            },
            TrainConfig {
                alpha: 2.0,
                ..TrainConfig::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn evaluate_rejects_empty_mask() {
        let ds = blobs(8);
        let (train, test) = split(ds.len());
        let config = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        let run = train_fold(&ds, &train, &test, &config).unwrap();
        assert!(evaluate(&run.model, &run.features, &run.graph, &ds.y, &[], 1).is_err());
        let m = evaluate(&run.model, &run.features, &run.graph, &ds.y, &test, 1).unwrap();
        assert_eq!(m, run.metrics(&ds.y, &test, 1));
    }
}
