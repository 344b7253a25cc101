//! Composite objective: masked cross-entropy, the reward `δᵢ = E(a) − aᵢ`,
//! the reward-weighted graph loss `Σ δᵢ ln a_ij`, and
//! `L = L_ce + λ₂ L_graph`.

use crate::dynamic_graph::Edge;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Probabilities and affinities are floored here before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;
/// Default momentum of the running accuracy `E(a)`.
pub const REWARD_MOMENTUM: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    #[default]
    Mean,
    Sum,
}

/// Cross-entropy over the rows in `mask`, and its gradient at the logits.
///
/// The gradient is `(probs − onehot)` on masked rows (divided by `|mask|`
/// under [`Reduction::Mean`]) and zero elsewhere.
pub fn cross_entropy(
    probs: &Matrix,
    labels: &[usize],
    mask: &[usize],
    reduction: Reduction,
) -> Result<(f64, Matrix)> {
    if mask.is_empty() {
        return Err(Error::EmptyMask {
            op: "cross_entropy",
        });
    }
    if labels.len() != probs.rows() {
        return Err(Error::DimensionMismatch {
            op: "cross_entropy",
            left: probs.shape(),
            right: (labels.len(), 1),
        });
    }
    let scale = match reduction {
        Reduction::Mean => 1.0 / mask.len() as f64,
        Reduction::Sum => 1.0,
    };
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(probs.rows(), probs.cols());
    for &i in mask {
        let label = labels[i];
        loss -= probs[(i, label)].max(LOG_FLOOR).ln();
        for (g, &p) in grad.row_mut(i).iter_mut().zip(probs.row(i)) {
            *g = p * scale;
        }
        grad[(i, label)] -= scale;
    }
    Ok((loss * scale, grad))
}

/// `E(a) − a` for one node.
pub fn reward(expected_accuracy: f64, correct: bool) -> f64 {
    expected_accuracy - if correct { 1.0 } else { 0.0 }
}

/// Running accuracy and the per-node rewards derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardState {
    /// `None` until the first update, which seeds it with that epoch's accuracy.
    pub expected_accuracy: Option<f64>,
    pub momentum: f64,
    pub delta: Vec<f64>,
}

impl RewardState {
    pub fn new(nodes: usize, momentum: f64) -> Self {
        Self {
            expected_accuracy: None,
            momentum,
            delta: vec![0.0; nodes],
        }
    }

    /// Updates `E(a)` with this epoch's masked accuracy, then sets
    /// `δᵢ = E(a) − aᵢ` on masked nodes and `δᵢ = 0` elsewhere.
    /// Returns the masked accuracy.
    pub fn update(&mut self, predictions: &[usize], labels: &[usize], mask: &[usize]) -> f64 {
        let correct = mask
            .iter()
            .filter(|&&i| predictions[i] == labels[i])
            .count();
        let accuracy = if mask.is_empty() {
            0.0
        } else {
            correct as f64 / mask.len() as f64
        };
        let expected = match self.expected_accuracy {
            None => accuracy,
            Some(prev) => self.momentum * prev + (1.0 - self.momentum) * accuracy,
        };
        self.expected_accuracy = Some(expected);
        self.delta.clear();
        self.delta.resize(predictions.len(), 0.0);
        for &i in mask {
            self.delta[i] = reward(expected, predictions[i] == labels[i]);
        }
        accuracy
    }
}

/// `Σ_l Σ_i Σ_{j:(i,j)∈E} δᵢ ln a_ij` with both directed slots of every
/// undirected edge and the same graph in each of `layers` layers.
pub fn graph_loss(edges: &[Edge], delta: &[f64], layers: usize) -> f64 {
    let single: f64 = edges
        .iter()
        .map(|e| {
            let log_a = e.weight.max(LOG_FLOOR).ln();
            (delta[e.i] + delta[e.j]) * log_a
        })
        .sum();
    layers as f64 * single
}

/// `∂L_graph/∂a` for one directed slot `(source → target)`, holding the
/// other slot's weight fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotGradient {
    pub source: usize,
    pub target: usize,
    pub value: f64,
}

/// Per-slot weight gradients `layers · δ_source / a`. Zero where the log
/// floor is active.
pub fn graph_loss_slot_gradients(
    edges: &[Edge],
    delta: &[f64],
    layers: usize,
) -> Vec<SlotGradient> {
    let mut out = Vec::with_capacity(edges.len() * 2);
    for e in edges {
        for (source, target) in [(e.i, e.j), (e.j, e.i)] {
            let value = if e.weight > LOG_FLOOR {
                layers as f64 * delta[source] / e.weight
            } else {
                0.0
            };
            out.push(SlotGradient {
                source,
                target,
                value,
            });
        }
    }
    out
}

pub fn total_loss(l_ce: f64, l_graph: f64, lambda2: f64) -> f64 {
    l_ce + lambda2 * l_graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcn::row_softmax;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cross_entropy_cases() {
        let probs = Matrix::from_rows(&[[0.0, 1.0], [0.5, 0.5]]);
        let (l, _) = cross_entropy(&probs, &[1, 0], &[0], Reduction::Mean).unwrap();
        assert_eq!(l, 0.0);
        let (l, _) = cross_entropy(&probs, &[1, 0], &[1], Reduction::Mean).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        let (l, g) = cross_entropy(&probs, &[1, 0], &[0, 1], Reduction::Sum).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(g.row(1), &[-0.5, 0.5]);
        assert!(cross_entropy(&probs, &[1, 0], &[], Reduction::Mean).is_err());
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let logits = Matrix::from_vec(
            10,
            3,
            (0..30).map(|_| rng.random_range(-2.0..2.0)).collect(),
        )
        .unwrap();
        let labels: Vec<usize> = (0..10).map(|i| i % 3).collect();
        let mask = [0, 2, 3, 5, 8, 9];
        let loss_at = |z: &Matrix| {
            cross_entropy(&row_softmax(z), &labels, &mask, Reduction::Mean)
                .unwrap()
                .0
        };
        let (_, grad) =
            cross_entropy(&row_softmax(&logits), &labels, &mask, Reduction::Mean).unwrap();
        let h = 1e-5;
        for idx in 0..30 {
            let mut plus = logits.clone();
            plus.as_mut_slice()[idx] += h;
            let mut minus = logits.clone();
            minus.as_mut_slice()[idx] -= h;
            let fd = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
            assert!((fd - grad.as_slice()[idx]).abs() < 1e-6, "{idx}: {fd}");
        }
    }

    #[test]
    fn reward_cases() {
        let mut state = RewardState {
            expected_accuracy: Some(0.8),
            momentum: 1.0,
            delta: vec![],
        };
        state.update(&[1, 0], &[1, 1], &[0, 1]);
        assert!((state.delta[0] + 0.2).abs() < 1e-15);
        assert!((state.delta[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn reward_masks_and_seeds() {
        let mut state = RewardState::new(4, REWARD_MOMENTUM);
        let acc = state.update(&[0, 1, 1, 0], &[0, 1, 0, 1], &[0, 1, 2]);
        assert!((acc - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(state.expected_accuracy, Some(acc));
        assert_eq!(state.delta[3], 0.0);
    }

    #[test]
    fn reward_fixed_point() {
        let mut state = RewardState::new(3, REWARD_MOMENTUM);
        state.update(&[0, 0, 0], &[0, 1, 1], &[0, 1, 2]);
        for _ in 0..400 {
            state.update(&[0, 1, 1], &[0, 1, 1], &[0, 1, 2]);
        }
        assert!((state.expected_accuracy.unwrap() - 1.0).abs() < 1e-12);
        assert!(state.delta.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn graph_loss_cases() {
        let edges = [Edge {
            i: 0,
            j: 1,
            weight: (-1.0f64).exp(),
        }];
        assert_eq!(graph_loss(&edges, &[0.0, 0.0], 2), 0.0);
        assert!((graph_loss(&edges, &[-0.2, 0.0], 2) - 0.4).abs() < 1e-15);
        let floored = [Edge {
            i: 0,
            j: 1,
            weight: 0.0,
        }];
        assert!((graph_loss(&floored, &[1.0, 0.0], 1) - LOG_FLOOR.ln()).abs() < 1e-12);
    }

    #[test]
    fn graph_loss_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let n = 9;
        let mut weights = Matrix::zeros(n, n);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(0.4) {
                    let w = rng.random_range(0.01..1.0);
                    weights[(i, j)] = w;
                    weights[(j, i)] = w;
                    edges.push(Edge { i, j, weight: w });
                }
            }
        }
        let delta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut oracle = 0.0;
        for _layer in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    if weights[(i, j)] > 0.0 {
                        oracle += delta[i] * weights[(i, j)].ln();
                    }
                }
            }
        }
        assert!((graph_loss(&edges, &delta, 2) - oracle).abs() < 1e-12);
    }

    #[test]
    fn slot_gradients_follow_reward_sign() {
        let edges = [
            Edge {
                i: 0,
                j: 1,
                weight: 0.5,
            },
            Edge {
                i: 1,
                j: 2,
                weight: 0.25,
            },
        ];
        let delta = [-0.2, 0.8, 0.0];
        let grads = graph_loss_slot_gradients(&edges, &delta, 2);
        assert_eq!(grads.len(), 4);
        assert!((grads[0].value + 0.8).abs() < 1e-15);
        assert!((grads[1].value - 3.2).abs() < 1e-15);
        assert_eq!(grads[3].value, 0.0);
    }

    #[test]
    fn total_loss_cases() {
        assert_eq!(total_loss(0.5, 0.4, 0.0), 0.5);
        assert!((total_loss(0.5, 0.4, 1.0) - 0.9).abs() < 1e-15);
        assert!((total_loss(0.5, 0.4, 0.8) - 0.82).abs() < 1e-15);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #[test]
            fn rewards_bounded_and_signed(
                preds in prop::collection::vec(0usize..2, 1..30),
                seed in any::<u64>(),
                epochs in 1usize..6,
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let labels: Vec<usize> = preds.iter().map(|_| rng.random_range(0..2)).collect();
                let mask: Vec<usize> = (0..preds.len()).collect();
                let mut state = RewardState::new(preds.len(), REWARD_MOMENTUM);
                for _ in 0..epochs {
                    state.update(&preds, &labels, &mask);
                    let e = state.expected_accuracy.unwrap();
                    for (i, &d) in state.delta.iter().enumerate() {
                        prop_assert!((-1.0..=1.0).contains(&d));
                        if e > 0.0 && e < 1.0 {
                            prop_assert_eq!(d < 0.0, preds[i] == labels[i]);
                        }
                    }
                }
            }

            #[test]
            fn total_affine_in_lambda2(ce in 0.0f64..5.0, g in -5.0f64..5.0, l in 0.0f64..2.0) {
                let slope = total_loss(ce, g, l + 1.0) - total_loss(ce, g, l);
                prop_assert!((slope - g).abs() < 1e-12);
            }

            #[test]
            fn cross_entropy_nonnegative(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let logits = Matrix::from_vec(6, 2, (0..12).map(|_| rng.random_range(-30.0..30.0)).collect()).unwrap();
                let (l, _) = cross_entropy(&row_softmax(&logits), &[0, 1, 0, 1, 1, 0], &[0, 1, 2, 3, 4, 5], Reduction::Mean).unwrap();
                prop_assert!(l >= 0.0);
            }
        }
    }
}
