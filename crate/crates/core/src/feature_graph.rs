//! Feature-graph scoring: per-feature Fisher and mutual-information scores,
//! their convex combination, the rank-one feature adjacency `S = s sᵀ`, the
//! damped energy matrix `C = (I − rS)⁻¹ − I` with `r = 0.9 / ρ(S)`, and the
//! relevance ranking `c̃ = C e` used to pick the top-k features.

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};

/// Guard added to the Fisher denominator for zero-variance features.
pub const FISHER_EPSILON: f64 = 1e-12;
/// Damping numerator: `r = DAMPING / ρ(S)`.
pub const DAMPING: f64 = 0.9;

/// Per-class mean and population standard deviation of every feature.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    /// The two class labels, ascending.
    pub classes: [usize; 2],
    pub counts: [usize; 2],
    /// `means[g][i]` is the mean of feature `i` over class `g`.
    pub means: [Vec<f64>; 2],
    pub stds: [Vec<f64>; 2],
}

impl ClassStats {
    pub fn compute(x: &Matrix, y: &[usize]) -> Result<Self> {
        check_rows(x, y)?;
        let classes = binary_classes(y)?;
        let d = x.cols();
        let mut counts = [0usize; 2];
        let mut sums = [vec![0.0; d], vec![0.0; d]];
        for (i, &label) in y.iter().enumerate() {
            let g = usize::from(label == classes[1]);
            counts[g] += 1;
            for (acc, v) in sums[g].iter_mut().zip(x.row(i)) {
                *acc += v;
            }
        }
        let means = [
            sums[0]
                .iter()
                .map(|s| s / counts[0] as f64)
                .collect::<Vec<_>>(),
            sums[1]
                .iter()
                .map(|s| s / counts[1] as f64)
                .collect::<Vec<_>>(),
        ];
        let mut sq = [vec![0.0; d], vec![0.0; d]];
        for (i, &label) in y.iter().enumerate() {
            let g = usize::from(label == classes[1]);
            for ((acc, v), mu) in sq[g].iter_mut().zip(x.row(i)).zip(&means[g]) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let stds = [
            sq[0]
                .iter()
                .map(|s| (s / counts[0] as f64).sqrt())
                .collect(),
            sq[1]
                .iter()
                .map(|s| (s / counts[1] as f64).sqrt())
                .collect(),
        ];
        Ok(Self {
            classes,
            counts,
            means,
            stds,
        })
    }
}

fn check_rows(x: &Matrix, y: &[usize]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            op: "labels",
            left: x.shape(),
            right: (y.len(), 1),
        });
    }
    Ok(())
}

/// The two distinct labels in `y`, ascending.
pub(crate) fn binary_classes(y: &[usize]) -> Result<[usize; 2]> {
    let mut distinct: Vec<usize> = y.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    match distinct.as_slice() {
        [a, b] => Ok([*a, *b]),
        [] => Err(Error::EmptyClass { class: 0 }),
        _ => Err(Error::ClassCount {
            found: distinct.len(),
        }),
    }
}

/// Fisher criterion per feature: `|u₁ − u₂|² / (σ₁² + σ₂² + ε)`.
pub fn fisher_scores(x: &Matrix, y: &[usize]) -> Result<Vec<f64>> {
    let stats = ClassStats::compute(x, y)?;
    Ok((0..x.cols())
        .map(|i| {
            let gap = stats.means[0][i] - stats.means[1][i];
            let spread = stats.stds[0][i].powi(2) + stats.stds[1][i].powi(2);
            gap * gap / (spread + FISHER_EPSILON)
        })
        .collect())
}

/// Equal-width bin index of every value in `column` over its observed range.
/// A constant column maps to bin 0.
pub fn equal_width_bins(column: &[f64], bins: usize) -> Vec<usize> {
    let (lo, hi) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let width = hi - lo;
    column
        .iter()
        .map(|&v| {
            if width <= 0.0 {
                0
            } else {
                (((v - lo) / width * bins as f64) as usize).min(bins - 1)
            }
        })
        .collect()
}

/// Mutual information (natural log) between each binned feature and the label.
///
/// With `normalize`, each score is divided by the joint entropy `H(Z, Y)`
/// (scores stay 0 when the joint entropy is 0).
pub fn mutual_information_scores(
    x: &Matrix,
    y: &[usize],
    bins: usize,
    normalize: bool,
) -> Result<Vec<f64>> {
    check_rows(x, y)?;
    if x.rows() == 0 {
        return Err(Error::EmptyMask {
            op: "mutual_information_scores",
        });
    }
    if bins < 2 {
        return Err(Error::invalid(
            "bins",
            format!("need at least 2, got {bins}"),
        ));
    }
    let n = x.rows();
    let n_classes = y.iter().max().map_or(0, |m| m + 1);
    let mut label_counts = vec![0usize; n_classes];
    for &label in y {
        label_counts[label] += 1;
    }
    let mut column = vec![0.0; n];
    let mut joint = vec![0usize; bins * n_classes];
    let mut bin_counts = vec![0usize; bins];
    let mut scores = Vec::with_capacity(x.cols());
    for f in 0..x.cols() {
        for (i, c) in column.iter_mut().enumerate() {
            *c = x[(i, f)];
        }
        joint.iter_mut().for_each(|c| *c = 0);
        bin_counts.iter_mut().for_each(|c| *c = 0);
        for (&b, &label) in equal_width_bins(&column, bins).iter().zip(y) {
            joint[b * n_classes + label] += 1;
            bin_counts[b] += 1;
        }
        let total = n as f64;
        let mut mi = 0.0;
        let mut joint_entropy = 0.0;
        for b in 0..bins {
            for (label, &label_count) in label_counts.iter().enumerate() {
                let count = joint[b * n_classes + label];
                if count == 0 {
                    continue;
                }
                let p_joint = count as f64 / total;
                let p_z = bin_counts[b] as f64 / total;
                let p_y = label_count as f64 / total;
                mi += p_joint * (p_joint / (p_z * p_y)).ln();
                joint_entropy -= p_joint * p_joint.ln();
            }
        }
        // Round-off can leave tiny negatives for independent features.
        let mi = mi.max(0.0);
        scores.push(if normalize && joint_entropy > 0.0 {
            mi / joint_entropy
        } else {
            mi
        });
    }
    Ok(scores)
}

/// Min-max rescaling to `[0, 1]`. A constant vector maps to all ones when
/// its value is positive and to all zeros otherwise.
pub fn min_max_rescale(v: &[f64]) -> Vec<f64> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let range = hi - lo;
    v.iter()
        .map(|&x| {
            if range > 0.0 {
                (x - lo) / range
            } else if hi > 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// `sᵢ = α·wᵢ + (1 − α)·mᵢ`, optionally after min-max rescaling each factor.
pub fn combine_scores(w: &[f64], m: &[f64], alpha: f64, rescale: bool) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(
            "alpha",
            format!("{alpha} is outside [0, 1]"),
        ));
    }
    if w.len() != m.len() {
        return Err(Error::DimensionMismatch {
            op: "combine_scores",
            left: (w.len(), 1),
            right: (m.len(), 1),
        });
    }
    let (w, m) = if rescale {
        (min_max_rescale(w), min_max_rescale(m))
    } else {
        (w.to_vec(), m.to_vec())
    };
    Ok(w.iter()
        .zip(&m)
        .map(|(wi, mi)| wi * alpha + mi * (1.0 - alpha))
        .collect())
}

/// Rank-one feature adjacency `S(i, j) = sᵢ sⱼ`.
pub fn feature_adjacency(s: &[f64]) -> Matrix {
    let d = s.len();
    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = s[i] * s[j];
        }
    }
    out
}

/// Damped energy matrix and the quantities it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Energy {
    pub rho: f64,
    pub r: f64,
    pub c: Matrix,
}

/// General path: solves `(I − rS) Z = I` and returns `C = Z − I`.
pub fn energy_matrix(s_adj: &Matrix) -> Result<Energy> {
    if !s_adj.is_square() {
        return Err(Error::NotSquare {
            op: "energy_matrix",
            rows: s_adj.rows(),
            cols: s_adj.cols(),
        });
    }
    let rho = matrix::spectral_radius(
        s_adj,
        matrix::POWER_ITERATION_MAX_ITERS,
        matrix::POWER_ITERATION_TOL,
    )?;
    if rho <= 0.0 {
        return Err(Error::NoInformativeFeatures);
    }
    let r = DAMPING / rho;
    let d = s_adj.rows();
    let eye = Matrix::identity(d);
    let system = eye.add_scaled(s_adj, -r)?;
    let z = matrix::solve(&system, &eye)?;
    let c = z.sub(&eye)?;
    Ok(Energy { rho, r, c })
}

/// Closed form for `S = s sᵀ`: `C = r s sᵀ / (1 − r‖s‖²) = 9 s sᵀ / ‖s‖²`.
pub fn energy_matrix_rank_one(s: &[f64]) -> Result<Energy> {
    let rho = matrix::dot(s, s);
    if rho <= 0.0 {
        return Err(Error::NoInformativeFeatures);
    }
    let r = DAMPING / rho;
    let factor = r / (1.0 - r * rho);
    let c = feature_adjacency(s).scale(factor);
    Ok(Energy { rho, r, c })
}

/// Row sums of `C`, i.e. `C e`.
pub fn relevance_scores(c: &Matrix) -> Result<Vec<f64>> {
    if !c.is_square() {
        return Err(Error::NotSquare {
            op: "relevance_scores",
            rows: c.rows(),
            cols: c.cols(),
        });
    }
    Ok(c.row_sums())
}

/// Indices of the `k` largest scores, descending; ties go to the lower index.
pub fn select_top_k(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > scores.len() {
        return Err(Error::invalid(
            "k",
            format!("{k} is outside 1..={}", scores.len()),
        ));
    }
    let mut order = rank_descending(scores);
    order.truncate(k);
    Ok(order)
}

/// Full descending ranking with index tie-break.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Options for [`FeatureGraph::fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringOptions {
    pub alpha: f64,
    pub mi_bins: usize,
    pub normalize_mi: bool,
    pub rescale: bool,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            mi_bins: 10,
            normalize_mi: false,
            rescale: true,
        }
    }
}

/// Everything the feature graph computes for one set of training rows.
#[derive(Debug, Clone)]
pub struct FeatureGraph {
    pub fisher: Vec<f64>,
    pub mutual_info: Vec<f64>,
    pub alpha: f64,
    pub combined: Vec<f64>,
    pub adjacency: Matrix,
    pub energy: Energy,
    pub relevance: Vec<f64>,
}

impl FeatureGraph {
    /// Scores every column of `x` against binary labels `y`.
    ///
    /// The energy matrix uses the rank-one closed form, which is exact for
    /// `S = s sᵀ` and avoids a d×d solve on wide tables.
    pub fn fit(x: &Matrix, y: &[usize], options: &ScoringOptions) -> Result<Self> {
        let fisher = fisher_scores(x, y)?;
        let mutual_info = mutual_information_scores(x, y, options.mi_bins, options.normalize_mi)?;
        let combined = combine_scores(&fisher, &mutual_info, options.alpha, options.rescale)?;
        let adjacency = feature_adjacency(&combined);
        let energy = energy_matrix_rank_one(&combined)?;
        let relevance = relevance_scores(&energy.c)?;
        Ok(Self {
            fisher,
            mutual_info,
            alpha: options.alpha,
            combined,
            adjacency,
            energy,
            relevance,
        })
    }

    pub fn top_k(&self, k: usize) -> Result<Vec<usize>> {
        select_top_k(&self.relevance, k)
    }

    /// Energy matrix restricted to `features`, recomputed from their scores.
    pub fn energy_for(&self, features: &[usize]) -> Result<Energy> {
        let s: Vec<f64> = features.iter().map(|&f| self.combined[f]).collect();
        energy_matrix_rank_one(&s)
    }
}
