//! Subject graph construction: fusing the energy matrix into subject
//! features, the Gaussian affinity `a_ij = exp(−θ‖hᵢ − hⱼ‖²)`, and KNN
//! sparsification into an unweighted symmetric adjacency.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};

/// How the previous epoch's energy matrix enters the fused features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlendMode {
    /// `H = X (C + λ₁ C_prev)`.
    #[default]
    Blend,
    /// `H = X C`; the previous energy matrix is ignored.
    CurrentOnly,
}

/// `H = X (C + λ₁ C_prev)`, or `H = X C` when there is no previous matrix.
pub fn fuse_features(
    x: &Matrix,
    c: &Matrix,
    c_prev: Option<&Matrix>,
    lambda1: f64,
) -> Result<Matrix> {
    if lambda1 < 0.0 || !lambda1.is_finite() {
        return Err(Error::invalid(
            "lambda1",
            format!("{lambda1} must be finite and >= 0"),
        ));
    }
    if !c.is_square() || x.cols() != c.rows() {
        return Err(Error::DimensionMismatch {
            op: "fuse_features",
            left: x.shape(),
            right: c.shape(),
        });
    }
    match c_prev {
        Some(prev) if lambda1 > 0.0 => {
            let weighting = c
                .add_scaled(prev, lambda1)
                .map_err(|_| Error::DimensionMismatch {
                    op: "fuse_features",
                    left: c.shape(),
                    right: prev.shape(),
                })?;
            x.matmul(&weighting)
        }
        Some(prev) if prev.shape() != c.shape() => Err(Error::DimensionMismatch {
            op: "fuse_features",
            left: c.shape(),
            right: prev.shape(),
        }),
        _ => x.matmul(c),
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "theta",
            format!("{theta} must be finite and > 0"),
        ))
    }
}

/// Gaussian affinity from precomputed squared distances.
pub fn affinity_from_distances(dist_sq: &Matrix, theta: f64) -> Result<Matrix> {
    check_theta(theta)?;
    Ok(dist_sq.map(|d| (-theta * d).exp()))
}

/// `a_ij = exp(−θ‖hᵢ − hⱼ‖²)`; symmetric with a unit diagonal.
pub fn pairwise_affinity(h: &Matrix, theta: f64) -> Result<Matrix> {
    affinity_from_distances(&matrix::pairwise_sq_euclidean(h), theta)
}

/// `1 / median` of the off-diagonal squared distances, or 1 when that
/// median is zero.
pub fn median_heuristic_theta(dist_sq: &Matrix) -> f64 {
    let n = dist_sq.rows();
    let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            values.push(dist_sq[(i, j)]);
        }
    }
    if values.is_empty() {
        return 1.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    let median = if values.len() % 2 == 0 {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    };
    if median > 0.0 && median.is_finite() {
        1.0 / median
    } else {
        1.0
    }
}

/// A retained undirected edge, `i < j`, with its affinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Union-symmetrized KNN selection. `closer(i, a, b)` orders candidate
/// neighbours `a`, `b` of node `i`, best first.
fn knn_select(
    n: usize,
    k: usize,
    closer: impl Fn(usize, usize, usize) -> Ordering,
) -> Result<Matrix> {
    if k == 0 || k >= n {
        return Err(Error::invalid(
            "k",
            format!("need 1 <= k < N, got k = {k} with N = {n}"),
        ));
    }
    let mut adjacency = Matrix::zeros(n, n);
    let mut candidates: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        candidates.clear();
        candidates.extend((0..n).filter(|&j| j != i));
        candidates.sort_by(|&a, &b| closer(i, a, b).then(a.cmp(&b)));
        for &j in &candidates[..k] {
            adjacency[(i, j)] = 1.0;
            adjacency[(j, i)] = 1.0;
        }
    }
    Ok(adjacency)
}

fn upper_edges(adjacency: &Matrix, weights: &Matrix) -> Vec<Edge> {
    let n = adjacency.rows();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacency[(i, j)] != 0.0 {
                edges.push(Edge {
                    i,
                    j,
                    weight: weights[(i, j)],
                });
            }
        }
    }
    edges
}

/// Keeps each node's `k` highest-affinity neighbours (self excluded, ties to
/// the lower index) and symmetrizes by union.
pub fn knn_sparsify(a: &Matrix, k: usize) -> Result<(Matrix, Vec<Edge>)> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op: "knn_sparsify",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let adjacency = knn_select(a.rows(), k, |i, p, q| a[(i, q)].total_cmp(&a[(i, p)]))?;
    let edges = upper_edges(&adjacency, a);
    Ok((adjacency, edges))
}

/// The subject graph of one epoch.
#[derive(Debug, Clone)]
pub struct SubjectGraph {
    pub affinity: Matrix,
    /// Unweighted symmetric KNN adjacency `A′`, zero diagonal.
    pub adjacency: Matrix,
    pub edges: Vec<Edge>,
    /// `‖hᵢ − hⱼ‖²` for each entry of `edges`.
    pub edge_dist_sq: Vec<f64>,
    pub theta: f64,
    pub k: usize,
}

impl SubjectGraph {
    /// Builds the affinity and KNN graph over the rows of `h`.
    ///
    /// Neighbours are ranked by squared distance, which orders them exactly
    /// as the affinity does but cannot tie through underflow to 0.
    pub fn build(h: &Matrix, theta: f64, k: usize) -> Result<Self> {
        let dist = matrix::pairwise_sq_euclidean(h);
        let affinity = affinity_from_distances(&dist, theta)?;
        let adjacency = knn_select(h.rows(), k, |i, p, q| dist[(i, p)].total_cmp(&dist[(i, q)]))?;
        let edges = upper_edges(&adjacency, &affinity);
        let edge_dist_sq = edges.iter().map(|e| dist[(e.i, e.j)]).collect();
        Ok(Self {
            affinity,
            adjacency,
            edges,
            edge_dist_sq,
            theta,
            k,
        })
    }

    /// Same topology, affinities recomputed for new features and `theta`.
    pub fn reweight(&self, h: &Matrix, theta: f64) -> Result<Self> {
        let dist = matrix::pairwise_sq_euclidean(h);
        if dist.shape() != self.adjacency.shape() {
            return Err(Error::DimensionMismatch {
                op: "reweight",
                left: self.adjacency.shape(),
                right: dist.shape(),
            });
        }
        let affinity = affinity_from_distances(&dist, theta)?;
        let edges = upper_edges(&self.adjacency, &affinity);
        let edge_dist_sq = edges.iter().map(|e| dist[(e.i, e.j)]).collect();
        Ok(Self {
            affinity,
            adjacency: self.adjacency.clone(),
            edges,
            edge_dist_sq,
            theta,
            k: self.k,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count())
            .map(|i| self.adjacency.row(i).iter().filter(|&&v| v != 0.0).count())
            .collect()
    }
}
