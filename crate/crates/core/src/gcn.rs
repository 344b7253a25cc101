//! Two-layer graph convolution over the normalized subject graph.
//!
//! ```text
//! Â      = D̃^{-1/2} (A′ + I) D̃^{-1/2}
//! Z1     = Â H0 W1
//! H1     = dropout(relu(Z1))
//! logits = Â H1 W2
//! probs  = softmax(logits)   (per row)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamic_graph::Edge;
use crate::error::{Error, Result};
use crate::loss::LOG_FLOOR;
use crate::matrix::{self, Matrix};

/// `D̃^{-1/2} (A′ + I) D̃^{-1/2}`.
pub fn normalize_adjacency(a_prime: &Matrix) -> Result<Matrix> {
    if !a_prime.is_square() {
        return Err(Error::NotSquare {
            op: "normalize_adjacency",
            rows: a_prime.rows(),
            cols: a_prime.cols(),
        });
    }
    if !a_prime.is_symmetric(0.0) {
        return Err(Error::Asymmetric {
            op: "normalize_adjacency",
        });
    }
    let n = a_prime.rows();
    let mut with_loops = a_prime.clone();
    for i in 0..n {
        with_loops[(i, i)] += 1.0;
    }
    let inv_sqrt: Vec<f64> = with_loops
        .row_sums()
        .into_iter()
        .map(|d| 1.0 / d.sqrt())
        .collect();
    let mut out = with_loops;
    for i in 0..n {
        for j in 0..n {
            if out[(i, j)] != 0.0 {
                out[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
            }
        }
    }
    Ok(out)
}

/// Row-wise softmax with per-row max subtraction.
pub fn row_softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

pub fn argmax_rows(m: &Matrix) -> Vec<usize> {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &v)| {
                    if v > best.1 {
                        (j, v)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}

/// Trainable parameters. The kernel width is stored as `τ` with `θ = exp(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    pub w1: Matrix,
    pub w2: Matrix,
    pub tau: f64,
    pub dropout: f64,
}

impl GcnModel {
    /// Glorot-uniform weights, `±sqrt(6 / (fan_in + fan_out))`.
    pub fn init(
        input_dim: usize,
        hidden_dim: usize,
        classes: usize,
        dropout: f64,
        theta: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::invalid(
                "dropout",
                format!("{dropout} is outside [0, 1)"),
            ));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::invalid(
                "theta",
                format!("{theta} must be finite and > 0"),
            ));
        }
        let mut glorot = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            Matrix::from_vec(rows, cols, data).expect("sized buffer")
        };
        let w1 = glorot(input_dim, hidden_dim);
        let w2 = glorot(hidden_dim, classes);
        Ok(Self {
            w1,
            w2,
            tau: theta.ln(),
            dropout,
        })
    }

    pub fn theta(&self) -> f64 {
        self.tau.exp()
    }

    pub fn input_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn classes(&self) -> usize {
        self.w2.cols()
    }

    /// Weights finite and the kernel width finite and positive.
    pub fn is_finite(&self) -> bool {
        let theta = self.theta();
        self.w1.is_finite() && self.w2.is_finite() && theta.is_finite() && theta > 0.0
    }
}

/// Intermediates of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub a_hat: Matrix,
    pub h0: Matrix,
    /// `Â H0`.
    pub propagated_input: Matrix,
    pub z1_pre: Matrix,
    pub h1: Matrix,
    /// `Â H1`.
    pub propagated_hidden: Matrix,
    pub logits: Matrix,
    pub probs: Matrix,
    /// Binary keep mask (all ones when dropout is inactive).
    pub dropout_mask: Matrix,
    /// Scale applied to kept units: `1 / (1 − p)` in training, else 1.
    pub dropout_scale: f64,
}

impl ForwardTrace {
    pub fn predictions(&self) -> Vec<usize> {
        argmax_rows(&self.probs)
    }
}

pub fn gcn_forward(
    a_hat: &Matrix,
    h0: &Matrix,
    model: &GcnModel,
    training: bool,
    seed: u64,
) -> Result<ForwardTrace> {
    if a_hat.rows() != h0.rows() || !a_hat.is_square() {
        return Err(Error::DimensionMismatch {
            op: "gcn_forward",
            left: a_hat.shape(),
            right: h0.shape(),
        });
    }
    let propagated_input = matrix::matmul(a_hat, h0)?;
    let z1_pre = matrix::matmul(&propagated_input, &model.w1)?;
    let activated = matrix::relu(&z1_pre);
    let (dropout_mask, dropout_scale) = if training && model.dropout > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keep = 1.0 - model.dropout;
        let data = (0..activated.rows() * activated.cols())
            .map(|_| if rng.random_bool(keep) { 1.0 } else { 0.0 })
            .collect();
        let mask = Matrix::from_vec(activated.rows(), activated.cols(), data)?;
        (mask, 1.0 / keep)
    } else {
        (Matrix::filled(activated.rows(), activated.cols(), 1.0), 1.0)
    };
    let h1 = activated.hadamard(&dropout_mask)?.scale(dropout_scale);
    let propagated_hidden = matrix::matmul(a_hat, &h1)?;
    let logits = matrix::matmul(&propagated_hidden, &model.w2)?;
    let probs = row_softmax(&logits);
    Ok(ForwardTrace {
        a_hat: a_hat.clone(),
        h0: h0.clone(),
        propagated_input,
        z1_pre,
        h1,
        propagated_hidden,
        logits,
        probs,
        dropout_mask,
        dropout_scale,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Matrix,
    pub w2: Matrix,
}

/// Reverse-mode gradients of a loss with respect to `W1` and `W2`, given
/// its gradient at the logits.
pub fn gcn_backward(
    trace: &ForwardTrace,
    grad_logits: &Matrix,
    model: &GcnModel,
) -> Result<Gradients> {
    if grad_logits.shape() != trace.logits.shape()
        || model.w1.shape() != (trace.h0.cols(), trace.z1_pre.cols())
        || model.w2.shape() != (trace.h1.cols(), trace.logits.cols())
    {
        return Err(Error::DimensionMismatch {
            op: "gcn_backward",
            left: trace.logits.shape(),
            right: grad_logits.shape(),
        });
    }
    let w2 = matrix::matmul_tn(&trace.propagated_hidden, grad_logits)?;
    let grad_propagated_hidden = matrix::matmul(grad_logits, &model.w2.transpose())?;
    let grad_h1 = matrix::matmul_tn(&trace.a_hat, &grad_propagated_hidden)?;
    let gate = matrix::relu_grad_mask(&trace.z1_pre)
        .hadamard(&trace.dropout_mask)?
        .scale(trace.dropout_scale);
    let grad_z1 = grad_h1.hadamard(&gate)?;
    let w1 = matrix::matmul_tn(&trace.propagated_input, &grad_z1)?;
    Ok(Gradients { w1, w2 })
}

/// Gradient of the graph loss with respect to `τ`, where `θ = exp(τ)`.
///
/// With `ln a_ij = −θ Δ²ᵢⱼ` this is `θ · L · Σ (δᵢ + δⱼ)(−Δ²ᵢⱼ)` over
/// retained edges whose affinity sits above the log floor.
pub fn theta_gradient(
    edges: &[Edge],
    dist_sq: &[f64],
    delta: &[f64],
    theta: f64,
    layers: usize,
) -> f64 {
    let sum: f64 = edges
        .iter()
        .zip(dist_sq)
        .filter(|(e, _)| e.weight > LOG_FLOOR)
        .map(|(e, &d)| (delta[e.i] + delta[e.j]) * -d)
        .sum();
    theta * layers as f64 * sum
}

const CHECKPOINT_HEADER: &str = "dualgraph-checkpoint";
const CHECKPOINT_VERSION: u32 = 1;

/// Text checkpoint. Every real is written with 17 significant digits, so a
/// save/load round trip is bit-exact.
pub fn write_checkpoint(model: &GcnModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_HEADER} {CHECKPOINT_VERSION}");
    let _ = writeln!(
        out,
        "dims {} {} {}",
        model.input_dim(),
        model.hidden_dim(),
        model.classes()
    );
    let _ = writeln!(out, "dropout_rate {:.16e}", model.dropout);
    let _ = writeln!(out, "tau {:.16e}", model.tau);
    for (name, m) in [("W1", &model.w1), ("W2", &model.w2)] {
        let _ = writeln!(out, "{name} {} {}", m.rows(), m.cols());
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

pub fn read_checkpoint(text: &str) -> Result<GcnModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Format {
            line: 0,
            message: format!("unexpected end of file, expected {what}"),
        })
    };
    let bad = |line: usize, message: String| Error::Format { line, message };
    let parse_f64 = |line: usize, s: &str| {
        s.parse::<f64>()
            .map_err(|_| bad(line, format!("`{s}` is not a number")))
    };
    let parse_usize = |line: usize, s: &str| {
        s.parse::<usize>()
            .map_err(|_| bad(line, format!("`{s}` is not a count")))
    };

    let (n, header) = next("header")?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(CHECKPOINT_HEADER) {
        return Err(bad(n, "missing checkpoint header".into()));
    }
    let version = parts.next().map(|v| parse_usize(n, v)).transpose()?;
    if version != Some(CHECKPOINT_VERSION as usize) {
        return Err(bad(n, format!("unsupported version {version:?}")));
    }

    let (n, dims) = next("dims")?;
    let fields: Vec<&str> = dims.split_whitespace().collect();
    let [key, d, h, c] = fields.as_slice() else {
        return Err(bad(n, "expected `dims <input> <hidden> <classes>`".into()));
    };
    if *key != "dims" {
        return Err(bad(n, "expected dims".into()));
    }
    let (d, h, c) = (parse_usize(n, d)?, parse_usize(n, h)?, parse_usize(n, c)?);

    let mut scalar = |name: &str| -> Result<f64> {
        let (n, line) = next(name)?;
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            [key, value] if *key == name => parse_f64(n, value),
            _ => Err(bad(n, format!("expected `{name} <value>`"))),
        }
    };
    let dropout = scalar("dropout_rate")?;
    let tau = scalar("tau")?;

    let mut read_matrix = |name: &str, rows: usize, cols: usize| -> Result<Matrix> {
        let (n, line) = next(name)?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != name {
            return Err(bad(n, format!("expected `{name} <rows> <cols>`")));
        }
        if (parse_usize(n, fields[1])?, parse_usize(n, fields[2])?) != (rows, cols) {
            return Err(bad(n, format!("{name} shape disagrees with dims")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (n, line) = next(name)?;
            let before = data.len();
            for v in line.split_whitespace() {
                data.push(parse_f64(n, v)?);
            }
            if data.len() - before != cols {
                return Err(bad(n, format!("{name} row has the wrong length")));
            }
        }
        Matrix::from_vec(rows, cols, data)
    };
    let w1 = read_matrix("W1", d, h)?;
    let w2 = read_matrix("W2", h, c)?;
    Ok(GcnModel {
        w1,
        w2,
        tau,
        dropout,
    })
}

pub fn save_checkpoint(model: &GcnModel, path: &Path) -> Result<()> {
    crate::dataio::write_atomic(path, write_checkpoint(model).as_bytes())
}

pub fn load_checkpoint(path: &Path) -> Result<GcnModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&text)
}
