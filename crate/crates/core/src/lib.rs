//! Dynamic dual-graph fusion GCN for transductive binary classification of
//! tabular subject data.
//!
//! The pipeline scores features by Fisher score and mutual information,
//! turns the scores into a feature-graph energy matrix, fuses it into the
//! subject features, builds a KNN subject graph with a learnable Gaussian
//! kernel width, and trains a two-layer GCN on a cross-entropy plus
//! reward-weighted graph loss.
//!
//! ```no_run
//! use dualgraph::{cross_validate, synthesize, SynthSpec, TrainConfig};
//!
//! let data = synthesize(&SynthSpec { n_per_class: 100, d_total: 100, d_informative: 10, gap: 3.0, seed: 7 })?;
//! let report = cross_validate(&data, &TrainConfig::default())?;
//! println!("accuracy {:.3}", report.summary.acc.mean);
//! # Ok::<(), dualgraph::Error>(())
//! ```

pub mod cli;
pub mod cv;
pub mod dataio;
pub mod dynamic_graph;
pub mod error;
pub mod feature_graph;
pub mod gcn;
pub mod loss;
pub mod matrix;
pub mod metrics;
pub mod trainer;

pub use cv::{cross_validate, grid_search, stratified_folds, CvReport, GridReport};
pub use dataio::{load_csv, synthesize, CsvOptions, Dataset, SynthSpec};
pub use dynamic_graph::{BlendMode, Edge, SubjectGraph};
pub use error::{Error, Result};
pub use feature_graph::{FeatureGraph, ScoringOptions};
pub use gcn::GcnModel;
pub use matrix::Matrix;
pub use metrics::Metrics;
pub use trainer::{train_fold, OptimizerKind, TrainConfig};
