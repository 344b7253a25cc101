//! Stratified k-fold cross-validation and the λ₁ × λ₂ grid search.
//!
//! Folds and grid cells run in parallel; results are always collected in
//! (grid cell, fold) order so reports do not depend on scheduling.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{Metrics, Summary};
use crate::trainer::{self, rng_for, EpochRecord, Stream, TrainConfig};

/// λ₁ values swept by default: 10⁻¹ … 10⁻⁶.
pub const DEFAULT_LAMBDA1_GRID: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
/// λ₂ values swept by default: 0.2 … 1.0.
pub const DEFAULT_LAMBDA2_GRID: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

/// Test indices of each fold, ascending within a fold.
///
/// Each class is shuffled and the classes are concatenated, then dealt
/// round-robin with one running counter. Fold sizes differ by at most one
/// and each fold's class counts are within one of the global ratio.
pub fn stratified_folds(y: &[usize], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::invalid("folds", "must be at least 2"));
    }
    if y.len() < folds {
        return Err(Error::invalid(
            "folds",
            format!(
                "{folds} folds need at least {folds} samples, got {}",
                y.len()
            ),
        ));
    }
    let classes = y.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &label) in y.iter().enumerate() {
        by_class[label].push(i);
    }
    let mut rng = rng_for(seed, Stream::Folds, 0);
    let mut out = vec![Vec::new(); folds];
    let mut slot = 0;
    for (class, members) in by_class.iter_mut().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < folds {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for &i in members.iter() {
            out[slot % folds].push(i);
            slot += 1;
        }
    }
    for fold in &mut out {
        fold.sort_unstable();
    }
    Ok(out)
}

/// Training indices for `fold`: everything not in its test set.
pub fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut in_test = vec![false; n];
    for &i in test {
        in_test[i] = true;
    }
    (0..n).filter(|&i| !in_test[i]).collect()
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub test: Vec<usize>,
    pub metrics: Metrics,
    pub history: Vec<EpochRecord>,
    pub selected_features: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub summary: Summary,
}

impl CvReport {
    pub fn mean_accuracy(&self) -> f64 {
        self.summary.acc.mean
    }
}

pub fn cross_validate(dataset: &Dataset, config: &TrainConfig) -> Result<CvReport> {
    config.validate()?;
    let partition = stratified_folds(&dataset.y, config.folds, config.seed)?;
    let n = dataset.len();
    let results: Vec<Result<FoldResult>> = partition
        .par_iter()
        .enumerate()
        .map(|(fold, test)| {
            let train = complement(n, test);
            let run = trainer::train_fold(dataset, &train, test, config)?;
            Ok(FoldResult {
                fold,
                test: test.clone(),
                metrics: run.metrics(&dataset.y, test, config.positive_class),
                history: run.history,
                selected_features: run.prepared.selected,
            })
        })
        .collect();
    let folds = results.into_iter().collect::<Result<Vec<_>>>()?;
    let metrics: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
    let summary = Summary::of(&metrics).expect("at least two folds");
    Ok(CvReport { folds, summary })
}

#[derive(Debug, Clone)]
pub struct GridCell {
    pub lambda1: f64,
    pub lambda2: f64,
    pub report: CvReport,
}

#[derive(Debug, Clone)]
pub struct GridReport {
    /// λ₁-major: cell `a * |λ₂ grid| + b` holds `(λ₁[a], λ₂[b])`.
    pub cells: Vec<GridCell>,
    pub best: usize,
}

impl GridReport {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }

    /// Max minus min of the mean accuracies over the surface.
    pub fn accuracy_spread(&self) -> f64 {
        let accs = self.cells.iter().map(|c| c.report.mean_accuracy());
        let (lo, hi) = accs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
            (lo.min(a), hi.max(a))
        });
        hi - lo
    }
}

/// Index of the best cell: highest mean accuracy, then smaller λ₂, then
/// smaller λ₁.
pub fn best_cell_index(cells: &[(f64, f64, f64)]) -> Option<usize> {
    (0..cells.len()).max_by(|&a, &b| {
        let (l1a, l2a, acc_a) = cells[a];
        let (l1b, l2b, acc_b) = cells[b];
        acc_a
            .total_cmp(&acc_b)
            .then(l2b.total_cmp(&l2a))
            .then(l1b.total_cmp(&l1a))
    })
}

pub fn grid_search(
    dataset: &Dataset,
    base: &TrainConfig,
    lambda1_grid: &[f64],
    lambda2_grid: &[f64],
) -> Result<GridReport> {
    if lambda1_grid.is_empty() || lambda2_grid.is_empty() {
        return Err(Error::invalid("grid", "lambda grids must be non-empty"));
    }
    let pairs: Vec<(f64, f64)> = lambda1_grid
        .iter()
        .flat_map(|&l1| lambda2_grid.iter().map(move |&l2| (l1, l2)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(lambda1, lambda2)| {
            let config = TrainConfig {
                lambda1,
                lambda2,
                ..base.clone()
            };
            Ok(GridCell {
                lambda1,
                lambda2,
                report: cross_validate(dataset, &config)?,
            })
        })
        .collect::<Vec<Result<GridCell>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let keys: Vec<(f64, f64, f64)> = cells
        .iter()
        .map(|c| (c.lambda1, c.lambda2, c.report.mean_accuracy()))
        .collect();
    let best = best_cell_index(&keys).expect("non-empty grid");
    Ok(GridReport { cells, best })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub const METRICS_HEADER: &str = "fold,tp,tn,fp,fn,acc,sen,spe,auc";

fn metrics_row(out: &mut String, prefix: &str, label: &str, m: &Metrics) {
    let _ = writeln!(
        out,
        "{prefix}{label},{},{},{},{},{},{},{},{}",
        m.tp,
        m.tn,
        m.fp,
        m.fn_,
        m.acc,
        opt(m.sen),
        opt(m.spe),
        opt(m.auc)
    );
}

fn summary_row(out: &mut String, prefix: &str, report: &CvReport) {
    let sum = |f: fn(&Metrics) -> usize| report.folds.iter().map(|r| f(&r.metrics)).sum::<usize>();
    let s = &report.summary;
    let _ = writeln!(
        out,
        "{prefix}mean,{},{},{},{},{},{},{},{}",
        sum(|m| m.tp),
        sum(|m| m.tn),
        sum(|m| m.fp),
        sum(|m| m.fn_),
        s.acc.mean,
        opt(s.sen.map(|a| a.mean)),
        opt(s.spe.map(|a| a.mean)),
        opt(s.auc.map(|a| a.mean))
    );
}

/// One row per fold plus a `mean` summary row (confusion counts summed).
pub fn metrics_csv(report: &CvReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{METRICS_HEADER}");
    for f in &report.folds {
        metrics_row(&mut out, "", &f.fold.to_string(), &f.metrics);
    }
    summary_row(&mut out, "", report);
    out
}

/// Per-fold and summary rows for every grid cell, prefixed by λ₁, λ₂.
pub fn grid_metrics_csv(grid: &GridReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "lambda1,lambda2,{METRICS_HEADER}");
    for cell in &grid.cells {
        let prefix = format!("{},{},", cell.lambda1, cell.lambda2);
        for f in &cell.report.folds {
            metrics_row(&mut out, &prefix, &f.fold.to_string(), &f.metrics);
        }
        summary_row(&mut out, &prefix, &cell.report);
    }
    out
}

pub const SURFACE_HEADER: &str = "lambda1,lambda2,acc_mean,acc_std,sen_mean,spe_mean,auc_mean";

/// One row per grid cell, for plotting accuracy against λ₁ and λ₂.
pub fn surface_csv(grid: &GridReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SURFACE_HEADER}");
    for cell in &grid.cells {
        let s = &cell.report.summary;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            cell.lambda1,
            cell.lambda2,
            s.acc.mean,
            s.acc.std,
            opt(s.sen.map(|a| a.mean)),
            opt(s.spe.map(|a| a.mean)),
            opt(s.auc.map(|a| a.mean))
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{synthesize, SynthSpec};

    #[test]
    fn fold_sizes_are_balanced() {
        let y: Vec<usize> = (0..103).map(|i| usize::from(i % 2 == 0)).collect();
        let folds = stratified_folds(&y, 5, 1).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![21, 21, 21, 20, 20]);
    }

    #[test]
    fn folds_partition_and_stratify() {
        let y: Vec<usize> = (0..97).map(|i| usize::from(i % 3 == 0)).collect();
        let folds = stratified_folds(&y, 5, 42).unwrap();
        let mut seen = vec![0; 97];
        for f in &folds {
            for &i in f {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        let ratio = y.iter().filter(|&&l| l == 1).count() as f64 / 97.0;
        for f in &folds {
            let pos = f.iter().filter(|&&i| y[i] == 1).count() as f64;
            assert!((pos - ratio * f.len() as f64).abs() <= 1.0);
        }
        assert_eq!(folds, stratified_folds(&y, 5, 42).unwrap());
    }

    #[test]
    fn folds_reject_tiny_classes() {
        let y = [0, 0, 0, 0, 0, 0, 1, 1];
        assert!(matches!(
            stratified_folds(&y, 5, 0),
            Err(Error::ClassTooSmall {
                class: 1,
                count: 2,
                folds: 5
            })
        ));
        assert!(stratified_folds(&[0, 1], 5, 0).is_err());
    }

    #[test]
    fn tie_rules_prefer_small_lambdas() {
        let cells = [
            (1e-1, 0.4, 0.9),
            (1e-2, 0.2, 0.9),
            (1e-3, 0.2, 0.9),
            (1e-4, 1.0, 0.8),
        ];
        assert_eq!(best_cell_index(&cells), Some(2));
        let cells = [(1e-1, 0.4, 0.9), (1e-2, 0.2, 0.91)];
        assert_eq!(best_cell_index(&cells), Some(1));
    }

    #[test]
    fn single_cell_grid_equals_cross_validation() {
        let ds = synthesize(&SynthSpec {
            n_per_class: 20,
            d_total: 8,
            d_informative: 3,
            gap: 3.0,
            seed: 1,
        })
        .unwrap();
        let config = TrainConfig {
            epochs: 5,
            knn_k: 4,
            ..TrainConfig::default()
        };
        let grid = grid_search(&ds, &config, &[1e-3], &[0.6]).unwrap();
        assert_eq!(grid.cells.len(), 1);
        let direct = cross_validate(
            &ds,
            &TrainConfig {
                lambda1: 1e-3,
                lambda2: 0.6,
                ..config
            },
        )
        .unwrap();
        assert_eq!(metrics_csv(&grid.cells[0].report), metrics_csv(&direct));
        assert!(grid_search(&ds, &TrainConfig::default(), &[], &[0.2]).is_err());
    }

    #[test]
    fn report_layout() {
        let ds = synthesize(&SynthSpec {
            n_per_class: 15,
            d_total: 6,
            d_informative: 2,
            gap: 3.0,
            seed: 2,
        })
        .unwrap();
        let config = TrainConfig {
            epochs: 4,
            knn_k: 3,
            ..TrainConfig::default()
        };
        let report = cross_validate(&ds, &config).unwrap();
        let csv = metrics_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 5 + 1);
        assert_eq!(lines[0], METRICS_HEADER);
        assert!(lines[6].starts_with("mean,"));
        let covered: usize = report.folds.iter().map(|f| f.metrics.total()).sum();
        assert_eq!(covered, ds.len());
    }
}
