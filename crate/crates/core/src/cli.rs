//! Command-line front end.
//!
//! Settings resolve as flag > config file > built-in default, and every run
//! records the resolved values with their source in `manifest.txt`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::cv::{self, DEFAULT_LAMBDA1_GRID, DEFAULT_LAMBDA2_GRID};
use crate::dataio::{self, ColumnMap, CsvOptions, Dataset, SynthSpec};
use crate::dynamic_graph::{self, BlendMode, SubjectGraph};
use crate::error::Error;
use crate::gcn;
use crate::loss::Reduction;
use crate::matrix;
use crate::trainer::{self, OptimizerKind, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_OUTPUT: i32 = 4;

const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  1  usage error (unknown or conflicting flags, bad config file)
  2  data error (unreadable or invalid input, invalid parameter values)
  3  numeric divergence during training
  4  output could not be written";

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "DUALGRAPH_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "dualgraph",
    version,
    about = "Dynamic dual-graph GCN for transductive classification of subject tables",
    after_help = EXIT_CODES_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a two-class Gaussian dataset as CSV.
    Synth(SynthArgs),
    /// Rank features by relevance and mark the selected top-k.
    SelectFeatures(DataCommand),
    /// Build the KNN subject graph and write its edge list.
    BuildGraph(BuildGraphArgs),
    /// Train one model and write its checkpoint and history.
    Train(TrainCommand),
    /// Stratified k-fold cross-validation.
    Cv(DataCommand),
    /// Cross-validate every (lambda1, lambda2) pair of a grid.
    GridSearch(GridArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = ".", global = true)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct Input {
    /// Input CSV (header row; one label column, optional id column, numeric features).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long, default_value = "id")]
    id_column: String,
    /// The input has no id column; subjects are numbered by row.
    #[arg(long)]
    no_id_column: bool,
    /// Header rename file, one `source = target` per line.
    #[arg(long)]
    column_map: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
struct TrainFlags {
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, visible_alias = "k")]
    top_k_features: Option<usize>,
    #[arg(long)]
    mi_bins: Option<usize>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rebuild_graph_every_epoch: Option<bool>,
    #[arg(long)]
    freeze_graph_after: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    normalize_mi: Option<bool>,
    #[arg(long)]
    rescale_scores: Option<bool>,
    /// mean | sum
    #[arg(long)]
    ce_reduction: Option<String>,
    /// blend (X (C + lambda1 C_prev)) | current (X C)
    #[arg(long)]
    eq10_mode: Option<String>,
    /// adam | sgd
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    positive_class: Option<usize>,
    #[arg(long)]
    reward_momentum: Option<f64>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100)]
    n_per_class: usize,
    #[arg(long, default_value_t = 100)]
    d_total: usize,
    #[arg(long, default_value_t = 10)]
    d_informative: usize,
    #[arg(long, default_value_t = 3.0)]
    gap: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Debug, Args)]
struct DataCommand {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Debug, Args)]
struct BuildGraphArgs {
    #[command(flatten)]
    data: DataCommand,
    /// Kernel width; defaults to 1 / median squared distance.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainCommand {
    #[command(flatten)]
    data: DataCommand,
    /// Hold out this fold of the stratified partition; otherwise train on all rows.
    #[arg(long)]
    holdout_fold: Option<usize>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[command(flatten)]
    data: DataCommand,
    /// Comma-separated lambda1 values.
    #[arg(long, value_delimiter = ',')]
    lambda1_grid: Vec<f64>,
    /// Comma-separated lambda2 values.
    #[arg(long, value_delimiter = ',')]
    lambda2_grid: Vec<f64>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn output(err: Error) -> Self {
        Self {
            code: EXIT_OUTPUT,
            message: err.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Divergence { .. } => EXIT_DIVERGENCE,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Parsed `key = value` config file. Keys accept `-` or `_`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "config line {}: expected `key = value`",
                    n + 1
                )));
            };
            let key = key.trim().replace('-', "_");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "config line {}: unknown key `{key}`",
                    n + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

const CONFIG_KEYS: &[&str] = &[
    "learning_rate",
    "epochs",
    "dropout",
    "weight_decay",
    "knn_k",
    "lambda1",
    "lambda2",
    "alpha",
    "top_k_features",
    "mi_bins",
    "hidden_dim",
    "seed",
    "rebuild_graph_every_epoch",
    "freeze_graph_after",
    "folds",
    "normalize_mi",
    "rescale_scores",
    "ce_reduction",
    "eq10_mode",
    "optimizer",
    "positive_class",
    "reward_momentum",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    File,
    Default,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Flag => "flag",
            Source::File => "config",
            Source::Default => "default",
        })
    }
}

/// A config with the provenance of every value.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: TrainConfig,
    pub sources: Vec<(&'static str, String, Source)>,
}

fn parse_reduction(s: &str) -> Result<Reduction, String> {
    match s {
        "mean" => Ok(Reduction::Mean),
        "sum" => Ok(Reduction::Sum),
        _ => Err(format!("`{s}` is not one of mean, sum")),
    }
}

fn parse_blend(s: &str) -> Result<BlendMode, String> {
    match s {
        "blend" => Ok(BlendMode::Blend),
        "current" => Ok(BlendMode::CurrentOnly),
        _ => Err(format!("`{s}` is not one of blend, current")),
    }
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind, String> {
    match s {
        "adam" => Ok(OptimizerKind::Adam),
        "sgd" => Ok(OptimizerKind::Sgd),
        _ => Err(format!("`{s}` is not one of adam, sgd")),
    }
}

fn reduction_name(r: Reduction) -> &'static str {
    match r {
        Reduction::Mean => "mean",
        Reduction::Sum => "sum",
    }
}

fn blend_name(b: BlendMode) -> &'static str {
    match b {
        BlendMode::Blend => "blend",
        BlendMode::CurrentOnly => "current",
    }
}

fn optimizer_name(o: OptimizerKind) -> &'static str {
    match o {
        OptimizerKind::Adam => "adam",
        OptimizerKind::Sgd => "sgd",
    }
}

struct Resolver<'a> {
    file: &'a ConfigFile,
    sources: Vec<(&'static str, String, Source)>,
}

impl Resolver<'_> {
    fn pick<T, F, D>(
        &mut self,
        key: &'static str,
        flag: Option<T>,
        default: T,
        parse: F,
        show: D,
    ) -> Result<T, CliError>
    where
        F: Fn(&str) -> Result<T, String>,
        D: Fn(&T) -> String,
    {
        let (value, source) = match (flag, self.file.get(key)) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(text)) => (
                parse(text).map_err(|e| CliError::usage(format!("config `{key}`: {e}")))?,
                Source::File,
            ),
            (None, None) => (default, Source::Default),
        };
        self.sources.push((key, show(&value), source));
        Ok(value)
    }

    fn simple<T>(&mut self, key: &'static str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + ToString,
        T::Err: fmt::Display,
    {
        self.pick(
            key,
            flag,
            default,
            |s| s.parse::<T>().map_err(|e| e.to_string()),
            T::to_string,
        )
    }

    fn named<T: Copy>(
        &mut self,
        key: &'static str,
        flag: Option<&str>,
        default: T,
        parse: fn(&str) -> Result<T, String>,
        name: fn(T) -> &'static str,
    ) -> Result<T, CliError> {
        let flag = flag
            .map(parse)
            .transpose()
            .map_err(|e| CliError::usage(format!("--{}: {e}", key.replace('_', "-"))))?;
        self.pick(key, flag, default, parse, |v| name(*v).to_string())
    }
}

/// Merges flags, the config file and defaults into a [`TrainConfig`].
pub fn resolve_config(flags: &TrainFlagsView<'_>, file: &ConfigFile) -> Result<Resolved, CliError> {
    let f = flags.0;
    let d = TrainConfig::default();
    let mut r = Resolver {
        file,
        sources: Vec::new(),
    };
    let config = TrainConfig {
        learning_rate: r.simple("learning_rate", f.learning_rate, d.learning_rate)?,
        epochs: r.simple("epochs", f.epochs, d.epochs)?,
        dropout: r.simple("dropout", f.dropout, d.dropout)?,
        weight_decay: r.simple("weight_decay", f.weight_decay, d.weight_decay)?,
        knn_k: r.simple("knn_k", f.knn_k, d.knn_k)?,
        lambda1: r.simple("lambda1", f.lambda1, d.lambda1)?,
        lambda2: r.simple("lambda2", f.lambda2, d.lambda2)?,
        alpha: r.simple("alpha", f.alpha, d.alpha)?,
        top_k_features: r.simple("top_k_features", f.top_k_features, d.top_k_features)?,
        mi_bins: r.simple("mi_bins", f.mi_bins, d.mi_bins)?,
        hidden_dim: r.simple("hidden_dim", f.hidden_dim, d.hidden_dim)?,
        seed: r.simple("seed", f.seed, d.seed)?,
        rebuild_graph_every_epoch: r.simple(
            "rebuild_graph_every_epoch",
            f.rebuild_graph_every_epoch,
            d.rebuild_graph_every_epoch,
        )?,
        freeze_graph_after: r.pick(
            "freeze_graph_after",
            f.freeze_graph_after.map(Some),
            d.freeze_graph_after,
            |s| match s {
                "none" => Ok(None),
                _ => s.parse().map(Some).map_err(|e| format!("{e}")),
            },
            |v| v.map_or_else(|| "none".to_string(), |e| e.to_string()),
        )?,
        folds: r.simple("folds", f.folds, d.folds)?,
        normalize_mi: r.simple("normalize_mi", f.normalize_mi, d.normalize_mi)?,
        rescale_scores: r.simple("rescale_scores", f.rescale_scores, d.rescale_scores)?,
        ce_reduction: r.named(
            "ce_reduction",
            f.ce_reduction.as_deref(),
            d.ce_reduction,
            parse_reduction,
            reduction_name,
        )?,
        blend: r.named(
            "eq10_mode",
            f.eq10_mode.as_deref(),
            d.blend,
            parse_blend,
            blend_name,
        )?,
        optimizer: r.named(
            "optimizer",
            f.optimizer.as_deref(),
            d.optimizer,
            parse_optimizer,
            optimizer_name,
        )?,
        positive_class: r.simple("positive_class", f.positive_class, d.positive_class)?,
        reward_momentum: r.simple("reward_momentum", f.reward_momentum, d.reward_momentum)?,
    };
    if config.freeze_graph_after.is_some() && !config.rebuild_graph_every_epoch {
        return Err(CliError::usage(
            "freeze_graph_after conflicts with rebuild_graph_every_epoch = false",
        ));
    }
    Ok(Resolved {
        config,
        sources: r.sources,
    })
}

/// Opaque handle so callers outside this module can resolve configs
/// without seeing clap types.
pub struct TrainFlagsView<'a>(&'a TrainFlags);

static NO_FLAGS: std::sync::LazyLock<TrainFlags> = std::sync::LazyLock::new(TrainFlags::default);

impl TrainFlagsView<'static> {
    pub fn none() -> Self {
        TrainFlagsView(&NO_FLAGS)
    }
}

fn read_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            ConfigFile::parse(&text)
        }
    }
}

fn load_input(input: &Input) -> Result<(Dataset, usize), CliError> {
    let map = input
        .column_map
        .as_deref()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            ColumnMap::parse(&text)
        })
        .transpose()?;
    let options = CsvOptions {
        label_column: &input.label_column,
        id_column: (!input.no_id_column).then_some(input.id_column.as_str()),
        column_map: map.as_ref(),
    };
    let loaded = dataio::load_csv(&input.input, &options)?;
    Ok((loaded.dataset, loaded.dropped_rows))
}

struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    /// Writes every artifact atomically. Nothing is written until all
    /// artifacts have been computed.
    fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::output(Error::io(&self.dir, e)))?;
        let mut written = Vec::new();
        for (name, bytes) in self.files {
            let path = self.dir.join(name);
            dataio::write_atomic(&path, &bytes).map_err(CliError::output)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn manifest(
    subcommand: &str,
    input: Option<&Path>,
    extra: &[(&str, String)],
    resolved: Option<&Resolved>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# dualgraph run manifest");
    let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "subcommand = {subcommand}");
    if let Some(p) = input {
        let _ = writeln!(out, "input = {}", p.display());
    }
    for (k, v) in extra {
        let _ = writeln!(out, "{k} = {v}");
    }
    if let Some(r) = resolved {
        for (key, value, source) in &r.sources {
            let _ = writeln!(out, "{key} = {value}  # {source}");
        }
    }
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let _ = writeln!(out, "created_unix = {stamp}");
    out
}

fn run_synth(args: &SynthArgs) -> Result<(), CliError> {
    let spec = SynthSpec {
        n_per_class: args.n_per_class,
        d_total: args.d_total,
        d_informative: args.d_informative,
        gap: args.gap,
        seed: args.seed,
    };
    let dataset = dataio::synthesize(&spec)?;
    let mut csv = Vec::new();
    dataio::write_csv(&dataset, &mut csv)
        .map_err(|e| CliError::output(Error::io("dataset.csv", e)))?;
    let mut out = Outputs::new(&args.common.out);
    out.add("dataset.csv", csv);
    let extra = [
        ("n_per_class", spec.n_per_class.to_string()),
        ("d_total", spec.d_total.to_string()),
        ("d_informative", spec.d_informative.to_string()),
        ("gap", spec.gap.to_string()),
        ("seed", spec.seed.to_string()),
    ];
    out.add("manifest.txt", manifest("synth", None, &extra, None));
    let written = out.commit()?;
    println!(
        "wrote {} subjects x {} features to {}",
        dataset.len(),
        dataset.feature_count(),
        written[0].display()
    );
    Ok(())
}

fn setup(cmd: &DataCommand) -> Result<(Dataset, usize, Resolved), CliError> {
    let file = read_config(cmd.common.config.as_deref())?;
    let resolved = resolve_config(&TrainFlagsView(&cmd.train), &file)?;
    resolved.config.validate()?;
    let (dataset, dropped) = load_input(&cmd.input)?;
    if dropped > 0 {
        eprintln!("dropped {dropped} rows with missing values");
    }
    Ok((dataset, dropped, resolved))
}

fn all_rows(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn run_select_features(cmd: &DataCommand) -> Result<(), CliError> {
    let (dataset, dropped, resolved) = setup(cmd)?;
    let prepared = trainer::prepare(&dataset, &all_rows(dataset.len()), &resolved.config)?;
    let fg = &prepared.feature_graph;
    let mut selected = vec![false; dataset.feature_count()];
    for &f in &prepared.selected {
        selected[f] = true;
    }
    let mut table = String::from("index,name,w,m,s,c_tilde,selected\n");
    for f in crate::feature_graph::rank_descending(&fg.relevance) {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{}",
            f,
            dataset.feature_names[f],
            fg.fisher[f],
            fg.mutual_info[f],
            fg.combined[f],
            fg.relevance[f],
            selected[f]
        );
    }
    let mut out = Outputs::new(&cmd.common.out);
    out.add("features.csv", table);
    out.add(
        "manifest.txt",
        manifest(
            "select-features",
            Some(&cmd.input.input),
            &[("dropped_rows", dropped.to_string())],
            Some(&resolved),
        ),
    );
    out.commit()?;
    println!(
        "selected {} of {} features",
        prepared.selected.len(),
        dataset.feature_count()
    );
    Ok(())
}

fn run_build_graph(args: &BuildGraphArgs) -> Result<(), CliError> {
    let cmd = &args.data;
    let (dataset, dropped, resolved) = setup(cmd)?;
    let config = &resolved.config;
    let prepared = trainer::prepare(&dataset, &all_rows(dataset.len()), config)?;
    let h = dynamic_graph::fuse_features(&prepared.x, &prepared.energy, None, config.lambda1)?;
    let theta = match args.theta {
        Some(t) => t,
        None => dynamic_graph::median_heuristic_theta(&matrix::pairwise_sq_euclidean(&h)),
    };
    let k = config.knn_k.min(dataset.len().saturating_sub(1));
    let graph = SubjectGraph::build(&h, theta, k)?;
    let mut edges = String::from("i,j,a_ij\n");
    for e in &graph.edges {
        let _ = writeln!(edges, "{},{},{}", e.i, e.j, e.weight);
    }
    let mut out = Outputs::new(&cmd.common.out);
    out.add("edges.csv", edges);
    out.add(
        "manifest.txt",
        manifest(
            "build-graph",
            Some(&cmd.input.input),
            &[
                ("dropped_rows", dropped.to_string()),
                ("theta", theta.to_string()),
            ],
            Some(&resolved),
        ),
    );
    out.commit()?;
    println!(
        "{} subjects, {} undirected edges, theta = {theta}",
        dataset.len(),
        graph.edges.len()
    );
    Ok(())
}

fn run_train(args: &TrainCommand) -> Result<(), CliError> {
    let cmd = &args.data;
    let (dataset, dropped, resolved) = setup(cmd)?;
    let config = &resolved.config;
    let (train, test) = match args.holdout_fold {
        None => (all_rows(dataset.len()), Vec::new()),
        Some(f) => {
            if f >= config.folds {
                return Err(CliError::usage(format!(
                    "--holdout-fold {f} is not below folds = {}",
                    config.folds
                )));
            }
            let partition = cv::stratified_folds(&dataset.y, config.folds, config.seed)?;
            let test = partition[f].clone();
            (cv::complement(dataset.len(), &test), test)
        }
    };
    let run = trainer::train_fold(&dataset, &train, &test, config)?;
    let scored = if test.is_empty() { &train } else { &test };
    let m = run.metrics(&dataset.y, scored, config.positive_class);
    let mut metrics = format!("split,{}\n", &cv::METRICS_HEADER["fold,".len()..]);
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| v.to_string());
    let _ = writeln!(
        metrics,
        "{},{},{},{},{},{},{},{},{}",
        if test.is_empty() { "train" } else { "test" },
        m.tp,
        m.tn,
        m.fp,
        m.fn_,
        m.acc,
        opt(m.sen),
        opt(m.spe),
        opt(m.auc)
    );
    let mut out = Outputs::new(&cmd.common.out);
    out.add("checkpoint.txt", gcn::write_checkpoint(&run.model));
    out.add("history.csv", trainer::history_csv(&run.history));
    out.add("metrics.csv", metrics);
    let mut extra = vec![("dropped_rows", dropped.to_string())];
    if let Some(f) = args.holdout_fold {
        extra.push(("holdout_fold", f.to_string()));
    }
    out.add(
        "manifest.txt",
        manifest("train", Some(&cmd.input.input), &extra, Some(&resolved)),
    );
    out.commit()?;
    println!(
        "accuracy {} on {} {} rows",
        m.acc,
        scored.len(),
        if test.is_empty() {
            "training"
        } else {
            "held-out"
        }
    );
    Ok(())
}

fn run_cv(cmd: &DataCommand) -> Result<(), CliError> {
    let (dataset, dropped, resolved) = setup(cmd)?;
    let report = cv::cross_validate(&dataset, &resolved.config)?;
    let mut out = Outputs::new(&cmd.common.out);
    out.add("metrics.csv", cv::metrics_csv(&report));
    for f in &report.folds {
        out.add(
            &format!("history_fold{}.csv", f.fold),
            trainer::history_csv(&f.history),
        );
    }
    out.add(
        "manifest.txt",
        manifest(
            "cv",
            Some(&cmd.input.input),
            &[("dropped_rows", dropped.to_string())],
            Some(&resolved),
        ),
    );
    out.commit()?;
    let s = &report.summary;
    println!(
        "accuracy {} +/- {} over {} folds",
        s.acc.mean,
        s.acc.std,
        report.folds.len()
    );
    Ok(())
}

fn run_grid(args: &GridArgs) -> Result<(), CliError> {
    let cmd = &args.data;
    if cmd.train.lambda1.is_some() || cmd.train.lambda2.is_some() {
        return Err(CliError::usage(
            "--lambda1/--lambda2 conflict with grid-search; use --lambda1-grid/--lambda2-grid",
        ));
    }
    let (dataset, dropped, resolved) = setup(cmd)?;
    let l1 = if args.lambda1_grid.is_empty() {
        DEFAULT_LAMBDA1_GRID.to_vec()
    } else {
        args.lambda1_grid.clone()
    };
    let l2 = if args.lambda2_grid.is_empty() {
        DEFAULT_LAMBDA2_GRID.to_vec()
    } else {
        args.lambda2_grid.clone()
    };
    let grid = cv::grid_search(&dataset, &resolved.config, &l1, &l2)?;
    let best = grid.best_cell();
    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    let mut out = Outputs::new(&cmd.common.out);
    out.add("surface.csv", cv::surface_csv(&grid));
    out.add("grid_metrics.csv", cv::grid_metrics_csv(&grid));
    out.add(
        "best.txt",
        format!(
            "lambda1 = {}\nlambda2 = {}\nacc_mean = {}\nacc_std = {}\n",
            best.lambda1, best.lambda2, best.report.summary.acc.mean, best.report.summary.acc.std
        ),
    );
    out.add(
        "manifest.txt",
        manifest(
            "grid-search",
            Some(&cmd.input.input),
            &[
                ("dropped_rows", dropped.to_string()),
                ("lambda1_grid", join(&l1)),
                ("lambda2_grid", join(&l2)),
            ],
            Some(&resolved),
        ),
    );
    out.commit()?;
    println!(
        "best lambda1 = {}, lambda2 = {} (accuracy {}); spread {} over {} cells",
        best.lambda1,
        best.lambda2,
        best.report.summary.acc.mean,
        grid.accuracy_spread(),
        grid.cells.len()
    );
    Ok(())
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn try_run<I, T>(argv: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let first = e.to_string();
            let line = first
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            return Err(CliError::usage(line.to_string()));
        }
    };
    match &cli.command {
        Command::Synth(a) => run_synth(a),
        Command::SelectFeatures(c) => run_select_features(c),
        Command::BuildGraph(a) => run_build_graph(a),
        Command::Train(a) => run_train(a),
        Command::Cv(c) => run_cv(c),
        Command::GridSearch(a) => run_grid(a),
    }
}

/// Runs the CLI and returns the process exit code, printing a one-line
/// diagnostic on failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match try_run(argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("dualgraph: {}", e.message.replace('\n', " "));
            e.code
        }
    }
}
