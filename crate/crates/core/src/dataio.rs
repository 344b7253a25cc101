//! Subject feature tables: CSV ingestion, z-score standardization and a
//! seeded two-class Gaussian generator.
//!
//! # CSV schema
//!
//! UTF-8, comma separated, one header row, `.` as decimal separator. One
//! column holds the class label (any text; exactly two distinct values), an
//! optional column holds subject ids, and every other column is a numeric
//! feature. Empty cells and `NA`/`NaN` count as missing; rows with a missing
//! feature or label are dropped. Labels are encoded by sorted distinct
//! value: the lexicographically smaller label becomes class 0.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Floor applied to training-row standard deviations.
pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<usize>,
    pub feature_names: Vec<String>,
    pub subject_ids: Vec<String>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.x.cols()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Rows per class.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count()];
        for &label in &self.y {
            sizes[label] += 1;
        }
        sizes
    }
}

/// Header renames applied before columns are looked up, one
/// `source = target` pair per line, `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnMap {
    renames: HashMap<String, String>,
}

impl ColumnMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut renames = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((from, to)) = line.split_once('=') else {
                return Err(Error::Format {
                    line: n + 1,
                    message: "expected `source = target`".into(),
                });
            };
            renames.insert(from.trim().to_string(), to.trim().to_string());
        }
        Ok(Self { renames })
    }

    pub fn apply<'a>(&'a self, header: &'a str) -> &'a str {
        self.renames.get(header).map_or(header, String::as_str)
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions<'a> {
    pub label_column: &'a str,
    pub id_column: Option<&'a str>,
    pub column_map: Option<&'a ColumnMap>,
}

impl Default for CsvOptions<'_> {
    fn default() -> Self {
        Self {
            label_column: "label",
            id_column: Some("id"),
            column_map: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    /// Rows removed because of a missing value.
    pub dropped_rows: usize,
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan")
}

pub fn load_csv(path: &Path, options: &CsvOptions<'_>) -> Result<Loaded> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, options).map_err(|e| match e {
        Error::Csv { source, .. } => Error::Csv {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn read_csv(reader: impl std::io::Read, options: &CsvOptions<'_>) -> Result<Loaded> {
    let csv_err = |source| Error::Csv {
        path: "<input>".into(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let identity = ColumnMap::default();
    let map = options.column_map.unwrap_or(&identity);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| map.apply(h).to_string())
        .collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn { name: name.into() })
    };
    let label_idx = find(options.label_column)?;
    let id_idx = options.id_column.map(find).transpose()?;
    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|&c| c != label_idx && Some(c) != id_idx)
        .collect();

    let mut records = Vec::new();
    for record in rdr.records() {
        records.push(record.map_err(csv_err)?);
    }

    // A column with no parseable cell at all is a text column, not a
    // numeric column with a bad entry.
    for &c in &feature_idx {
        let mut seen_value = false;
        let mut any_numeric = false;
        for r in &records {
            let cell = r.get(c).unwrap_or("");
            if is_missing(cell) {
                continue;
            }
            seen_value = true;
            if cell.parse::<f64>().is_ok() {
                any_numeric = true;
                break;
            }
        }
        if seen_value && !any_numeric {
            return Err(Error::NonNumericColumn {
                name: headers[c].clone(),
            });
        }
    }

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut ids = Vec::new();
    let mut dropped_rows = 0;
    'rows: for (r, record) in records.iter().enumerate() {
        let label = record.get(label_idx).unwrap_or("");
        if is_missing(label) {
            dropped_rows += 1;
            continue;
        }
        let mut row = Vec::with_capacity(feature_idx.len());
        for &c in &feature_idx {
            let cell = record.get(c).unwrap_or("");
            if is_missing(cell) {
                dropped_rows += 1;
                continue 'rows;
            }
            let v: f64 = cell.parse().map_err(|_| Error::UnparseableValue {
                // 1-based, counting the header as row 1.
                row: r + 2,
                column: headers[c].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                dropped_rows += 1;
                continue 'rows;
            }
            row.push(v);
        }
        values.extend(row);
        raw_labels.push(label.to_string());
        ids.push(match id_idx {
            Some(i) => record.get(i).unwrap_or("").to_string(),
            None => (r + 1).to_string(),
        });
    }

    let class_names: Vec<String> = raw_labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if class_names.len() != 2 {
        return Err(Error::LabelCount {
            found: class_names.len(),
        });
    }
    let y = raw_labels
        .iter()
        .map(|l| class_names.iter().position(|c| c == l).expect("label seen"))
        .collect();
    let x = Matrix::from_vec(ids.len(), feature_idx.len(), values)?;
    Ok(Loaded {
        dataset: Dataset {
            x,
            y,
            feature_names: feature_idx.iter().map(|&c| headers[c].clone()).collect(),
            subject_ids: ids,
            class_names,
        },
        dropped_rows,
    })
}

/// Writes `id,label,<features…>` with 17 significant digits per value.
pub fn write_csv(dataset: &Dataset, out: &mut impl Write) -> std::io::Result<()> {
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend(dataset.feature_names.iter().cloned());
    writeln!(out, "{}", header.join(","))?;
    for i in 0..dataset.len() {
        write!(
            out,
            "{},{}",
            dataset.subject_ids[i], dataset.class_names[dataset.y[i]]
        )?;
        for v in dataset.x.row(i) {
            write!(out, ",{v:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(dataset, &mut buf).map_err(|e| Error::io(path, e))?;
    write_atomic(path, &buf)
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so a failed write leaves nothing behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Per-feature z-score parameters estimated on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    pub fn fit(x: &Matrix, train_rows: &[usize]) -> Result<Self> {
        if train_rows.is_empty() {
            return Err(Error::EmptyMask { op: "standardize" });
        }
        let d = x.cols();
        let n = train_rows.len() as f64;
        let mut mean = vec![0.0; d];
        for &r in train_rows {
            for (m, v) in mean.iter_mut().zip(x.row(r)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for &r in train_rows {
            for ((acc, v), m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|v| (v / n).sqrt().max(STD_FLOOR)).collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}

/// Z-scores every row of `x` with statistics from `train_rows` only.
pub fn standardize(x: &Matrix, train_rows: &[usize]) -> Result<(Matrix, Standardization)> {
    let params = Standardization::fit(x, train_rows)?;
    Ok((params.apply(x), params))
}

/// Parameters of the two-class Gaussian generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n_per_class: usize,
    pub d_total: usize,
    pub d_informative: usize,
    /// Distance between class means on each informative feature.
    pub gap: f64,
    pub seed: u64,
}

/// Two Gaussian classes, `n_per_class` rows each. The first `d_informative`
/// features have class means `∓gap/2` and unit variance; the rest are
/// standard normal noise. Rows are shuffled with the same seed.
///
/// Classes are named `control` (0) and `disease` (1), so a save/load round
/// trip keeps the encoding.
pub fn synthesize(spec: &SynthSpec) -> Result<Dataset> {
    if spec.d_informative > spec.d_total {
        return Err(Error::invalid(
            "d_informative",
            format!("{} exceeds d_total {}", spec.d_informative, spec.d_total),
        ));
    }
    if !(spec.gap >= 0.0 && spec.gap.is_finite()) {
        return Err(Error::invalid(
            "gap",
            format!("{} must be finite and >= 0", spec.gap),
        ));
    }
    if spec.n_per_class == 0 || spec.d_total == 0 {
        return Err(Error::invalid("n_per_class/d_total", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = 2 * spec.n_per_class;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut data = Vec::with_capacity(n * spec.d_total);
    let mut y = Vec::with_capacity(n);
    for &slot in &order {
        let label = usize::from(slot >= spec.n_per_class);
        let shift = if label == 1 {
            spec.gap / 2.0
        } else {
            -spec.gap / 2.0
        };
        for f in 0..spec.d_total {
            let z: f64 = StandardNormal.sample(&mut rng);
            data.push(if f < spec.d_informative { z + shift } else { z });
        }
        y.push(label);
    }
    let width = (spec.d_total.max(2) - 1).to_string().len();
    Ok(Dataset {
        x: Matrix::from_vec(n, spec.d_total, data)?,
        y,
        feature_names: (0..spec.d_total).map(|f| format!("f{f:0width$}")).collect(),
        subject_ids: (0..n).map(|i| format!("s{i:04}")).collect(),
        class_names: vec!["control".into(), "disease".into()],
    })
}
