//! Dataset ingestion (CSV and sparse `label idx:val` files), seeded
//! synthetic generation, and trace persistence.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::TraceRecord;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::softmax_posteriors;
use crate::weights::WeightMatrix;

/// Guard on dense materialization of sparse files.
const MAX_DENSE_ENTRIES: usize = 200_000_000;

/// Maps label tokens to class indices in first-appearance order.
#[derive(Default)]
struct ClassMap {
    names: Vec<String>,
}

impl ClassMap {
    fn index_of(&mut self, token: &str) -> usize {
        match self.names.iter().position(|n| n == token) {
            Some(i) => i,
            None => {
                self.names.push(token.to_string());
                self.names.len() - 1
            }
        }
    }
}

/// Loads a delimited numeric file with one label column.
///
/// `label_column` is 0-based; `None` selects the last column. Labels may be
/// arbitrary tokens and are mapped to class indices in first-appearance
/// order; every other column must parse as a float. Files with fewer than
/// two distinct labels are rejected.
pub fn load_csv(path: &Path, label_column: Option<usize>, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let mut classes = Vec::new();
    let mut class_map = ClassMap::default();
    let mut rows: Vec<f64> = Vec::new();
    let mut width = None;

    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 1 + usize::from(has_header);
        let cols = record.len();
        let label_at = label_column.unwrap_or(cols.saturating_sub(1));
        if label_at >= cols {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                msg: format!("label column {label_at} out of range ({cols} columns)"),
            });
        }
        match width {
            None => width = Some(cols),
            Some(w) if w != cols => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line,
                    msg: format!("expected {w} columns, found {cols}"),
                })
            }
            _ => {}
        }
        classes.push(class_map.index_of(&record[label_at]));
        for (col, field) in record.iter().enumerate() {
            if col == label_at {
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line,
                msg: format!("column {col}: cannot parse {field:?} as a number"),
            })?;
            rows.push(value);
        }
    }

    let n = classes.len();
    if n == 0 {
        return Err(Error::InvalidData(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let d = rows.len() / n;
    if class_map.names.len() < 2 {
        return Err(Error::InvalidData(format!(
            "{}: a single class ({:?}) cannot be fit",
            path.display(),
            class_map.names
        )));
    }
    let features = Array2::from_shape_vec((n, d), rows)
        .map_err(|e| Error::InvalidData(e.to_string()))?;
    Dataset::from_class_indices(features, &classes, class_map.names)
}

/// Loads a sparse `label idx:val ...` file with 1-based, strictly ascending
/// indices per line, materializing a dense feature matrix. The feature
/// dimension is the largest index seen anywhere in the file.
pub fn load_libsvm(path: &Path) -> Result<Dataset> {
    let file = File::open(path)?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };

    let mut classes = Vec::new();
    let mut class_map = ClassMap::default();
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut d = 0usize;

    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let label = fields.next().expect("non-empty line has a first token");
        classes.push(class_map.index_of(label));
        let mut row = Vec::new();
        let mut last_index = 0usize;
        for field in fields {
            let (index_str, value_str) = field.split_once(':').ok_or_else(|| {
                parse_err(lineno, format!("expected idx:val, found {field:?}"))
            })?;
            let index: usize = index_str
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature index {index_str:?}")))?;
            if index == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based".into()));
            }
            if index <= last_index {
                return Err(parse_err(
                    lineno,
                    format!("feature indices must ascend, {index} after {last_index}"),
                ));
            }
            let value: f64 = value_str
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature value {value_str:?}")))?;
            last_index = index;
            d = d.max(index);
            row.push((index - 1, value));
        }
        sparse_rows.push(row);
    }

    let n = sparse_rows.len();
    if n == 0 || d == 0 {
        return Err(Error::InvalidData(format!(
            "{}: no samples or no features",
            path.display()
        )));
    }
    if n.saturating_mul(d) > MAX_DENSE_ENTRIES {
        return Err(Error::SizeGuard {
            what: "dense materialization",
            quantity: "n*d",
            limit: MAX_DENSE_ENTRIES,
            actual: n * d,
        });
    }
    let mut features = Array2::zeros((n, d));
    for (j, row) in sparse_rows.iter().enumerate() {
        for &(l, value) in row {
            features[(j, l)] = value;
        }
    }
    if class_map.names.len() < 2 {
        return Err(Error::InvalidData(format!(
            "{}: a single class ({:?}) cannot be fit",
            path.display(),
            class_map.names
        )));
    }
    Dataset::from_class_indices(features, &classes, class_map.names)
}

/// Writes a dataset in the sparse format read by [`load_libsvm`]. Zero
/// entries are skipped; values use the shortest representation that parses
/// back to the identical float.
pub fn write_libsvm(data: &Dataset, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for j in 0..data.n() {
        write!(out, "{}", data.class_names()[data.class_index(j)])?;
        for l in 0..data.d() {
            let value = data.features()[(j, l)];
            if value != 0.0 {
                write!(out, " {}:{:?}", l + 1, value)?;
            }
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// How synthetic class labels are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelMode {
    /// Sample labels from the softmax of a hidden weight matrix with U[0,1]
    /// entries; yields learnable structure.
    #[default]
    GroundTruthModel,
    /// Uniform over the classes, independent of the features.
    UniformRandom,
}

/// Recipe for a seeded synthetic dataset with standard normal features.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub label_mode: LabelMode,
    pub seed: u64,
    pub append_bias: bool,
}

impl SyntheticSpec {
    pub fn new(n: usize, d: usize, m: usize) -> Self {
        Self {
            n,
            d,
            m,
            label_mode: LabelMode::default(),
            seed: 0,
            append_bias: false,
        }
    }
}

/// Inverse-CDF walk: the class whose cumulative probability first exceeds
/// the uniform draw.
fn sample_class(probs: &[f64], draw: f64) -> usize {
    let mut cumulative = 0.0;
    for (class, &p) in probs.iter().enumerate() {
        cumulative += p;
        if draw < cumulative {
            return class;
        }
    }
    probs.len() - 1
}

/// Generates `(dataset, hidden_weights)` deterministically from the spec.
///
/// Draw order is fixed: features row-major, then (in ground-truth mode) the
/// hidden weights row-major, then one label draw per sample. The hidden
/// weights are returned only in ground-truth mode.
pub fn synth_generate(spec: &SyntheticSpec) -> Result<(Dataset, Option<WeightMatrix>)> {
    if spec.n == 0 || spec.d == 0 || spec.m < 2 {
        return Err(Error::InvalidData(format!(
            "need n >= 1, d >= 1, m >= 2; got n={}, d={}, m={}",
            spec.n, spec.d, spec.m
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut features = Array2::zeros((spec.n, spec.d + usize::from(spec.append_bias)));
    for j in 0..spec.n {
        for l in 0..spec.d {
            features[(j, l)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    if spec.append_bias {
        features.column_mut(spec.d).fill(1.0);
    }
    let width = features.ncols();

    let names = (0..spec.m).map(|i| i.to_string()).collect();
    match spec.label_mode {
        LabelMode::GroundTruthModel => {
            let hidden = WeightMatrix::random_uniform(spec.m, width, &mut rng);
            let mut classes = Vec::with_capacity(spec.n);
            for j in 0..spec.n {
                let scores = hidden.as_array().dot(&features.row(j));
                let probs = softmax_posteriors(scores.view());
                classes.push(sample_class(
                    probs.as_slice().expect("contiguous"),
                    rng.random::<f64>(),
                ));
            }
            let data = Dataset::from_class_indices(features, &classes, names)?;
            Ok((data, Some(hidden)))
        }
        LabelMode::UniformRandom => {
            let classes: Vec<usize> = (0..spec.n).map(|_| rng.random_range(0..spec.m)).collect();
            let data = Dataset::from_class_indices(features, &classes, names)?;
            Ok((data, None))
        }
    }
}

/// On-disk format for traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

/// Writes a trace; CSV has header `iter,objective,wall_ms,nnz` with floats
/// at 17 significant digits (enough to round-trip exactly), JSON is an array
/// of records.
pub fn write_trace(trace: &[TraceRecord], path: &Path, format: TraceFormat) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        TraceFormat::Csv => {
            writeln!(out, "iter,objective,wall_ms,nnz")?;
            for record in trace {
                writeln!(
                    out,
                    "{},{:.16e},{:.16e},{}",
                    record.iter, record.objective, record.wall_ms, record.nnz
                )?;
            }
        }
        TraceFormat::Json => {
            serde_json::to_writer_pretty(&mut out, trace)
                .map_err(|e| Error::InvalidData(format!("trace serialization: {e}")))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a trace written by [`write_trace`].
pub fn read_trace(path: &Path, format: TraceFormat) -> Result<Vec<TraceRecord>> {
    match format {
        TraceFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_path(path)?;
            let mut records = Vec::new();
            for (idx, row) in reader.records().enumerate() {
                let row = row?;
                let field = |col: usize| -> Result<&str> {
                    row.get(col).ok_or_else(|| Error::Parse {
                        path: path.display().to_string(),
                        line: idx + 2,
                        msg: format!("missing column {col}"),
                    })
                };
                let parse_fail = |col: usize, value: &str| Error::Parse {
                    path: path.display().to_string(),
                    line: idx + 2,
                    msg: format!("column {col}: cannot parse {value:?}"),
                };
                records.push(TraceRecord {
                    iter: field(0)?.parse().map_err(|_| parse_fail(0, &row[0]))?,
                    objective: field(1)?.parse().map_err(|_| parse_fail(1, &row[1]))?,
                    wall_ms: field(2)?.parse().map_err(|_| parse_fail(2, &row[2]))?,
                    nnz: field(3)?.parse().map_err(|_| parse_fail(3, &row[3]))?,
                });
            }
            Ok(records)
        }
        TraceFormat::Json => {
            let file = File::open(path)?;
            serde_json::from_reader(BufReader::new(file))
                .map_err(|e| Error::InvalidData(format!("trace deserialization: {e}")))
        }
    }
}
