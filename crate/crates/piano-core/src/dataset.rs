//! Training data: a feature matrix plus one-hot class labels.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// A classification dataset with `n` samples, `d` features, and `m` classes.
///
/// Labels are stored one-hot (`n x m`, each row has exactly one entry equal
/// to 1); a compact class-index view is available for loaders and
/// serialization. Class names record the first-appearance order used when
/// the labels were encoded, so that predictions can be mapped back.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Array2<f64>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from a feature matrix and a one-hot label matrix.
    ///
    /// Validates the one-hot encoding (exactly one 1.0 per row, rest 0.0),
    /// `n >= 1`, `d >= 1`, `m >= 2`, and finiteness of every feature entry.
    pub fn new(features: Array2<f64>, labels: Array2<f64>) -> Result<Self> {
        let m = labels.ncols();
        let class_names = (0..m).map(|i| i.to_string()).collect();
        Self::with_class_names(features, labels, class_names)
    }

    /// As [`Dataset::new`], with explicit class names (one per column of `labels`).
    pub fn with_class_names(
        features: Array2<f64>,
        labels: Array2<f64>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let (n, d) = (features.nrows(), features.ncols());
        let m = labels.ncols();
        if n == 0 || d == 0 {
            return Err(Error::InvalidData(format!(
                "need n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if m < 2 {
            return Err(Error::InvalidData(format!("need m >= 2 classes, got m={m}")));
        }
        if labels.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "features have {n} rows but labels have {}",
                labels.nrows()
            )));
        }
        if class_names.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} label columns but {} class names",
                class_names.len()
            )));
        }
        if let Some(bad) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidData(format!(
                "feature entry {} of row {} is not finite",
                bad % d,
                bad / d
            )));
        }
        for (j, row) in labels.rows().into_iter().enumerate() {
            let ones = row.iter().filter(|&&y| y == 1.0).count();
            let zeros = row.iter().filter(|&&y| y == 0.0).count();
            if ones != 1 || ones + zeros != m {
                return Err(Error::InvalidData(format!(
                    "label row {j} is not one-hot: {row}"
                )));
            }
        }
        Ok(Self {
            features,
            labels,
            class_names,
        })
    }

    /// Builds a dataset from compact class indices (`0..m`), one-hot encoding them.
    pub fn from_class_indices(
        features: Array2<f64>,
        classes: &[usize],
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n = features.nrows();
        let m = class_names.len();
        if classes.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} feature rows but {} class indices",
                classes.len()
            )));
        }
        let mut labels = Array2::zeros((n, m));
        for (j, &c) in classes.iter().enumerate() {
            if c >= m {
                return Err(Error::InvalidData(format!(
                    "class index {c} out of range for m={m} (row {j})"
                )));
            }
            labels[(j, c)] = 1.0;
        }
        Self::with_class_names(features, labels, class_names)
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn m(&self) -> usize {
        self.labels.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> ArrayView2<'_, f64> {
        self.labels.view()
    }

    pub fn sample(&self, j: usize) -> ArrayView1<'_, f64> {
        self.features.row(j)
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Class index of sample `j` (position of the 1 in its label row).
    pub fn class_index(&self, j: usize) -> usize {
        self.labels
            .row(j)
            .iter()
            .position(|&y| y == 1.0)
            .expect("validated one-hot row")
    }

    /// Compact class-index view of all labels.
    pub fn class_indices(&self) -> Vec<usize> {
        (0..self.n()).map(|j| self.class_index(j)).collect()
    }

    /// A copy with a constant-one column appended to the features. Bias
    /// terms are never added implicitly; callers opt in at load time.
    pub fn with_bias_column(&self) -> Self {
        let (n, d) = (self.n(), self.d());
        let mut features = Array2::ones((n, d + 1));
        features.slice_mut(ndarray::s![.., ..d]).assign(&self.features);
        Self {
            features,
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
        }
    }
}
