//! The weight matrix: one row per class, flattened class-major.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};

/// Per-class weight vectors, stored as an `m x d` matrix (row `i` holds the
/// weights of class `i`).
///
/// The flattened view stacks the class rows in order, so flat index
/// `i * d + l` addresses feature `l` of class `i`. All entries are finite by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: Array2<f64>,
}

impl WeightMatrix {
    pub fn zeros(m: usize, d: usize) -> Self {
        Self {
            rows: Array2::zeros((m, d)),
        }
    }

    /// Wraps an `m x d` array, rejecting non-finite entries.
    pub fn from_array(rows: Array2<f64>) -> Result<Self> {
        if let Some(bad) = rows.iter().position(|x| !x.is_finite()) {
            let d = rows.ncols();
            return Err(Error::InvalidData(format!(
                "weight ({}, {}) is not finite",
                bad / d,
                bad % d
            )));
        }
        Ok(Self { rows })
    }

    /// Rebuilds the matrix from a class-major flat vector of length `m * d`.
    pub fn from_flat(flat: &[f64], m: usize, d: usize) -> Result<Self> {
        if flat.len() != m * d {
            return Err(Error::DimensionMismatch(format!(
                "flat weight vector has length {}, expected {}",
                flat.len(),
                m * d
            )));
        }
        let rows = Array2::from_shape_vec((m, d), flat.to_vec())
            .expect("length checked above");
        Self::from_array(rows)
    }

    /// Entries drawn independently from U[0, 1].
    pub fn random_uniform<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Self {
        let rows = Array2::from_shape_simple_fn((m, d), || rng.random::<f64>());
        Self { rows }
    }

    pub fn m(&self) -> usize {
        self.rows.nrows()
    }

    pub fn d(&self) -> usize {
        self.rows.ncols()
    }

    /// Total number of elements, `d * m`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn as_array(&self) -> ArrayView2<'_, f64> {
        self.rows.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.rows.row(i)
    }

    pub fn get(&self, class: usize, feature: usize) -> f64 {
        self.rows[(class, feature)]
    }

    /// Class-major flattening `[w_1^T, ..., w_m^T]^T`.
    pub fn flatten(&self) -> Array1<f64> {
        Array1::from_iter(self.rows.iter().copied())
    }

    /// Number of entries that are exactly nonzero.
    pub fn nnz(&self) -> usize {
        self.rows.iter().filter(|&&w| w != 0.0).count()
    }
}
