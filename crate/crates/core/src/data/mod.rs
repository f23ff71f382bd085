//! Sample matrices, LIBSVM ingestion and seeded index sampling.

mod libsvm;
mod row;
mod sampling;
pub mod synthetic;

pub use libsvm::{parse_libsvm, to_libsvm};
pub use row::Row;
pub use sampling::{IndexSampler, SamplingScheme};

use crate::error::DataError;

/// An immutable collection of labelled feature rows.
///
/// Rows are stored sparse (sorted `(index, value)` pairs) unless more than
/// half of their entries are nonzero, in which case they are materialized
/// dense. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_features: usize,
    rows: Vec<Row>,
    labels: Vec<f64>,
    row_norms: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from sparse `(index, value)` rows.
    ///
    /// Explicit zero values are dropped. Indices must be strictly increasing
    /// within a row and lie in `[0, n_features)`.
    pub fn from_sparse(n_features: usize, rows: Vec<Vec<(usize, f64)>>, labels: Vec<f64>) -> Result<Self, DataError> {
        if rows.len() != labels.len() {
            return Err(DataError::LabelCount {
                rows: rows.len(),
                labels: labels.len(),
            });
        }
        let mut built = Vec::with_capacity(rows.len());
        for (r, entries) in rows.into_iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(j, _) in &entries {
                if j >= n_features {
                    return Err(DataError::IndexOutOfRange {
                        row: r,
                        index: j,
                        n_features,
                    });
                }
                if prev.is_some_and(|p| j <= p) {
                    return Err(DataError::UnsortedIndices { row: r, index: j });
                }
                prev = Some(j);
            }
            built.push(Row::from_sorted_entries(n_features, entries));
        }
        Self::from_rows(n_features, built, labels)
    }

    /// Builds a dataset from dense rows of equal length.
    pub fn from_dense(rows: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self, DataError> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, v)| v.len() != n_features) {
            return Err(DataError::RaggedRow {
                row: r,
                len: row.len(),
                expected: n_features,
            });
        }
        let sparse = rows
            .into_iter()
            .map(|v| v.into_iter().enumerate().filter(|&(_, x)| x != 0.0).collect::<Vec<_>>())
            .collect();
        Self::from_sparse(n_features, sparse, labels)
    }

    fn from_rows(n_features: usize, rows: Vec<Row>, labels: Vec<f64>) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        if n_features == 0 {
            return Err(DataError::NoFeatures);
        }
        if let Some(i) = labels.iter().position(|b| !b.is_finite()) {
            return Err(DataError::NonFiniteLabel { row: i });
        }
        if let Some(i) = rows.iter().position(|r| !r.is_finite()) {
            return Err(DataError::NonFiniteValue { row: i });
        }
        let row_norms = rows.iter().map(|r| r.norm_sq().sqrt()).collect();
        Ok(Self {
            n_features,
            rows,
            labels,
            row_norms,
        })
    }

    /// Number of samples `n`.
    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    /// Feature dimension `d`.
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Row {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// Euclidean norms `‖a_i‖`, one per row.
    pub fn row_norms(&self) -> &[f64] {
        &self.row_norms
    }

    /// True when at least one row is stored sparse.
    pub fn has_sparse_rows(&self) -> bool {
        self.rows.iter().any(Row::is_sparse)
    }

    /// Total number of stored nonzeros.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Row::nnz).sum()
    }

    /// Scales every nonzero row to unit Euclidean length. Zero rows are left
    /// untouched.
    pub fn normalize_rows(self) -> Self {
        let Self {
            n_features,
            rows,
            labels,
            row_norms,
        } = self;
        let rows: Vec<Row> = rows
            .into_iter()
            .zip(&row_norms)
            .map(|(mut row, &norm)| {
                if norm > 0.0 {
                    row.divide(norm);
                }
                row
            })
            .collect();
        let row_norms = rows.iter().map(|r| r.norm_sq().sqrt()).collect();
        Self {
            n_features,
            rows,
            labels,
            row_norms,
        }
    }

    /// Returns the rows as `(index, value)` lists, the inverse of
    /// [`Dataset::from_sparse`].
    pub fn sparse_entries(&self) -> Vec<Vec<(usize, f64)>> {
        self.rows.iter().map(Row::entries).collect()
    }

    /// Dense `n × d` copy of the sample matrix in row-major order.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.to_dense(self.n_features)).collect()
    }
}
