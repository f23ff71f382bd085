/// One feature vector `a_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    /// Sorted, strictly increasing indices with their nonzero values.
    Sparse {
        indices: Vec<usize>,
        values: Vec<f64>,
    },
    Dense(Vec<f64>),
}

impl Row {
    /// Picks the storage layout from the density of `entries`, which must be
    /// sorted by index with no duplicates.
    pub(crate) fn from_sorted_entries(n_features: usize, entries: Vec<(usize, f64)>) -> Self {
        let entries: Vec<_> = entries.into_iter().filter(|&(_, v)| v != 0.0).collect();
        if 2 * entries.len() > n_features {
            let mut dense = vec![0.0; n_features];
            for (j, v) in entries {
                dense[j] = v;
            }
            Row::Dense(dense)
        } else {
            let (indices, values) = entries.into_iter().unzip();
            Row::Sparse { indices, values }
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Row::Sparse { .. })
    }

    /// Number of stored entries (all `d` for a dense row).
    pub fn nnz(&self) -> usize {
        match self {
            Row::Sparse { indices, .. } => indices.len(),
            Row::Dense(v) => v.len(),
        }
    }

    /// Iterates stored `(index, value)` pairs in index order.
    pub fn iter(&self) -> RowIter<'_> {
        match self {
            Row::Sparse { indices, values } => RowIter::Sparse(indices.iter().zip(values.iter())),
            Row::Dense(v) => RowIter::Dense(v.iter().enumerate()),
        }
    }

    /// `a_i · x`
    pub fn dot(&self, x: &[f64]) -> f64 {
        match self {
            Row::Sparse { indices, values } => indices.iter().zip(values).map(|(&j, &v)| v * x[j]).sum(),
            Row::Dense(v) => v.iter().zip(x).map(|(a, b)| a * b).sum(),
        }
    }

    /// `y += alpha · a_i`
    pub fn axpy(&self, alpha: f64, y: &mut [f64]) {
        match self {
            Row::Sparse { indices, values } => {
                for (&j, &v) in indices.iter().zip(values) {
                    y[j] += alpha * v;
                }
            }
            Row::Dense(v) => {
                for (yj, &a) in y.iter_mut().zip(v) {
                    *yj += alpha * a;
                }
            }
        }
    }

    pub fn norm_sq(&self) -> f64 {
        let vals = match self {
            Row::Sparse { values, .. } => values.as_slice(),
            Row::Dense(v) => v.as_slice(),
        };
        vals.iter().map(|v| v * v).sum()
    }

    pub(crate) fn divide(&mut self, divisor: f64) {
        let vals = match self {
            Row::Sparse { values, .. } => values,
            Row::Dense(v) => v,
        };
        for v in vals {
            *v /= divisor;
        }
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.iter().all(|(_, v)| v.is_finite())
    }

    /// Nonzero entries as `(index, value)` pairs.
    pub fn entries(&self) -> Vec<(usize, f64)> {
        self.iter().filter(|&(_, v)| v != 0.0).collect()
    }

    pub fn to_dense(&self, n_features: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_features];
        for (j, v) in self.iter() {
            out[j] = v;
        }
        out
    }
}

pub enum RowIter<'a> {
    Sparse(std::iter::Zip<std::slice::Iter<'a, usize>, std::slice::Iter<'a, f64>>),
    Dense(std::iter::Enumerate<std::slice::Iter<'a, f64>>),
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowIter::Sparse(it) => it.next().map(|(&j, &v)| (j, v)),
            RowIter::Dense(it) => it.next().map(|(j, &v)| (j, v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_and_dense_agree() {
        let entries = vec![(1, 2.0), (4, -1.0)];
        let sparse = Row::from_sorted_entries(5, entries.clone());
        let dense = Row::Dense(sparse.to_dense(5));
        assert!(sparse.is_sparse());
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(sparse.dot(&x), 4.0 - 5.0);
        assert_eq!(sparse.dot(&x), dense.dot(&x));
        let mut y1 = vec![0.0; 5];
        let mut y2 = vec![0.0; 5];
        sparse.axpy(0.5, &mut y1);
        dense.axpy(0.5, &mut y2);
        assert_eq!(y1, y2);
        assert_eq!(sparse.norm_sq(), 5.0);
        assert_eq!(dense.entries(), entries);
    }
}
