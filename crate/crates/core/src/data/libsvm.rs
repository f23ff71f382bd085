use std::fmt::Write as _;

use super::Dataset;
use crate::error::DataError;

/// Parses LIBSVM text: one sample per nonempty line, `<label> (<index>:<value>)*`
/// with 1-based, strictly increasing indices. `#` starts a comment.
///
/// The feature dimension is the largest index seen unless `n_features`
/// overrides it.
pub fn parse_libsvm(text: &str, n_features: Option<usize>) -> Result<Dataset, DataError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_ascii_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| DataError::Parse {
            line,
            message: format!("invalid label `{label_tok}`"),
        })?;

        let mut entries = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| DataError::Parse {
                line,
                message: format!("expected `index:value`, found `{tok}`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| DataError::Parse {
                line,
                message: format!("invalid feature index `{idx}`"),
            })?;
            if idx == 0 {
                return Err(DataError::Parse {
                    line,
                    message: "feature indices are 1-based".into(),
                });
            }
            let val: f64 = val.parse().map_err(|_| DataError::Parse {
                line,
                message: format!("invalid feature value `{val}`"),
            })?;
            if idx <= prev {
                return Err(DataError::NonIncreasing { line, index: idx });
            }
            prev = idx;
            max_index = max_index.max(idx);
            entries.push((idx - 1, val));
        }
        rows.push(entries);
        labels.push(label);
    }

    let d = match n_features {
        Some(d) if d < max_index => {
            return Err(DataError::DimensionTooSmall {
                requested: d,
                required: max_index,
            })
        }
        Some(d) => d,
        None => max_index.max(1),
    };
    Dataset::from_sparse(d, rows, labels)
}

/// Writes a dataset back to LIBSVM text. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn to_libsvm(ds: &Dataset) -> String {
    let mut out = String::new();
    for (row, &label) in ds.rows().iter().zip(ds.labels()) {
        write!(out, "{label}").unwrap();
        for (j, v) in row.iter().filter(|&(_, v)| v != 0.0) {
            write!(out, " {}:{v}", j + 1).unwrap();
        }
        out.push('\n');
    }
    out
}
