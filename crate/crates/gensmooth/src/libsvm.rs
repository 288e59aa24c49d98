//! LIBSVM-format sparse dataset I/O.
//!
//! Each data line is `<label> <index>:<value> <index>:<value> …` with
//! 1-based, strictly increasing feature indices.  Lines that are blank or
//! start with `#` are skipped.  Binary labels are normalized to `±1`:
//! `+1`/`1` map to `+1`, `-1` and `2` map to `−1`, and any other pair of
//! raw labels is assigned in first-seen order (first seen becomes `+1`).

use crate::{Error, Result};
use std::collections::HashMap;
use std::fmt::Write as _;

/// A sparse binary-classification dataset.
///
/// `rows[i]` holds `(feature, value)` pairs with 0-based feature indices in
/// increasing order; `labels[i] ∈ {−1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub labels: Vec<i8>,
    /// Number of features (at least the largest index + 1).
    pub dim: usize,
}

impl SparseDataset {
    pub fn dimension(&self) -> usize {
        self.dim
    }
}

fn canonical_label(raw: &str) -> Option<i8> {
    match raw {
        "+1" | "1" => Some(1),
        "-1" | "2" => Some(-1),
        _ => None,
    }
}

/// Parses LIBSVM text into a [`SparseDataset`].
///
/// Errors carry the 1-based line number of the offending input line.
pub fn parse_libsvm(text: &str) -> Result<SparseDataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0usize;
    // Raw label token → assigned class, for labels outside the known set.
    let mut assigned: HashMap<String, i8> = HashMap::new();

    for (lineno, line) in text.lines().enumerate() {
        let line_number = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let raw_label = fields.next().unwrap(); // nonempty after trim
        let label = match canonical_label(raw_label) {
            Some(l) => l,
            None => match assigned.get(raw_label) {
                Some(&l) => l,
                None => {
                    let next = match assigned.len() {
                        0 => 1,
                        1 => -1,
                        _ => {
                            return Err(Error::Parse {
                                line: line_number,
                                msg: format!("more than two distinct labels (saw {raw_label:?})"),
                            })
                        }
                    };
                    assigned.insert(raw_label.to_string(), next);
                    next
                }
            },
        };

        let mut features = Vec::new();
        let mut prev_index = 0usize; // indices are 1-based, so 0 = "none yet"
        for field in fields {
            let (idx_str, val_str) = field.split_once(':').ok_or_else(|| Error::Parse {
                line: line_number,
                msg: format!("feature {field:?} is not in index:value form"),
            })?;
            let index: usize = idx_str.parse().map_err(|_| Error::Parse {
                line: line_number,
                msg: format!("invalid feature index {idx_str:?}"),
            })?;
            if index == 0 {
                return Err(Error::Parse {
                    line: line_number,
                    msg: "feature indices are 1-based; got 0".into(),
                });
            }
            if index <= prev_index {
                return Err(Error::Parse {
                    line: line_number,
                    msg: format!("feature indices must be strictly increasing ({prev_index} then {index})"),
                });
            }
            let value: f64 = val_str.parse().map_err(|_| Error::Parse {
                line: line_number,
                msg: format!("invalid feature value {val_str:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: line_number,
                    msg: format!("non-finite feature value {val_str:?}"),
                });
            }
            prev_index = index;
            features.push((index - 1, value));
            dim = dim.max(index);
        }
        rows.push(features);
        labels.push(label);
    }

    Ok(SparseDataset { rows, labels, dim })
}

/// Serializes a dataset back to LIBSVM text.
///
/// Labels are written as `+1`/`-1`; values use the shortest decimal
/// representation that round-trips, so `parse_libsvm ∘ serialize_libsvm`
/// is the identity on well-formed datasets.
pub fn serialize_libsvm(data: &SparseDataset) -> String {
    let mut out = String::new();
    for (features, label) in data.rows.iter().zip(&data.labels) {
        let _ = write!(out, "{}", if *label > 0 { "+1" } else { "-1" });
        for &(j, v) in features {
            let _ = write!(out, " {}:{}", j + 1, v);
        }
        out.push('\n');
    }
    out
}
