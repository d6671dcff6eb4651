//! Parsing for CLI value syntaxes: 1-based column lists/ranges, and
//! vector/matrix hyperparameters given as files or literals.

use std::path::Path;

use bayeslm::linalg::{Mat, SpdMatrix};

use crate::CliError;

/// Parses "1-10", "1,2,5", or mixes like "1-3,7" into 1-based indices.
pub fn parse_column_spec(spec: &str) -> Result<Vec<usize>, CliError> {
    let mut cols = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err(CliError::Usage(format!(
                "empty entry in column list {spec:?}"
            )));
        }
        if let Some((lo, hi)) = token.split_once('-') {
            let lo: usize = lo
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad column range {token:?}")))?;
            let hi: usize = hi
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad column range {token:?}")))?;
            if lo == 0 || hi < lo {
                return Err(CliError::Usage(format!("bad column range {token:?}")));
            }
            cols.extend(lo..=hi);
        } else {
            let c: usize = token
                .parse()
                .map_err(|_| CliError::Usage(format!("bad column index {token:?}")))?;
            if c == 0 {
                return Err(CliError::Usage("column indices are 1-based".into()));
            }
            cols.push(c);
        }
    }
    Ok(cols)
}

fn read_tokens(path: &str) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::Data(format!("cannot read {path}: {e}")))?;
    text.split([',', ' ', '\t', '\n', '\r'])
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Data(format!("non-numeric value {t:?} in {path}")))
        })
        .collect()
}

/// A p-vector from the literals "zeros"/"ones" or a file of p numbers.
pub fn load_vector(what: &str, value: &str, p: usize) -> Result<Vec<f64>, CliError> {
    match value {
        "zeros" => Ok(vec![0.0; p]),
        "ones" => Ok(vec![1.0; p]),
        path => {
            let vals = read_tokens(path)?;
            if vals.len() != p {
                return Err(CliError::Data(format!(
                    "{what}: expected length {p}, got {} values from {path}",
                    vals.len()
                )));
            }
            Ok(vals)
        }
    }
}

/// A p×p SPD matrix from the literal "identity" or a file of p² numbers
/// (row-major; line breaks are ignored).
pub fn load_spd_matrix(what: &str, value: &str, p: usize) -> Result<SpdMatrix, CliError> {
    match value {
        "identity" => Ok(SpdMatrix::identity(p)),
        path => {
            let vals = read_tokens(path)?;
            if vals.len() != p * p {
                return Err(CliError::Data(format!(
                    "{what}: expected {p}x{p} = {} values, got {} from {path}",
                    p * p,
                    vals.len()
                )));
            }
            SpdMatrix::new(Mat::from_rows(p, p, &vals)).map_err(CliError::from)
        }
    }
}
