//! Mergeable sufficient statistics and bounded-memory ingestion.
//!
//! For the normal-errors regression model, every full conditional posterior
//! depends on the data only through `XᵀX`, `XᵀY`, `YᵀY`, and the row count
//! `n`. All four are sums over rows, so a data set partitioned horizontally
//! into chunks `X₁..X_M`, `Y₁..Y_M` satisfies
//!
//! ```text
//! XᵀX = Σₘ XₘᵀXₘ     XᵀY = Σₘ XₘᵀYₘ     YᵀY = Σₘ YₘᵀYₘ
//! ```
//!
//! [`SummaryStatistics`] is that bundle. [`ingest`] streams delimited files
//! chunk by chunk, folding each chunk as it goes, so peak memory is
//! `O(chunk_rows · p)` regardless of file size. Statistics from separate
//! files, machines, or points in time combine with [`SummaryStatistics::merge`],
//! which is also the update path for previously persisted statistics.
//!
//! Accumulation is sequential in file order, chunk order, row order, making
//! results byte-reproducible for a given input. A returned
//! [`SummaryStatistics`] is never mutated again, so values move freely
//! between threads; concurrent [`ingest`] calls over different files are
//! fine and their results combine with merge.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Version written to and required from persisted-statistics files.
pub const STATS_SCHEMA_VERSION: u64 = 1;

/// The mergeable sufficient-statistic bundle.
///
/// `p` counts design columns including any intercept column. When
/// `intercept` is true, column 0 of the design is the constant-1 column, so
/// `xtx[0][0] == n` exactly and `xtx[0][j]` is the column-j sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStatistics {
    p: usize,
    intercept: bool,
    n: u64,
    xtx: Mat,
    xty: Vec<f64>,
    yty: f64,
}

impl SummaryStatistics {
    /// Empty statistics for a `p`-column design.
    pub fn zeros(p: usize, intercept: bool) -> Self {
        assert!(p >= 1, "design must have at least one column");
        SummaryStatistics {
            p,
            intercept,
            n: 0,
            xtx: Mat::zeros(p, p),
            xty: vec![0.0; p],
            yty: 0.0,
        }
    }

    /// Builds statistics from explicit components, checking shape and
    /// exact symmetry. Intended for tests and external producers.
    pub fn from_parts(
        p: usize,
        intercept: bool,
        n: u64,
        xtx: Mat,
        xty: Vec<f64>,
        yty: f64,
    ) -> Result<Self> {
        if xtx.rows() != p || xtx.cols() != p {
            return Err(Error::ShapeMismatch {
                context: "SummaryStatistics xtx",
                expected: p,
                got: xtx.rows().max(xtx.cols()),
            });
        }
        if xty.len() != p {
            return Err(Error::ShapeMismatch {
                context: "SummaryStatistics xty",
                expected: p,
                got: xty.len(),
            });
        }
        let (i, j, dev) = xtx.max_asymmetry();
        if dev > 0.0 {
            return Err(Error::NotSymmetric {
                i,
                j,
                a: xtx[(i, j)],
                b: xtx[(j, i)],
            });
        }
        Ok(SummaryStatistics {
            p,
            intercept,
            n,
            xtx,
            xty,
            yty,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn intercept(&self) -> bool {
        self.intercept
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn xtx(&self) -> &Mat {
        &self.xtx
    }

    pub fn xty(&self) -> &[f64] {
        &self.xty
    }

    pub fn yty(&self) -> f64 {
        self.yty
    }

    /// Folds one dense chunk (`m` rows of `p` design values plus `m`
    /// responses) into the statistics.
    pub fn fold_chunk(&mut self, x_chunk: &Mat, y_chunk: &[f64]) -> Result<()> {
        if x_chunk.cols() != self.p {
            return Err(Error::ShapeMismatch {
                context: "fold_chunk design width",
                expected: self.p,
                got: x_chunk.cols(),
            });
        }
        if y_chunk.len() != x_chunk.rows() {
            return Err(Error::ShapeMismatch {
                context: "fold_chunk response length",
                expected: x_chunk.rows(),
                got: y_chunk.len(),
            });
        }
        self.fold_flat(x_chunk.as_slice(), x_chunk.rows(), y_chunk);
        Ok(())
    }

    /// Core fold over a row-major `m × p` buffer. Accumulates the upper
    /// triangle of `XᵀX` then mirrors it, so `xtx` stays exactly symmetric
    /// after every chunk.
    fn fold_flat(&mut self, x: &[f64], m: usize, y: &[f64]) {
        let p = self.p;
        debug_assert_eq!(x.len(), m * p);
        debug_assert_eq!(y.len(), m);
        for r in 0..m {
            let row = &x[r * p..(r + 1) * p];
            let yr = y[r];
            for i in 0..p {
                let xi = row[i];
                self.xty[i] += xi * yr;
                let upper = &mut self.xtx.row_mut(i)[i..];
                for (acc, &xj) in upper.iter_mut().zip(&row[i..]) {
                    *acc += xi * xj;
                }
            }
            self.yty += yr * yr;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                self.xtx[(j, i)] = self.xtx[(i, j)];
            }
        }
        self.n += m as u64;
    }

    /// Componentwise sum of two compatible bundles.
    ///
    /// This is the update path's guard: combining statistics with a
    /// different design width or intercept convention is an error.
    pub fn merge(&self, other: &SummaryStatistics) -> Result<SummaryStatistics> {
        if self.p != other.p {
            return Err(Error::IncompatibleSummaries {
                reason: format!("design widths differ: {} vs {}", self.p, other.p),
            });
        }
        if self.intercept != other.intercept {
            return Err(Error::IncompatibleSummaries {
                reason: format!(
                    "intercept conventions differ: {} vs {}",
                    self.intercept, other.intercept
                ),
            });
        }
        let mut xtx = self.xtx.add(&other.xtx);
        xtx.symmetrize();
        let xty = self
            .xty
            .iter()
            .zip(&other.xty)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SummaryStatistics {
            p: self.p,
            intercept: self.intercept,
            n: self.n + other.n,
            xtx,
            xty,
            yty: self.yty + other.yty,
        })
    }

    /// Writes the statistics as a plain-text document, decimals serialized
    /// with 17 significant digits so that [`load`] reproduces the values
    /// bit for bit.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        writeln!(out, "schema_version {STATS_SCHEMA_VERSION}").unwrap();
        writeln!(out, "p {}", self.p).unwrap();
        writeln!(out, "intercept {}", self.intercept).unwrap();
        writeln!(out, "n {}", self.n).unwrap();
        writeln!(out, "yty {}", fmt_full(self.yty)).unwrap();
        out.push_str("xty");
        for v in &self.xty {
            out.push(' ');
            out.push_str(&fmt_full(*v));
        }
        out.push('\n');
        out.push_str("xtx");
        for v in self.xtx.as_slice() {
            out.push(' ');
            out.push_str(&fmt_full(*v));
        }
        out.push('\n');
        std::fs::write(path, out).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// 17 significant digits, enough to round-trip any f64 exactly.
pub(crate) fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads statistics persisted by [`SummaryStatistics::save`].
pub fn load(path: &Path) -> Result<SummaryStatistics> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let corrupt = |reason: &str| Error::CorruptStatsFile {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut lines = text.lines();
    let mut field = |name: &str| -> Result<Vec<String>> {
        let line = lines
            .next()
            .ok_or_else(|| corrupt(&format!("missing field {name}")))?;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some(k) if k == name => Ok(toks.map(str::to_string).collect()),
            Some(k) => Err(corrupt(&format!("expected field {name}, found {k}"))),
            None => Err(corrupt(&format!("empty line where field {name} expected"))),
        }
    };
    let one = |vals: Vec<String>, name: &str| -> Result<String> {
        if vals.len() != 1 {
            return Err(corrupt(&format!(
                "field {name} must have exactly one value"
            )));
        }
        Ok(vals.into_iter().next().unwrap())
    };

    let version: u64 = one(field("schema_version")?, "schema_version")?
        .parse()
        .map_err(|_| corrupt("schema_version is not an integer"))?;
    if version != STATS_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: version,
            supported: STATS_SCHEMA_VERSION,
        });
    }
    let p: usize = one(field("p")?, "p")?
        .parse()
        .map_err(|_| corrupt("p is not an integer"))?;
    if p == 0 {
        return Err(corrupt("p must be positive"));
    }
    let intercept: bool = one(field("intercept")?, "intercept")?
        .parse()
        .map_err(|_| corrupt("intercept is not a boolean"))?;
    let n: u64 = one(field("n")?, "n")?
        .parse()
        .map_err(|_| corrupt("n is not an integer"))?;
    let yty: f64 = one(field("yty")?, "yty")?
        .parse()
        .map_err(|_| corrupt("yty is not a number"))?;
    if !yty.is_finite() || yty < 0.0 {
        return Err(corrupt("yty must be finite and non-negative"));
    }

    let parse_all = |vals: Vec<String>, want: usize, name: &str| -> Result<Vec<f64>> {
        if vals.len() != want {
            return Err(corrupt(&format!(
                "field {name} has {} values, expected {want}",
                vals.len()
            )));
        }
        vals.iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| corrupt(&format!("field {name} has non-numeric value {s:?}")))
            })
            .collect()
    };
    let xty = parse_all(field("xty")?, p, "xty")?;
    let xtx_vals = parse_all(field("xtx")?, p * p, "xtx")?;
    let xtx = Mat::from_rows(p, p, &xtx_vals);

    // Symmetry is checked at zero tolerance: save writes full precision, so
    // any deviation means the file was edited or damaged.
    let (i, j, dev) = xtx.max_asymmetry();
    if dev > 0.0 {
        return Err(Error::AsymmetricStats {
            path: path.to_path_buf(),
            i,
            j,
            a: xtx[(i, j)],
            b: xtx[(j, i)],
        });
    }

    Ok(SummaryStatistics {
        p,
        intercept,
        n,
        xtx,
        xty,
        yty,
    })
}

/// Ingestion configuration: which files, which columns, and how large the
/// streaming chunks are. Column indices are 1-based, matching how delimited
/// data is usually described; the first chunk of each file reads
/// `first_rows` rows and every later chunk reads `next_rows`.
#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub files: Vec<PathBuf>,
    pub predictor_cols: Vec<usize>,
    pub response_col: usize,
    pub first_rows: usize,
    pub next_rows: usize,
    pub skip_rows: u64,
    pub delimiter: char,
    pub add_intercept: bool,
}

impl IngestConfig {
    pub fn new(files: Vec<PathBuf>, predictor_cols: Vec<usize>, response_col: usize) -> Self {
        IngestConfig {
            files,
            predictor_cols,
            response_col,
            first_rows: 100_000,
            next_rows: 100_000,
            skip_rows: 0,
            delimiter: ',',
            add_intercept: true,
        }
    }

    /// Design width, including the intercept column when configured.
    pub fn design_width(&self) -> usize {
        self.predictor_cols.len() + usize::from(self.add_intercept)
    }

    fn validate(&self) -> Result<()> {
        if self.predictor_cols.is_empty() {
            return Err(Error::InvalidConfig(
                "predictor-cols must be non-empty".into(),
            ));
        }
        let mut seen = self.predictor_cols.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.predictor_cols.len() {
            return Err(Error::InvalidConfig(
                "predictor-cols must be distinct".into(),
            ));
        }
        if self.predictor_cols.contains(&0) || self.response_col == 0 {
            return Err(Error::InvalidConfig("column indices are 1-based".into()));
        }
        if self.predictor_cols.contains(&self.response_col) {
            return Err(Error::InvalidConfig(format!(
                "response-col {} also appears in predictor-cols",
                self.response_col
            )));
        }
        if self.first_rows == 0 || self.next_rows == 0 {
            return Err(Error::InvalidConfig(
                "first-rows and next-rows must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Streams every configured file and returns the fold of all their rows,
/// optionally merged onto previously computed statistics.
///
/// Peak resident memory is `O(max(first_rows, next_rows) · p)` plus the
/// `O(p²)` accumulator, independent of total input size.
pub fn ingest(
    config: &IngestConfig,
    update: Option<SummaryStatistics>,
) -> Result<SummaryStatistics> {
    config.validate()?;
    let p = config.design_width();
    let mut acc = SummaryStatistics::zeros(p, config.add_intercept);
    for path in &config.files {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let reader = BufReader::with_capacity(1 << 16, file);
        fold_reader(&mut acc, reader, &path.display().to_string(), config)?;
    }
    match update {
        Some(prev) => {
            // Shape guard before merging, reported as the update-path error.
            if prev.p() != p || prev.intercept() != config.add_intercept {
                return Err(Error::IncompatibleSummaries {
                    reason: format!(
                        "update statistics have p={}, intercept={}, but the configuration \
                         produces p={}, intercept={}",
                        prev.p(),
                        prev.intercept(),
                        p,
                        config.add_intercept
                    ),
                });
            }
            prev.merge(&acc)
        }
        None => Ok(acc),
    }
}

/// Folds one delimited byte stream into `acc` using the column/chunk
/// settings of `config`. `label` names the source in error messages.
///
/// This is the entry point for non-file sources; [`ingest`] wraps it for
/// paths. Chunking restarts per stream: the first chunk holds
/// `first_rows` rows, later chunks `next_rows`.
pub fn fold_reader<R: BufRead>(
    acc: &mut SummaryStatistics,
    mut reader: R,
    label: &str,
    config: &IngestConfig,
) -> Result<()> {
    config.validate()?;
    let p = config.design_width();
    if acc.p() != p || acc.intercept() != config.add_intercept {
        return Err(Error::IncompatibleSummaries {
            reason: format!(
                "accumulator has p={}, intercept={}, but the configuration produces p={}, intercept={}",
                acc.p(),
                acc.intercept(),
                p,
                config.add_intercept
            ),
        });
    }

    // slot_of[file column (0-based)] = index into the design row, with the
    // response mapped to the final slot.
    let k = config.predictor_cols.len();
    let offset = usize::from(config.add_intercept);
    let max_col = config
        .predictor_cols
        .iter()
        .chain(std::iter::once(&config.response_col))
        .copied()
        .max()
        .unwrap();
    let mut slot_of: Vec<Option<usize>> = vec![None; max_col];
    for (slot, &col) in config.predictor_cols.iter().enumerate() {
        slot_of[col - 1] = Some(offset + slot);
    }
    slot_of[config.response_col - 1] = Some(p);
    let needed = k + 1;

    let chunk_capacity = config.first_rows.max(config.next_rows);
    let mut x_buf: Vec<f64> = Vec::with_capacity(chunk_capacity * p);
    let mut y_buf: Vec<f64> = Vec::with_capacity(chunk_capacity);
    let mut row_scratch = vec![0.0f64; p + 1];
    let mut line = String::new();
    let mut row_no: u64 = 0;
    let mut first_chunk = true;

    loop {
        line.clear();
        let read = reader.read_line(&mut line).map_err(|source| Error::Io {
            path: PathBuf::from(label),
            source,
        })?;
        if read == 0 {
            break;
        }
        row_no += 1;
        if row_no <= config.skip_rows {
            continue;
        }
        let trimmed = line.trim_end_matches(['\n', '\r']);
        if trimmed.is_empty() {
            // Blank lines carry no observation; skipping them keeps n honest.
            continue;
        }

        let mut seen = 0usize;
        for (ci, field) in trimmed.split(config.delimiter).enumerate() {
            if ci >= max_col {
                break;
            }
            if let Some(slot) = slot_of[ci] {
                let field = field.trim();
                let value = field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::NonNumericField {
                        file: label.to_string(),
                        row: row_no,
                        column: ci + 1,
                        value: field.to_string(),
                    })?;
                row_scratch[slot] = value;
                seen += 1;
                if seen == needed {
                    break;
                }
            }
        }
        if seen < needed {
            return Err(Error::TooFewColumns {
                file: label.to_string(),
                row: row_no,
                found: trimmed.split(config.delimiter).count(),
                needed: max_col,
            });
        }

        if config.add_intercept {
            row_scratch[0] = 1.0;
        }
        x_buf.extend_from_slice(&row_scratch[..p]);
        y_buf.push(row_scratch[p]);

        let target = if first_chunk {
            config.first_rows
        } else {
            config.next_rows
        };
        if y_buf.len() == target {
            acc.fold_flat(&x_buf, y_buf.len(), &y_buf);
            x_buf.clear();
            y_buf.clear();
            first_chunk = false;
        }
    }
    if !y_buf.is_empty() {
        acc.fold_flat(&x_buf, y_buf.len(), &y_buf);
    }
    Ok(())
}
