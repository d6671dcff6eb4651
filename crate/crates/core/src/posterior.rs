//! Posterior summaries and output files.
//!
//! [`summarize`] reduces a chain to per-parameter empirical mean, standard
//! deviation, naive standard error (SD/√T over retained draws), and
//! quantiles. Quantiles use linear interpolation at position
//! `1 + prob·(T − 1)` over the sorted sample. Equal-tail credible intervals
//! come straight from the quantile pairs.
//!
//! [`export`] writes the retained draws, the summary table, and per-parameter
//! plot data (history and a Gaussian kernel-density grid) as comma-delimited
//! text with one header row and 17-significant-digit decimals, so that
//! summaries recomputed from the files match the in-memory ones.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::gibbs::{ChainOutput, DrawMatrix};
use crate::summaries::fmt_full;

/// Default quantile probabilities.
pub const DEFAULT_PROBS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

/// Grid size for kernel-density plot data.
pub const DENSITY_GRID_POINTS: usize = 512;

/// Per-parameter posterior summary with burn-in already applied.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub naive_se: f64,
    /// (probability, quantile) pairs in ascending probability order.
    pub quantiles: Vec<(f64, f64)>,
}

/// Scalar parameter names of a chain, in draw-file column order:
/// `beta0..betak`, `sigmasq`, then `mu0..muk` when present. The flattened
/// C⁻¹ columns (`cinv{i}_{j}`, row-major) follow in the draws file but are
/// not summarized.
pub fn scalar_parameter_names(chain: &ChainOutput) -> Vec<String> {
    let p = chain.p();
    let mut names: Vec<String> = (0..p).map(|j| format!("beta{j}")).collect();
    names.push("sigmasq".to_string());
    if chain.mu.is_some() {
        names.extend((0..p).map(|j| format!("mu{j}")));
    }
    names
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidConfig("probs must be non-empty".into()));
    }
    for pair in probs.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidConfig(
                "probs must be strictly ascending".into(),
            ));
        }
    }
    if probs.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::InvalidConfig(
            "probs must lie strictly inside (0, 1)".into(),
        ));
    }
    Ok(())
}

/// Quantile by linear interpolation at position `1 + prob·(len − 1)` over
/// an already sorted sample.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let t = sorted.len();
    if t == 1 {
        return sorted[0];
    }
    let pos = prob * (t - 1) as f64; // 0-based fractional index
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= t {
        sorted[t - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

fn summarize_column(name: &str, draws: &[f64], probs: &[f64]) -> PosteriorSummary {
    let t = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / t;
    let var = draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1.0);
    let sd = var.sqrt();
    let naive_se = sd / t.sqrt();
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("draws must not contain NaN"));
    let quantiles = probs
        .iter()
        .map(|&p| (p, quantile_sorted(&sorted, p)))
        .collect();
    PosteriorSummary {
        name: name.to_string(),
        mean,
        sd,
        naive_se,
        quantiles,
    }
}

/// Summaries for arbitrary named draw columns after discarding the first
/// `burn_in` rows.
pub fn summarize_named(
    names: &[String],
    draws: &DrawMatrix,
    burn_in: usize,
    probs: &[f64],
) -> Result<Vec<PosteriorSummary>> {
    if burn_in >= draws.rows() {
        return Err(Error::BurnInTooLarge {
            burn_in,
            draws: draws.rows(),
        });
    }
    let retained = draws.rows() - burn_in;
    if retained < 2 {
        return Err(Error::TooFewDraws(retained));
    }
    validate_probs(probs)?;
    let summaries = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col: Vec<f64> = (burn_in..draws.rows()).map(|i| draws.row(i)[j]).collect();
            summarize_column(name, &col, probs)
        })
        .collect();
    Ok(summaries)
}

/// Summaries for every scalar parameter of a chain (β coordinates, σ²,
/// and μ coordinates when present), retaining draws `burn_in+1 .. T`.
pub fn summarize(
    chain: &ChainOutput,
    burn_in: usize,
    probs: &[f64],
) -> Result<Vec<PosteriorSummary>> {
    let t = chain.t_samples();
    if burn_in >= t {
        return Err(Error::BurnInTooLarge { burn_in, draws: t });
    }
    if t - burn_in < 2 {
        return Err(Error::TooFewDraws(t - burn_in));
    }
    validate_probs(probs)?;
    let p = chain.p();
    let mut out = Vec::new();
    for j in 0..p {
        let col: Vec<f64> = (burn_in..t).map(|i| chain.beta.row(i)[j]).collect();
        out.push(summarize_column(&format!("beta{j}"), &col, probs));
    }
    out.push(summarize_column(
        "sigmasq",
        &chain.sigmasq[burn_in..],
        probs,
    ));
    if let Some(mu) = &chain.mu {
        for j in 0..p {
            let col: Vec<f64> = (burn_in..t).map(|i| mu.row(i)[j]).collect();
            out.push(summarize_column(&format!("mu{j}"), &col, probs));
        }
    }
    Ok(out)
}

/// Equal-tail credible interval: the `(1−level)/2` and `(1+level)/2`
/// quantiles, which must be present in the summary.
pub fn credible_interval(summary: &PosteriorSummary, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "credible level must be in (0,1), got {level}"
        )));
    }
    let lo_p = (1.0 - level) / 2.0;
    let hi_p = (1.0 + level) / 2.0;
    let lookup = |target: f64| -> Result<f64> {
        summary
            .quantiles
            .iter()
            .find(|(p, _)| (p - target).abs() < 1e-9)
            .map(|(_, q)| *q)
            .ok_or(Error::MissingQuantile(target))
    };
    Ok((lookup(lo_p)?, lookup(hi_p)?))
}

/// Destination paths for [`export`].
#[derive(Debug, Clone)]
pub struct ExportPaths {
    pub draws: PathBuf,
    pub summary: PathBuf,
    /// Directory for per-parameter history/density files; skipped when None.
    pub plot_dir: Option<PathBuf>,
}

/// Writes the retained draws, summary table, and plot data for a chain.
pub fn export(chain: &ChainOutput, burn_in: usize, paths: &ExportPaths) -> Result<()> {
    write_draws(chain, burn_in, &paths.draws)?;
    let summaries = summarize(chain, burn_in, &DEFAULT_PROBS)?;
    write_summaries(&summaries, &paths.summary)?;
    if let Some(dir) = &paths.plot_dir {
        let (names, table) = scalar_table(chain);
        write_plot_data(&names, &table, burn_in, dir)?;
    }
    Ok(())
}

/// All draw columns of a chain, including the flattened C⁻¹ draws.
pub fn chain_column_names(chain: &ChainOutput) -> Vec<String> {
    let mut names = scalar_parameter_names(chain);
    if chain.cinv.is_some() {
        let p = chain.p();
        for i in 0..p {
            for j in 0..p {
                names.push(format!("cinv{i}_{j}"));
            }
        }
    }
    names
}

/// Scalar draw columns (β, σ², μ) as a table; the C⁻¹ draws are left out,
/// so this stays small even for long matrix-bearing chains.
fn scalar_table(chain: &ChainOutput) -> (Vec<String>, DrawMatrix) {
    let names = scalar_parameter_names(chain);
    let t = chain.t_samples();
    let mut table = DrawMatrix::with_capacity(t, names.len());
    let mut row: Vec<f64> = Vec::with_capacity(names.len());
    for i in 0..t {
        row.clear();
        row.extend_from_slice(chain.beta.row(i));
        row.push(chain.sigmasq[i]);
        if let Some(mu) = &chain.mu {
            row.extend_from_slice(mu.row(i));
        }
        table.push_row(&row);
    }
    (names, table)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes one row per retained iteration, columns named
/// `beta0..betak, sigmasq [, mu0.., cinv0_0..]`. Rows are streamed, so
/// memory stays flat even for long matrix-bearing chains.
pub fn write_draws(chain: &ChainOutput, burn_in: usize, path: &Path) -> Result<()> {
    use std::io::Write as _;
    let t = chain.t_samples();
    if burn_in >= t {
        return Err(Error::BurnInTooLarge { burn_in, draws: t });
    }
    let names = chain_column_names(chain);
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = std::io::BufWriter::with_capacity(1 << 16, file);
    let mut line = String::with_capacity(names.len() * 26);
    let emit = |line: &mut String, values: &[f64]| {
        for v in values {
            if !line.is_empty() {
                line.push(',');
            }
            line.push_str(&fmt_full(*v));
        }
    };
    writeln!(w, "{}", names.join(",")).map_err(io_err(path))?;
    for i in burn_in..t {
        line.clear();
        emit(&mut line, chain.beta.row(i));
        emit(&mut line, &[chain.sigmasq[i]]);
        if let Some(mu) = &chain.mu {
            emit(&mut line, mu.row(i));
        }
        if let Some(cinv) = &chain.cinv {
            emit(&mut line, cinv[i].entries().as_slice());
        }
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a draws file back into named columns.
pub fn read_draws(path: &Path) -> Result<(Vec<String>, DrawMatrix)> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::CorruptStatsFile {
        path: path.to_path_buf(),
        reason: "draws file is empty".into(),
    })?;
    let names: Vec<String> = header.split(',').map(str::to_string).collect();
    let cols = names.len();
    let mut table = DrawMatrix::with_capacity(128, cols);
    let mut row: Vec<f64> = Vec::with_capacity(cols);
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        row.clear();
        for field in line.split(',') {
            let v: f64 = field.parse().map_err(|_| Error::NonNumericField {
                file: path.display().to_string(),
                row: lineno as u64 + 2,
                column: row.len() + 1,
                value: field.to_string(),
            })?;
            row.push(v);
        }
        if row.len() != cols {
            return Err(Error::TooFewColumns {
                file: path.display().to_string(),
                row: lineno as u64 + 2,
                found: row.len(),
                needed: cols,
            });
        }
        table.push_row(&row);
    }
    Ok((names, table))
}

/// Writes the summary table: one row per parameter, quantile columns in
/// probability order.
pub fn write_summaries(summaries: &[PosteriorSummary], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("parameter,mean,sd,naive_se");
    if let Some(first) = summaries.first() {
        for (p, _) in &first.quantiles {
            write!(out, ",q{p}").unwrap();
        }
    }
    out.push('\n');
    for s in summaries {
        write!(
            out,
            "{},{},{},{}",
            s.name,
            fmt_full(s.mean),
            fmt_full(s.sd),
            fmt_full(s.naive_se)
        )
        .unwrap();
        for (_, q) in &s.quantiles {
            out.push(',');
            out.push_str(&fmt_full(*q));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// Silverman rule-of-thumb bandwidth: `0.9·min(sd, IQR/1.34)·T^(−1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let t = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / t;
    let sd = (samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1.0)).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * spread * t.powf(-0.2);
    if h > 0.0 {
        h
    } else {
        // Constant chain: any positive width gives a sane spike.
        (mean.abs() * 1e-9).max(1e-12)
    }
}

/// Gaussian kernel density over `grid_points` evenly spaced abscissae
/// spanning min..max padded by three bandwidths. Returns (grid, density).
pub fn kernel_density(samples: &[f64], grid_points: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(grid_points >= 2 && !samples.is_empty());
    let h = silverman_bandwidth(samples);
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = min - 3.0 * h;
    let hi = max + 3.0 * h;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let grid: Vec<f64> = (0..grid_points).map(|g| lo + g as f64 * step).collect();
    let density = grid
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for &s in samples {
                let u = (x - s) / h;
                acc += (-0.5 * u * u).exp();
            }
            acc * norm
        })
        .collect();
    (grid, density)
}

/// Writes `{name}_history.csv` (iteration, value) and `{name}_density.csv`
/// (x, density) for each named column. History iterations are absolute
/// (1-based), so with burn-in they start at `burn_in + 1`.
pub fn write_plot_data(
    names: &[String],
    draws: &DrawMatrix,
    burn_in: usize,
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (j, name) in names.iter().enumerate() {
        let col: Vec<f64> = (burn_in..draws.rows()).map(|i| draws.row(i)[j]).collect();
        let mut hist = String::with_capacity(col.len() * 28);
        hist.push_str("iteration,value\n");
        for (i, v) in col.iter().enumerate() {
            writeln!(hist, "{},{}", burn_in + i + 1, fmt_full(*v)).unwrap();
        }
        let hist_path = dir.join(format!("{name}_history.csv"));
        std::fs::write(&hist_path, hist).map_err(io_err(&hist_path))?;

        let (grid, density) = kernel_density(&col, DENSITY_GRID_POINTS);
        let mut dens = String::with_capacity(grid.len() * 52);
        dens.push_str("x,density\n");
        for (x, d) in grid.iter().zip(&density) {
            writeln!(dens, "{},{}", fmt_full(*x), fmt_full(*d)).unwrap();
        }
        let dens_path = dir.join(format!("{name}_density.csv"));
        std::fs::write(&dens_path, dens).map_err(io_err(&dens_path))?;
    }
    Ok(())
}
