//! Synthetic regression data, streamed to disk in bounded memory.
//!
//! Predictors are multivariate normal with the compound-symmetry covariance
//! Σ (unit diagonal, constant off-diagonal ρ), responses follow
//! `Y = β₀ + β₁x₁ + … + βₖxₖ + ε` with `ε ~ Normal(0, σ²)`. Rows are
//! written predictors first, response last, so an ingestion run with
//! `predictor_cols = 1..k, response_col = k+1` replays directly.
//!
//! The Cholesky factor of Σ is computed once in closed form and reused for
//! every row; generation is chunked so memory stays at
//! `O(chunk_rows · k)` no matter how large `n` is.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::distributions::RngStream;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::summaries::fmt_full;

/// Simulation settings. `beta` holds the k+1 true coefficients (intercept
/// first); when absent they are drawn from a standard normal.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub n: u64,
    pub k: usize,
    pub rho: f64,
    pub sigma_sq: f64,
    pub seed: u64,
    pub beta: Option<Vec<f64>>,
    pub chunk_rows: usize,
}

impl SimulationConfig {
    pub fn new(n: u64, k: usize) -> Self {
        SimulationConfig {
            n,
            k,
            rho: 0.2,
            sigma_sq: 1.0,
            seed: 0,
            beta: None,
            chunk_rows: 100_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::InvalidConfig("n and k must be at least 1".into()));
        }
        if self.chunk_rows == 0 {
            return Err(Error::InvalidConfig("chunk-rows must be at least 1".into()));
        }
        if !self.sigma_sq.is_finite() || self.sigma_sq < 0.0 {
            return Err(Error::InvalidConfig(
                "sigma-sq must be finite and non-negative".into(),
            ));
        }
        check_rho(self.k, self.rho)?;
        if let Some(beta) = &self.beta {
            if beta.len() != self.k + 1 {
                return Err(Error::ShapeMismatch {
                    context: "true beta",
                    expected: self.k + 1,
                    got: beta.len(),
                });
            }
        }
        Ok(())
    }
}

/// Σ = (1−ρ)I + ρ·11ᵀ is positive definite iff ρ ∈ (−1/(k−1), 1).
fn check_rho(k: usize, rho: f64) -> Result<()> {
    if !rho.is_finite() || rho >= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "rho = {rho} must be strictly below 1"
        )));
    }
    if k >= 2 && rho <= -1.0 / (k as f64 - 1.0) {
        return Err(Error::InvalidConfig(format!(
            "rho = {rho} makes the predictor covariance indefinite for k = {k}; \
             need rho > {}",
            -1.0 / (k as f64 - 1.0)
        )));
    }
    Ok(())
}

/// Closed-form Cholesky factor of the compound-symmetry covariance.
///
/// Eliminating one column at a time leaves a matrix that is again constant
/// on and off the diagonal, so the factor has a constant value below the
/// diagonal in each column and only the pair (diagonal α, off-diagonal γ)
/// has to be tracked:
///
/// ```text
/// L[j][j] = √αⱼ,  L[i][j] = γⱼ/√αⱼ (i > j)
/// αⱼ₊₁ = αⱼ − γⱼ²/αⱼ,  γⱼ₊₁ = γⱼ − γⱼ²/αⱼ
/// ```
pub fn compound_symmetry_cholesky(k: usize, rho: f64) -> Result<Mat> {
    check_rho(k, rho)?;
    let mut l = Mat::zeros(k, k);
    let mut alpha = 1.0f64;
    let mut gamma = rho;
    for j in 0..k {
        if alpha <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: alpha,
            });
        }
        let root = alpha.sqrt();
        l[(j, j)] = root;
        let below = gamma / root;
        for i in (j + 1)..k {
            l[(i, j)] = below;
        }
        let shrink = gamma * gamma / alpha;
        alpha -= shrink;
        gamma -= shrink;
    }
    Ok(l)
}

/// Writes `n` simulated rows (k predictors then the response) to
/// `out_path` and the true parameters to the truth sidecar, returning the
/// true β (β₀ included).
///
/// When `truth_path` is `None` the sidecar lands next to the data as
/// `<out_path>.truth`. The same seed always produces byte-identical files:
/// the k+1 β normals are drawn first (when β is not supplied), then each
/// row consumes k predictor normals and one error normal.
pub fn simulate_dataset(
    config: &SimulationConfig,
    out_path: &Path,
    truth_path: Option<&Path>,
) -> Result<Vec<f64>> {
    config.validate()?;
    let k = config.k;
    let chol = compound_symmetry_cholesky(k, config.rho)?;
    let mut rng = RngStream::new(config.seed);

    let beta = match &config.beta {
        Some(beta) => beta.clone(),
        None => (0..=k).map(|_| rng.standard_normal()).collect(),
    };
    let sigma = config.sigma_sq.sqrt();

    let file = File::create(out_path).map_err(|source| Error::Io {
        path: out_path.to_path_buf(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    let mut z = vec![0.0f64; k];
    let mut x = vec![0.0f64; k];
    let mut chunk = String::with_capacity(config.chunk_rows.min(1 << 16) * (k + 1) * 20);

    let mut remaining = config.n;
    while remaining > 0 {
        let rows = remaining.min(config.chunk_rows as u64);
        chunk.clear();
        for _ in 0..rows {
            for zi in z.iter_mut() {
                *zi = rng.standard_normal();
            }
            // x = L·z, exploiting the lower-triangular factor.
            for i in 0..k {
                let mut acc = 0.0;
                for j in 0..=i {
                    acc += chol[(i, j)] * z[j];
                }
                x[i] = acc;
            }
            let eps = sigma * rng.standard_normal();
            let mut y = beta[0];
            for j in 0..k {
                y += beta[j + 1] * x[j];
            }
            y += eps;
            for xi in &x {
                write!(chunk, "{xi},").unwrap();
            }
            writeln!(chunk, "{y}").unwrap();
        }
        writer
            .write_all(chunk.as_bytes())
            .map_err(|source| Error::Io {
                path: out_path.to_path_buf(),
                source,
            })?;
        remaining -= rows;
    }
    writer.flush().map_err(|source| Error::Io {
        path: out_path.to_path_buf(),
        source,
    })?;

    let sidecar: PathBuf = match truth_path {
        Some(p) => p.to_path_buf(),
        None => {
            let mut os = out_path.as_os_str().to_os_string();
            os.push(".truth");
            PathBuf::from(os)
        }
    };
    write_truth(&sidecar, &beta, config.sigma_sq)?;
    Ok(beta)
}

/// Truth sidecar: `parameter,value` rows for β₀..βₖ and σ².
fn write_truth(path: &Path, beta: &[f64], sigma_sq: f64) -> Result<()> {
    let mut out = String::from("parameter,value\n");
    for (j, b) in beta.iter().enumerate() {
        writeln!(out, "beta{j},{}", fmt_full(*b)).unwrap();
    }
    writeln!(out, "sigma_sq,{}", fmt_full(sigma_sq)).unwrap();
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a truth sidecar back as (β, σ²).
pub fn read_truth(path: &Path) -> Result<(Vec<f64>, f64)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let corrupt = |reason: &str| Error::CorruptStatsFile {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut beta = Vec::new();
    let mut sigma_sq = None;
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "parameter,value" {
                return Err(corrupt("missing parameter,value header"));
            }
            continue;
        }
        let (name, value) = line
            .split_once(',')
            .ok_or_else(|| corrupt("malformed truth row"))?;
        let value: f64 = value
            .parse()
            .map_err(|_| corrupt(&format!("non-numeric truth value for {name}")))?;
        if name == "sigma_sq" {
            sigma_sq = Some(value);
        } else if name == format!("beta{}", beta.len()) {
            beta.push(value);
        } else {
            return Err(corrupt(&format!("unexpected truth row {name}")));
        }
    }
    match sigma_sq {
        Some(s) if !beta.is_empty() => Ok((beta, s)),
        _ => Err(corrupt("truth file is incomplete")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CholeskyFactor;

    #[test]
    fn closed_form_factor_matches_numeric_cholesky() {
        for &(k, rho) in &[(1usize, 0.0), (2, 0.2), (3, 0.5), (5, -0.2), (8, 0.9)] {
            let closed = compound_symmetry_cholesky(k, rho).unwrap();
            let mut sigma = Mat::zeros(k, k);
            for i in 0..k {
                for j in 0..k {
                    sigma[(i, j)] = if i == j { 1.0 } else { rho };
                }
            }
            let numeric = CholeskyFactor::new(&sigma).unwrap();
            for i in 0..k {
                for j in 0..=i {
                    let a = closed[(i, j)];
                    let b = numeric.lower()[(i, j)];
                    assert!(
                        (a - b).abs() < 1e-13,
                        "k={k} rho={rho} entry ({i},{j}): {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn factor_multiplies_back_at_k_1000() {
        let k = 1000;
        let rho = 0.2;
        let l = compound_symmetry_cholesky(k, rho).unwrap();
        for i in 0..k {
            for j in 0..=i {
                let mut acc = 0.0;
                for m in 0..=j {
                    acc += l[(i, m)] * l[(j, m)];
                }
                let want = if i == j { 1.0 } else { rho };
                assert!(
                    (acc - want).abs() < 1e-12,
                    "LLᵀ at ({i},{j}) = {acc}, want {want}"
                );
            }
        }
    }

    #[test]
    fn rho_bounds_enforced() {
        assert!(check_rho(10, 0.2).is_ok());
        assert!(check_rho(10, -0.11).is_ok());
        assert!(check_rho(10, -1.0 / 9.0).is_err());
        assert!(check_rho(10, 1.0).is_err());
        assert!(check_rho(4, -0.5).is_err());
        assert!(check_rho(4, -0.25).is_ok());
    }

    #[test]
    fn noiseless_uncorrelated_rows_reproduce_x_beta() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("sim.csv");
        let mut config = SimulationConfig::new(50, 3);
        config.rho = 0.0;
        config.sigma_sq = 0.0;
        config.beta = Some(vec![0.5, -1.0, 2.0, 0.25]);
        config.seed = 9;
        let beta = simulate_dataset(&config, &data, None).unwrap();
        assert_eq!(beta, vec![0.5, -1.0, 2.0, 0.25]);

        let text = std::fs::read_to_string(&data).unwrap();
        let mut rows = 0;
        for line in text.lines() {
            let vals: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            assert_eq!(vals.len(), 4);
            let mut y = beta[0];
            for j in 0..3 {
                y += beta[j + 1] * vals[j];
            }
            assert_eq!(vals[3], y, "row {rows} response mismatch");
            rows += 1;
        }
        assert_eq!(rows, 50);
    }

    #[test]
    fn same_seed_byte_identical_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let mut config = SimulationConfig::new(200, 4);
        config.seed = 31337;
        config.chunk_rows = 7; // awkward chunking must not change bytes
        simulate_dataset(&config, &a, None).unwrap();
        config.chunk_rows = 100_000;
        simulate_dataset(&config, &b, None).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn pairwise_correlations_near_rho() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("sim.csv");
        let k = 10;
        let mut config = SimulationConfig::new(100_000, k);
        config.rho = 0.2;
        config.seed = 77;
        simulate_dataset(&config, &data, None).unwrap();

        let text = std::fs::read_to_string(&data).unwrap();
        let mut n = 0.0f64;
        let mut sums = vec![0.0f64; k];
        let mut cross = Mat::zeros(k, k);
        for line in text.lines() {
            let vals: Vec<f64> = line
                .split(',')
                .take(k)
                .map(|v| v.parse().unwrap())
                .collect();
            n += 1.0;
            for i in 0..k {
                sums[i] += vals[i];
                for j in 0..k {
                    cross[(i, j)] += vals[i] * vals[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let cov = cross[(i, j)] / n - (sums[i] / n) * (sums[j] / n);
                let var_i = cross[(i, i)] / n - (sums[i] / n) * (sums[i] / n);
                let var_j = cross[(j, j)] / n - (sums[j] / n) * (sums[j] / n);
                let corr = cov / (var_i * var_j).sqrt();
                assert!(
                    (corr - 0.2).abs() < 0.02,
                    "corr({i},{j}) = {corr}, want 0.2 ± 0.02"
                );
            }
        }
    }

    #[test]
    fn truth_sidecar_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("sim.csv");
        let truth = dir.path().join("sim.truth");
        let mut config = SimulationConfig::new(10, 2);
        config.sigma_sq = 2.5;
        config.seed = 5;
        let beta = simulate_dataset(&config, &data, Some(&truth)).unwrap();
        let (read_beta, read_sigma) = read_truth(&truth).unwrap();
        assert_eq!(read_beta, beta);
        assert_eq!(read_sigma, 2.5);
        // Default sidecar path.
        simulate_dataset(&config, &data, None).unwrap();
        assert!(dir.path().join("sim.csv.truth").exists());
    }

    #[test]
    fn bad_configs_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("x.csv");
        let mut config = SimulationConfig::new(10, 4);
        config.rho = -0.5;
        assert!(matches!(
            simulate_dataset(&config, &out, None),
            Err(Error::InvalidConfig(_))
        ));
        let mut config = SimulationConfig::new(10, 2);
        config.beta = Some(vec![1.0, 2.0]);
        assert!(matches!(
            simulate_dataset(&config, &out, None),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
