//! Seeded sampling primitives for the Gibbs sampler: multivariate normal,
//! Wishart (Bartlett construction), and inverse gamma.
//!
//! All randomness flows through [`RngStream`], a ChaCha12 counter generator:
//! the same seed and the same call sequence reproduce the same draws on any
//! platform with IEEE-754 doubles. Independent streams for concurrent
//! chains come from [`RngStream::for_chain`], which keys the generator's
//! stream counter on the chain index.
//!
//! Parametrization note: [`sample_inverse_gamma`] takes a *rate* `r`, i.e.
//! density ∝ x^(−shape−1)·exp(−r/x), so the mean is `r/(shape − 1)`. A
//! conventional inverse-gamma prior written as IG(a, b) with scale b maps to
//! `shape = a, rate = 1/b` here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{Mat, SpdMatrix};

/// Deterministic random stream backing every sampler in this crate.
///
/// Single-owner: a stream must not be shared between threads.
/// Give each thread or chain its own via [`RngStream::for_chain`].
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
}

impl RngStream {
    /// Stream 0 for the given seed.
    pub fn new(seed: u64) -> Self {
        RngStream {
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for chain `chain_index` under the same seed.
    /// `for_chain(seed, 0)` is identical to `new(seed)`.
    pub fn for_chain(seed: u64, chain_index: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(chain_index);
        RngStream { rng }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Gamma draw in shape–rate form (density ∝ g^(shape−1)·exp(−rate·g)).
    pub fn gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
        if !(shape.is_finite() && shape > 0.0 && rate.is_finite() && rate > 0.0) {
            return Err(Error::Domain(format!(
                "gamma requires shape > 0 and rate > 0, got shape {shape}, rate {rate}"
            )));
        }
        let dist = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::Domain(format!("gamma({shape}, rate {rate}): {e}")))?;
        Ok(dist.sample(&mut self.rng))
    }

    /// Chi-square draw via gamma(ν/2, rate 1/2).
    pub fn chi_square(&mut self, df: f64) -> Result<f64> {
        self.gamma(df / 2.0, 0.5)
    }
}

/// Draws from Normal(mean, cov) as `mean + L·z` with `L·Lᵀ = cov` and `z`
/// a vector of independent standard normals.
pub fn sample_mvn(rng: &mut RngStream, mean: &[f64], cov: &SpdMatrix) -> Result<Vec<f64>> {
    if mean.len() != cov.dim() {
        return Err(Error::ShapeMismatch {
            context: "sample_mvn mean",
            expected: cov.dim(),
            got: mean.len(),
        });
    }
    let chol = cov.cholesky()?;
    let l = chol.lower();
    let p = cov.dim();
    let z: Vec<f64> = (0..p).map(|_| rng.standard_normal()).collect();
    let mut draw = mean.to_vec();
    for i in 0..p {
        let mut acc = 0.0;
        for j in 0..=i {
            acc += l[(i, j)] * z[j];
        }
        draw[i] += acc;
    }
    Ok(draw)
}

/// Draws from a Gaussian given in precision form: with `P = L·Lᵀ` the draw
/// is `mean + L⁻ᵀ·z`, which has covariance `P⁻¹` without ever forming the
/// inverse. This is how the Gibbs loop samples its conditionals.
pub fn sample_mvn_from_precision(
    rng: &mut RngStream,
    mean: &[f64],
    precision_factor: &crate::linalg::CholeskyFactor,
) -> Result<Vec<f64>> {
    if mean.len() != precision_factor.dim() {
        return Err(Error::ShapeMismatch {
            context: "sample_mvn_from_precision mean",
            expected: precision_factor.dim(),
            got: mean.len(),
        });
    }
    let p = mean.len();
    let z: Vec<f64> = (0..p).map(|_| rng.standard_normal()).collect();
    let u = precision_factor.solve_upper(&z);
    Ok(mean.iter().zip(u).map(|(m, v)| m + v).collect())
}

/// Draws from Wishart(df, scale) via the Bartlett construction.
///
/// With `L = chol(scale)` and `A` lower triangular where
/// `A[i][i] = sqrt(χ²(df − i))` and `A[i][j] ~ Normal(0,1)` for `i > j`,
/// the draw is `(LA)(LA)ᵀ`, which is SPD by construction for `df ≥ dim`.
pub fn sample_wishart(rng: &mut RngStream, df: f64, scale: &SpdMatrix) -> Result<SpdMatrix> {
    let d = scale.dim();
    if df < d as f64 {
        return Err(Error::Domain(format!(
            "wishart requires df >= dim, got df {df} for dim {d}"
        )));
    }
    let l = scale.cholesky()?.lower();

    let mut a = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..i {
            a[(i, j)] = rng.standard_normal();
        }
        a[(i, i)] = rng.chi_square(df - i as f64)?.sqrt();
    }

    // B = L·A, lower triangular.
    let mut b = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let mut acc = 0.0;
            for m in j..=i {
                acc += l[(i, m)] * a[(m, j)];
            }
            b[(i, j)] = acc;
        }
    }
    // Draw = B·Bᵀ, filled symmetrically.
    let mut w = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let mut acc = 0.0;
            for m in 0..=j.min(i) {
                acc += b[(i, m)] * b[(j, m)];
            }
            w[(i, j)] = acc;
            w[(j, i)] = acc;
        }
    }
    SpdMatrix::new(w)
}

/// Draws from the inverse gamma with the given shape and *rate* (see the
/// module docs for the parametrization): returns `1/g` with
/// `g ~ Gamma(shape, rate)`.
pub fn sample_inverse_gamma(rng: &mut RngStream, shape: f64, rate: f64) -> Result<f64> {
    if !(shape.is_finite() && shape > 0.0 && rate.is_finite() && rate > 0.0) {
        return Err(Error::Domain(format!(
            "inverse gamma requires shape > 0 and rate > 0, got shape {shape}, rate {rate}"
        )));
    }
    Ok(1.0 / rng.gamma(shape, rate)?)
}
