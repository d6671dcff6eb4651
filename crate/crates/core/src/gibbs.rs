//! The Gibbs sampler over the full conditional posteriors.
//!
//! Each iteration updates β first (so β needs no starting value), then,
//! under the unknown-(μ, C) prior, μ and C⁻¹, and finally σ² using the
//! fresh β. The scan order is fixed and introspectable via
//! [`update_order_trace`]. Starting values for σ², μ, and C⁻¹ come from
//! the prior configurations.
//!
//! The chain returns every draw; burn-in discard is the analysis step's
//! job, not the sampler's. A single chain is strictly sequential; run
//! multiple chains concurrently by giving each its own index, which selects
//! an independent random stream for the same seed.

use crate::conditionals::{
    beta_gaussian_parts, cinv_conditional, mu_gaussian_parts, sigmasq_conditional, BetaPrior,
    SigmaSqPrior, XtxFactor,
};
use crate::distributions::{
    sample_inverse_gamma, sample_mvn_from_precision, sample_wishart, RngStream,
};
use crate::error::{Error, Result};
use crate::linalg::{Mat, SpdMatrix};
use crate::summaries::SummaryStatistics;

/// Chain configuration: length, seed, intercept handling, and the two
/// prior choices.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub t_samples: usize,
    pub seed: u64,
    pub zero_intercept: bool,
    pub beta_prior: BetaPrior,
    pub sigmasq_prior: SigmaSqPrior,
}

impl ChainConfig {
    pub fn new(beta_prior: BetaPrior, sigmasq_prior: SigmaSqPrior) -> Self {
        ChainConfig {
            t_samples: 1000,
            seed: 0,
            zero_intercept: false,
            beta_prior,
            sigmasq_prior,
        }
    }
}

/// Row-major matrix of draws: one row per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DrawMatrix {
    pub fn with_capacity(rows: usize, cols: usize) -> Self {
        DrawMatrix {
            rows: 0,
            cols,
            data: Vec::with_capacity(rows * cols),
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i)[j]).collect()
    }
}

/// Everything a chain produced: `t_samples` draws of β and σ², plus μ and
/// C⁻¹ when the unknown-(μ, C) prior is in play.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub beta: DrawMatrix,
    pub sigmasq: Vec<f64>,
    pub mu: Option<DrawMatrix>,
    pub cinv: Option<Vec<SpdMatrix>>,
}

impl ChainOutput {
    pub fn t_samples(&self) -> usize {
        self.beta.rows()
    }

    pub fn p(&self) -> usize {
        self.beta.cols()
    }
}

/// Deletes the intercept row/column from the statistics, producing exactly
/// the statistics of the design without the constant column. `yty` and `n`
/// are unchanged. Calling this on statistics without an intercept is a
/// no-op.
pub fn reduce_for_zero_intercept(s: &SummaryStatistics) -> Result<SummaryStatistics> {
    if !s.intercept() {
        return Ok(s.clone());
    }
    let p = s.p();
    if p < 2 {
        return Err(Error::InvalidConfig(
            "cannot remove the intercept from a one-column design".into(),
        ));
    }
    let q = p - 1;
    let mut xtx = Mat::zeros(q, q);
    for i in 0..q {
        for j in 0..q {
            xtx[(i, j)] = s.xtx()[(i + 1, j + 1)];
        }
    }
    let xty = s.xty()[1..].to_vec();
    SummaryStatistics::from_parts(q, false, s.n(), xtx, xty, s.yty())
}

/// The fixed per-iteration update sequence for a configuration.
pub fn update_order_trace(config: &ChainConfig) -> Vec<&'static str> {
    match config.beta_prior {
        BetaPrior::MvnUnknown(_) => vec!["beta", "mu", "cinv", "sigmasq"],
        _ => vec!["beta", "sigmasq"],
    }
}

/// Runs one chain (stream 0 of the seed). See [`run_chain_indexed`].
pub fn run_chain(s: &SummaryStatistics, config: &ChainConfig) -> Result<ChainOutput> {
    run_chain_indexed(s, config, 0)
}

/// Runs the chain with the independent random stream `chain_index`,
/// producing `t_samples` draws of every unknown parameter.
///
/// Factorization or domain failures inside the loop are reported with the
/// 1-based iteration index attached.
pub fn run_chain_indexed(
    s: &SummaryStatistics,
    config: &ChainConfig,
    chain_index: u64,
) -> Result<ChainOutput> {
    if config.t_samples == 0 {
        return Err(Error::InvalidConfig("t-samples must be at least 1".into()));
    }
    let reduced;
    let s = if config.zero_intercept {
        reduced = reduce_for_zero_intercept(s)?;
        &reduced
    } else {
        s
    };
    if s.n() == 0 {
        return Err(Error::Domain(
            "cannot sample from statistics with zero observations".into(),
        ));
    }
    let p = s.p();
    config.beta_prior.validate(p)?;
    config.sigmasq_prior.validate()?;

    let mut rng = RngStream::for_chain(config.seed, chain_index);
    let t = config.t_samples;

    // Per-prior precomputation. Under the flat prior both the conditional
    // mean (XᵀX)⁻¹XᵀY and the factor of XᵀX are constant across iterations;
    // only the σ² scalar changes, so one factorization serves the whole
    // chain. Under the normal priors the precision C⁻¹ + σ⁻²XᵀX moves with
    // σ² and is re-factorized each iteration.
    enum BetaStep {
        Flat { factor: XtxFactor, ols: Vec<f64> },
        Known { cinv: SpdMatrix, mu: Vec<f64> },
        Unknown,
    }
    let beta_step = match &config.beta_prior {
        BetaPrior::Flat => {
            let factor = XtxFactor::compute(s)?;
            let ols = factor.factor().solve(s.xty());
            BetaStep::Flat { factor, ols }
        }
        BetaPrior::MvnKnown(known) => BetaStep::Known {
            cinv: known.precision()?,
            mu: known.mu.clone(),
        },
        BetaPrior::MvnUnknown(_) => BetaStep::Unknown,
    };
    let unknown_prior = match &config.beta_prior {
        BetaPrior::MvnUnknown(prior) => Some(prior),
        _ => None,
    };

    // Iteration-0 state. β is updated first and needs no starting value.
    let mut sigmasq = config.sigmasq_prior.sigmasq_init();
    let mut mu_state = unknown_prior.map(|prior| prior.mu_init.clone());
    let mut cinv_state = unknown_prior.map(|prior| prior.cinv_init.clone());

    let mut beta_draws = DrawMatrix::with_capacity(t, p);
    let mut sigmasq_draws = Vec::with_capacity(t);
    let mut mu_draws = unknown_prior.map(|_| DrawMatrix::with_capacity(t, p));
    let mut cinv_draws: Option<Vec<SpdMatrix>> = unknown_prior.map(|_| Vec::with_capacity(t));

    for iteration in 1..=t {
        let tag = |e: Error| Error::AtIteration {
            iteration,
            source: Box::new(e),
        };

        // (1) β | σ² (and μ, C⁻¹ when unknown).
        let beta: Vec<f64> = match &beta_step {
            BetaStep::Flat { factor, ols } => {
                let sigma = sigmasq.sqrt();
                let z: Vec<f64> = (0..p).map(|_| rng.standard_normal()).collect();
                let u = factor.factor().solve_upper(&z);
                ols.iter().zip(u).map(|(m, v)| m + sigma * v).collect()
            }
            BetaStep::Known { cinv, mu } => {
                let parts = beta_gaussian_parts(s, cinv, mu, sigmasq).map_err(tag)?;
                sample_mvn_from_precision(&mut rng, &parts.mean, &parts.factor).map_err(tag)?
            }
            BetaStep::Unknown => {
                let cinv = cinv_state.as_ref().unwrap();
                let mu = mu_state.as_ref().unwrap();
                let parts = beta_gaussian_parts(s, cinv, mu, sigmasq).map_err(tag)?;
                sample_mvn_from_precision(&mut rng, &parts.mean, &parts.factor).map_err(tag)?
            }
        };

        // (2) μ, then C⁻¹, under the unknown-(μ, C) prior.
        if let Some(prior) = unknown_prior {
            let parts =
                mu_gaussian_parts(prior, &beta, cinv_state.as_ref().unwrap()).map_err(tag)?;
            let mu =
                sample_mvn_from_precision(&mut rng, &parts.mean, &parts.factor).map_err(tag)?;
            let (df, scale) = cinv_conditional(prior, &beta, &mu).map_err(tag)?;
            let cinv = sample_wishart(&mut rng, df, &scale).map_err(tag)?;
            mu_draws.as_mut().unwrap().push_row(&mu);
            cinv_draws.as_mut().unwrap().push(cinv.clone());
            mu_state = Some(mu);
            cinv_state = Some(cinv);
        }

        // (3) σ² | β, with the fresh β.
        let (shape, rate) = sigmasq_conditional(s, &config.sigmasq_prior, &beta).map_err(tag)?;
        sigmasq = sample_inverse_gamma(&mut rng, shape, rate).map_err(tag)?;

        beta_draws.push_row(&beta);
        sigmasq_draws.push(sigmasq);
    }

    Ok(ChainOutput {
        beta: beta_draws,
        sigmasq: sigmasq_draws,
        mu: mu_draws,
        cinv: cinv_draws,
    })
}
